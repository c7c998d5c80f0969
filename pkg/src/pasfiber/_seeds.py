"""Deterministic RNG derivation for every randomized stage of the pipeline.

All randomness flows from a single master seed plus a tuple of context keys
(stage tag, run index, channel index, ...).  String keys are folded to ints
through SHA-256 so the derivation is stable across processes and platforms.
"""

from __future__ import annotations

import hashlib

import numpy as np


def _fold(key: int | str) -> int:
    if isinstance(key, (int, np.integer)):
        return int(key)
    digest = hashlib.sha256(str(key).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def seed_sequence(*keys: int | str) -> np.random.SeedSequence:
    """Build a SeedSequence from an ordered tuple of context keys."""
    return np.random.SeedSequence([_fold(k) for k in keys])


def rng_for(*keys: int | str) -> np.random.Generator:
    """Independent generator for one (stage, indices...) context."""
    return np.random.default_rng(seed_sequence(*keys))
