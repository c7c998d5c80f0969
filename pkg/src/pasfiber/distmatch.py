"""Fixed-length distribution matching on constant-composition blocks.

A matcher block maps k uniform payload bits onto n amplitude symbols whose
histogram equals a fixed composition, and back.  Block indexing uses exact
arbitrary-precision multiset ranking in lexicographic order, so the mapping
is invertible with zero failure probability and every block carries exactly
the same amplitude histogram.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "AmplitudeAlphabet",
    "Composition",
    "CodewordError",
    "RunLengthStats",
    "quantize_composition",
    "input_length",
    "ccdm_encode",
    "ccdm_decode",
    "rate_loss",
    "draw_emulated",
    "run_length_stats",
]


class CodewordError(ValueError):
    """A received block cannot be mapped back to payload bits."""


@dataclass(frozen=True)
class AmplitudeAlphabet:
    """Ordered positive amplitude levels with target probabilities.

    For square QAM the levels are the positive pulse amplitudes per real
    dimension (1, 3 for 16QAM; 1, 3, 5, 7 for 64QAM), probabilities are the
    one-sided target distribution.
    """

    levels: tuple[float, ...]
    probs: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.levels) != len(self.probs):
            raise ValueError("levels and probs must have equal length")
        if any(a <= 0 for a in self.levels):
            raise ValueError("amplitude levels must be positive")
        if any(b <= a for a, b in zip(self.levels, self.levels[1:])):
            raise ValueError("amplitude levels must be strictly increasing")
        if any(p < 0 for p in self.probs):
            raise ValueError("probabilities must be nonnegative")
        if abs(sum(self.probs) - 1.0) > 1e-9:
            raise ValueError("probabilities must sum to one")

    @property
    def entropy(self) -> float:
        """Source entropy H(A) in bits per amplitude."""
        p = np.asarray([q for q in self.probs if q > 0.0])
        return float(-(p * np.log2(p)).sum())


@dataclass(frozen=True)
class Composition:
    """Per-level symbol counts of one matcher block."""

    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.counts:
            raise ValueError("composition must have at least one level")
        if any(int(c) != c or c < 0 for c in self.counts):
            raise ValueError("counts must be nonnegative integers")
        if sum(self.counts) < 1:
            raise ValueError("composition must contain at least one symbol")

    @property
    def n(self) -> int:
        """Block length in amplitudes."""
        return int(sum(self.counts))

    @property
    def probs(self) -> np.ndarray:
        """Induced per-level probabilities counts / n."""
        return np.asarray(self.counts, dtype=float) / self.n


@lru_cache(maxsize=256)
def _num_sequences(counts: tuple[int, ...]) -> int:
    """Exact number of distinct arrangements n! / prod(c_i!)."""
    total, remaining = 1, sum(counts)
    for c in counts:
        total *= math.comb(remaining, c)
        remaining -= c
    return total


def input_length(composition: Composition) -> int:
    """Payload size k = floor(log2 of the arrangement count) in bits."""
    return _num_sequences(composition.counts).bit_length() - 1


def quantize_composition(probs: "list[float] | tuple[float, ...]", n: int) -> Composition:
    """Best length-n composition for a target distribution.

    Starts from floor(n * p_i) and assigns the leftover symbols one at a
    time to whichever level shrinks the informational divergence between
    counts/n and the target the most.  Ties go to the higher level index,
    which keeps the resulting counts vector lexicographically smallest.
    """
    p = np.asarray(probs, dtype=float)
    if n < 1:
        raise ValueError("block length must be at least 1")
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
        raise ValueError("probs must be a distribution")
    support = np.flatnonzero(p > 0)
    if n < support.size:
        raise ValueError(
            f"block length {n} cannot represent {support.size} nonzero levels"
        )
    # Small nudge so exact products like 10 * 0.3 survive the floor.
    counts = np.where(p > 0, np.floor(n * p + 1e-9).astype(int), 0)

    def cost(c: int, target: float) -> float:
        return c * math.log2(c / (n * target)) if c else 0.0

    for _ in range(n - int(counts.sum())):
        best, best_delta = -1, math.inf
        for i in support:
            delta = cost(counts[i] + 1, p[i]) - cost(counts[i], p[i])
            if delta <= best_delta:
                best, best_delta = i, delta
        counts[best] += 1
    return Composition(tuple(int(c) for c in counts))


def _bits_to_int(bits: np.ndarray) -> int:
    value = 0
    for b in bits:
        value = (value << 1) | int(b)
    return value


def _int_to_bits(value: int, width: int) -> np.ndarray:
    return np.array([(value >> (width - 1 - i)) & 1 for i in range(width)], dtype=np.uint8)


def ccdm_encode(bits: np.ndarray, composition: Composition) -> np.ndarray:
    """Map a k-bit payload to the block with that lexicographic rank.

    Codewords are ordered lexicographically in the level indices; the
    payload integer (MSB first) selects one of the first 2**k arrangements.
    Returns level indices as an int8 array of length n.
    """
    bits = np.asarray(bits)
    k = input_length(composition)
    if bits.size != k:
        raise ValueError(f"payload must be exactly {k} bits, got {bits.size}")
    if bits.size and not np.all((bits == 0) | (bits == 1)):
        raise ValueError("payload must be binary")
    index = _bits_to_int(bits)

    counts = list(composition.counts)
    remaining = composition.n
    total = _num_sequences(composition.counts)
    out = np.empty(remaining, dtype=np.int8)
    for pos in range(remaining):
        for level, c in enumerate(counts):
            if not c:
                continue
            # Arrangements of the remaining multiset that start with `level`.
            prefixed = total * c // remaining
            if index < prefixed:
                out[pos] = level
                counts[level] -= 1
                total = prefixed
                break
            index -= prefixed
        remaining -= 1
    return out


def ccdm_decode(symbols: np.ndarray, composition: Composition) -> np.ndarray:
    """Recover the k payload bits from one block of level indices.

    Raises CodewordError when the block histogram mismatches the composition
    or when the lexicographic rank falls outside the 2**k code image.
    """
    symbols = np.asarray(symbols)
    if symbols.size != composition.n:
        raise CodewordError(
            f"block must contain {composition.n} symbols, got {symbols.size}"
        )
    hist = np.bincount(symbols.astype(np.int64), minlength=len(composition.counts))
    if hist.size > len(composition.counts) or tuple(hist.tolist()) != tuple(
        composition.counts
    ):
        raise CodewordError("block histogram does not match the composition")

    counts = list(composition.counts)
    remaining = composition.n
    total = _num_sequences(composition.counts)
    index = 0
    for value in symbols:
        for level in range(int(value)):
            if counts[level]:
                index += total * counts[level] // remaining
        total = total * counts[int(value)] // remaining
        counts[int(value)] -= 1
        remaining -= 1

    k = input_length(composition)
    if index >= (1 << k):
        raise CodewordError("block rank lies outside the code image")
    return _int_to_bits(index, k)


def rate_loss(alphabet: AmplitudeAlphabet, n: int) -> float:
    """Shaping rate loss H(A) - k/n in bits per amplitude at block length n."""
    composition = quantize_composition(alphabet.probs, n)
    return alphabet.entropy - input_length(composition) / n


def draw_emulated(alphabet: AmplitudeAlphabet, count: int, seed) -> np.ndarray:
    """i.i.d. level indices from the target distribution (matcher bypass)."""
    rng = np.random.default_rng(seed)
    return rng.choice(len(alphabet.levels), size=count, p=alphabet.probs).astype(np.int8)


@dataclass(frozen=True)
class RunLengthStats:
    """Temporal structure summary of an amplitude index sequence."""

    max_run: np.ndarray  # longest run per level
    window_counts: np.ndarray | None  # per-window level histograms, or None


def run_length_stats(
    symbols: np.ndarray, num_levels: int, window: int | None = None
) -> RunLengthStats:
    """Longest run per level, plus histograms over aligned windows.

    With `window` set (typically the block length), the sequence is cut into
    contiguous windows of that size and each window's level histogram is
    returned; the sequence length must divide evenly.
    """
    symbols = np.asarray(symbols, dtype=np.int64)
    max_run = np.zeros(num_levels, dtype=np.int64)
    if symbols.size:
        change = np.flatnonzero(np.diff(symbols)) + 1
        starts = np.concatenate(([0], change))
        ends = np.concatenate((change, [symbols.size]))
        lengths = ends - starts
        values = symbols[starts]
        for level in range(num_levels):
            runs = lengths[values == level]
            if runs.size:
                max_run[level] = runs.max()

    window_counts = None
    if window is not None:
        if window < 1 or symbols.size % window:
            raise ValueError("window must divide the sequence length")
        rows = symbols.reshape(-1, window)
        window_counts = np.zeros((rows.shape[0], num_levels), dtype=np.int64)
        for level in range(num_levels):
            window_counts[:, level] = (rows == level).sum(axis=1)
    return RunLengthStats(max_run=max_run, window_counts=window_counts)
