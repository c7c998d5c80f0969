"""Binary snapshots of sampled fields, tagged with a config digest."""

from __future__ import annotations

import dataclasses
import hashlib
import struct
from pathlib import Path

import numpy as np

MAGIC = b"PASF"
VERSION = 1
_HEADER = struct.Struct("<4sHHQd16s")

__all__ = ["config_digest", "write_field", "read_field"]


def _canonical(value) -> str:
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        fields = dataclasses.fields(value)
        inner = ",".join(f"{f.name}={_canonical(getattr(value, f.name))}" for f in fields)
        return f"{type(value).__name__}({inner})"
    if isinstance(value, (tuple, list)):
        return "[" + ",".join(_canonical(v) for v in value) + "]"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def config_digest(config) -> str:
    """16-byte hex digest of a config dataclass, stable across runs."""
    return hashlib.sha256(_canonical(config).encode()).hexdigest()[:32]


def write_field(path, samples: np.ndarray, sample_rate_hz: float, digest: str = "0" * 32) -> None:
    """Write complex (npol, N) samples as interleaved little-endian f64 I/Q."""
    samples = np.asarray(samples, dtype=np.complex128)
    if samples.ndim != 2:
        raise ValueError("samples must be (npol, N)")
    npol, count = samples.shape
    header = _HEADER.pack(
        MAGIC, VERSION, npol, count, sample_rate_hz, bytes.fromhex(digest)
    )
    body = np.empty((npol, count, 2), dtype="<f8")
    body[..., 0] = samples.real
    body[..., 1] = samples.imag
    Path(path).write_bytes(header + body.tobytes())


def read_field(path):
    """Read a snapshot back as (samples, sample_rate_hz, digest)."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError("truncated field file")
    magic, version, npol, count, rate, digest = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ValueError("not a field snapshot")
    if version != VERSION:
        raise ValueError(f"unsupported snapshot version {version}")
    body = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    if body.size != npol * count * 2:
        raise ValueError("field payload size mismatch")
    body = body.reshape(npol, count, 2)
    samples = body[..., 0] + 1j * body[..., 1]
    return samples, rate, digest.hex()
