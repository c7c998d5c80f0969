"""Shaped QAM frame assembly and recovery.

The encode chain follows the usual shaped-transmission layering: matcher
blocks set the amplitude sequence, a surrogate stands in for the systematic
FEC whose parity bits would become the (uniform) sign bits, Gray mapping
produces QAM symbols, and two optional interleavers decide whether the
matcher's temporal block structure survives onto the wire:

* ``end_to_end``             - blocks map to consecutive symbols, untouched.
* ``end_to_end_interleaved`` - a per-FEC-frame burst interleaver scrambles
  the shaped amplitudes and a symbol interleaver scrambles the wire order.
* ``emulation``              - i.i.d. amplitude draws, no block structure
  at all; the infinite-interleaving reference.

The burst stage permutes amplitudes as whole label groups.  Permuting raw
bit positions instead would regroup labels and re-shape the amplitude
marginal (the mean symbol energy of the shaped 64QAM target would grow by
a factor 1.33), so interleaving would no longer be distribution-preserving
and the interleaved chain could never match the emulation reference.

All permutations and bit draws derive deterministically from the named
seeds in the config, so decoding regenerates them instead of shipping them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import logsumexp

from pasfiber._seeds import rng_for, seed_sequence
from pasfiber.distmatch import (
    AmplitudeAlphabet,
    CodewordError,
    Composition,
    ccdm_decode,
    ccdm_encode,
    draw_emulated,
    input_length,
    quantize_composition,
)
from pasfiber.labeling import GrayLabeling

MODES = ("end_to_end", "end_to_end_interleaved", "emulation")
SIGN_SOURCES = ("systematic_parity_surrogate", "uniform_random")

__all__ = [
    "MODES",
    "SIGN_SOURCES",
    "SeedSet",
    "PasConfig",
    "ShapedFrame",
    "DecodedPayload",
    "pas_encode",
    "pas_decode",
    "random_payload",
    "transmitted_bits",
    "compute_llrs",
    "burst_interleave",
    "burst_deinterleave",
    "symbol_interleave",
    "symbol_deinterleave",
]


@dataclass(frozen=True)
class SeedSet:
    """Named seeds for the independent random stages of one frame."""

    data: int
    interleavers: int
    signs: int
    channel: int

    @classmethod
    def from_master(cls, master: int, run: int = 0, wdm_channel: int = 0) -> "SeedSet":
        def fold(tag: str, *extra: int) -> int:
            return int(seed_sequence(tag, master, *extra).generate_state(1)[0])

        # The channel seed deliberately ignores the WDM channel index so a
        # sweep over block lengths sees identical noise realizations per run.
        return cls(
            data=fold("data", run, wdm_channel),
            interleavers=fold("interleavers", run, wdm_channel),
            signs=fold("signs", run, wdm_channel),
            channel=fold("channel", run),
        )


@lru_cache(maxsize=64)
def _labeling(qam_order: int) -> GrayLabeling:
    return GrayLabeling(qam_order)


@lru_cache(maxsize=256)
def _composition(probs: tuple, n: int) -> Composition:
    return quantize_composition(list(probs), n)


@dataclass(frozen=True)
class PasConfig:
    """Everything needed to build and invert one dual-polarization frame."""

    qam_order: int
    alphabet: AmplitudeAlphabet
    block_len: int
    mode: str
    symbols_per_pol: int
    fec_frame_bits: int = 64800
    sign_source: str = "systematic_parity_surrogate"
    seeds: SeedSet = field(default_factory=lambda: SeedSet.from_master(0))

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.sign_source not in SIGN_SOURCES:
            raise ValueError(f"sign_source must be one of {SIGN_SOURCES}")
        lab = _labeling(self.qam_order)
        if len(self.alphabet.levels) != lab.num_amplitudes:
            raise ValueError(
                f"{self.qam_order}QAM needs {lab.num_amplitudes} amplitude levels"
            )
        if tuple(self.alphabet.levels) != tuple(lab.ask_levels[lab.num_amplitudes :]):
            raise ValueError("alphabet levels must be the odd positive ASK levels")
        if self.symbols_per_pol < 1 or self.block_len < 1:
            raise ValueError("symbols_per_pol and block_len must be positive")
        if self.fec_frame_bits % lab.bits_per_symbol:
            raise ValueError("fec_frame_bits must divide into whole QAM symbols")
        if self.amplitudes_per_pol % self.block_len:
            raise ValueError(
                f"{self.amplitudes_per_pol} amplitudes per polarization do not "
                f"hold an integer number of length-{self.block_len} blocks; "
                "padding is not supported"
            )

    # -- derived bookkeeping ------------------------------------------------

    @property
    def labeling(self) -> GrayLabeling:
        return _labeling(self.qam_order)

    @property
    def bits_per_symbol(self) -> int:
        return self.labeling.bits_per_symbol

    @property
    def amplitudes_per_pol(self) -> int:
        return 2 * self.symbols_per_pol

    @property
    def composition(self) -> Composition:
        return _composition(tuple(self.alphabet.probs), self.block_len)

    @property
    def blocks_per_pol(self) -> int:
        return self.amplitudes_per_pol // self.block_len

    @property
    def payload_bits_per_pol(self) -> int:
        return self.blocks_per_pol * input_length(self.composition)

    @property
    def amp_bits_per_frame(self) -> int:
        m = self.bits_per_symbol
        return self.fec_frame_bits * (m - 2) // m

    @property
    def amplitudes_per_frame(self) -> int:
        return self.fec_frame_bits * 2 // self.bits_per_symbol

    @property
    def sign_bits_per_frame(self) -> int:
        return self.fec_frame_bits * 2 // self.bits_per_symbol

    def constellation_scale(self) -> float:
        """Scale putting the composition-shaped constellation at unit energy."""
        probs = (
            self.composition.probs
            if self.mode != "emulation"
            else np.asarray(self.alphabet.probs)
        )
        levels = np.asarray(self.alphabet.levels, dtype=float)
        return float(1.0 / np.sqrt(2.0 * (probs * levels**2).sum()))


@dataclass
class ShapedFrame:
    """One dual-polarization frame as it leaves the encoder."""

    config: PasConfig
    qam_symbols: np.ndarray  # (2, S) complex128, unit mean power
    sign_bits: np.ndarray  # (2, 2S) uint8, one sign per amplitude slot
    scale: float  # mapping from odd integer levels to the wire
    amplitudes: np.ndarray  # (2, 2S) int8 level indices in matcher order
    payload_bits: np.ndarray | None  # (2, K) uint8; None in emulation mode
    burst_perms: list | None  # per pol: list of per-FEC-frame permutations
    symbol_perms: np.ndarray | None  # (2, S) wire-order permutations

    def amplitude_blocks(self, pol: int):
        """Matcher blocks of one polarization, or None when there are none."""
        if self.config.mode == "emulation":
            return None
        n = self.config.block_len
        return [
            self.amplitudes[pol, i : i + n]
            for i in range(0, self.amplitudes.shape[1], n)
        ]


@dataclass
class DecodedPayload:
    payload_bits: np.ndarray  # (2, K) uint8
    failed_blocks: int
    total_blocks: int


# -- interleavers -----------------------------------------------------------


def _frame_bounds(total: int, per_frame: int) -> list[tuple[int, int]]:
    edges = list(range(0, total, per_frame)) + [total]
    return [(a, b) for a, b in zip(edges, edges[1:])]


def _burst_perms(total: int, per_frame: int, seed: int) -> list[np.ndarray]:
    # One independent permutation per FEC frame, derived from (seed, index).
    return [
        rng_for("burst-frame", seed, idx).permutation(b - a)
        for idx, (a, b) in enumerate(_frame_bounds(total, per_frame))
    ]


def burst_interleave(bits: np.ndarray, frame_len: int, seed: int) -> np.ndarray:
    """Permute bits uniformly within each FEC frame (last frame may be short)."""
    bits = np.asarray(bits)
    out = np.empty_like(bits)
    perms = _burst_perms(bits.size, frame_len, seed)
    for (a, b), perm in zip(_frame_bounds(bits.size, frame_len), perms):
        out[a:b] = bits[a:b][perm]
    return out


def burst_deinterleave(bits: np.ndarray, frame_len: int, seed: int) -> np.ndarray:
    bits = np.asarray(bits)
    out = np.empty_like(bits)
    perms = _burst_perms(bits.size, frame_len, seed)
    for (a, b), perm in zip(_frame_bounds(bits.size, frame_len), perms):
        out[a:b][perm] = bits[a:b]
    return out


def symbol_interleave(symbols: np.ndarray, seed: int) -> np.ndarray:
    """Seeded uniform permutation of a whole symbol sequence."""
    symbols = np.asarray(symbols)
    return symbols[rng_for("symbol-il", seed).permutation(symbols.size)]


def symbol_deinterleave(symbols: np.ndarray, seed: int) -> np.ndarray:
    symbols = np.asarray(symbols)
    out = np.empty_like(symbols)
    out[rng_for("symbol-il", seed).permutation(symbols.size)] = symbols
    return out


# -- encode -----------------------------------------------------------------


def random_payload(config: PasConfig) -> np.ndarray:
    """Uniform payload bits for both polarizations, from the data seed."""
    k_total = config.payload_bits_per_pol
    rng = rng_for("payload", config.seeds.data)
    return rng.integers(0, 2, size=(2, k_total)).astype(np.uint8)


def _draw_signs(config: PasConfig, pol: int) -> np.ndarray:
    total = config.amplitudes_per_pol
    if config.mode != "emulation" and config.sign_source == "systematic_parity_surrogate":
        # Stand-in for the inner systematic encoder: one uniform parity
        # stream per FEC frame, seeded per frame.
        parts = []
        for idx, (a, b) in enumerate(_frame_bounds(total, config.sign_bits_per_frame)):
            rng = rng_for("sign-frame", config.seeds.signs, pol, idx)
            parts.append(rng.integers(0, 2, size=b - a))
        return np.concatenate(parts).astype(np.uint8)
    rng = rng_for("sign-stream", config.seeds.signs, pol)
    return rng.integers(0, 2, size=total).astype(np.uint8)


def pas_encode(payload_bits: np.ndarray | None, config: PasConfig) -> ShapedFrame:
    """Assemble one dual-polarization frame of shaped QAM symbols.

    `payload_bits` must be (2, payload_bits_per_pol) for the end-to-end
    modes and None in emulation mode (where amplitudes are drawn i.i.d.
    from the target distribution instead of coming from matcher blocks).
    """
    lab = config.labeling
    S = config.symbols_per_pol
    g = lab.amp_bit_width

    if config.mode == "emulation":
        if payload_bits is not None:
            raise ValueError("emulation mode carries no payload")
        comp = k = None
    else:
        comp = config.composition
        k = input_length(comp)
        payload_bits = np.asarray(payload_bits)
        if payload_bits.shape != (2, config.payload_bits_per_pol):
            raise ValueError(
                f"payload must have shape (2, {config.payload_bits_per_pol})"
            )

    amplitudes = np.empty((2, config.amplitudes_per_pol), dtype=np.int8)
    sign_bits = np.empty((2, config.amplitudes_per_pol), dtype=np.uint8)
    symbols = np.empty((2, S), dtype=np.complex128)
    burst_perms: list | None = [] if config.mode == "end_to_end_interleaved" else None
    symbol_perms = (
        np.empty((2, S), dtype=np.int64)
        if config.mode == "end_to_end_interleaved"
        else None
    )
    scale = config.constellation_scale()

    for pol in range(2):
        if config.mode == "emulation":
            amplitudes[pol] = draw_emulated(
                config.alphabet,
                config.amplitudes_per_pol,
                seed_sequence("emulated-draw", config.seeds.data, pol),
            )
        else:
            words = payload_bits[pol].reshape(config.blocks_per_pol, k)
            amplitudes[pol] = np.concatenate(
                [ccdm_encode(w, comp) for w in words]
            )

        wire_amplitudes = amplitudes[pol]
        if config.mode == "end_to_end_interleaved":
            pol_seed = int(seed_sequence("burst", config.seeds.interleavers, pol).generate_state(1)[0])
            wire_amplitudes = burst_interleave(
                wire_amplitudes, config.amplitudes_per_frame, pol_seed
            )
            burst_perms.append(
                _burst_perms(wire_amplitudes.size, config.amplitudes_per_frame, pol_seed)
            )
        amp_bit_stream = lab.amp_bits[wire_amplitudes].reshape(-1)

        sign_bits[pol] = _draw_signs(config, pol)

        per_dim_bits = amp_bit_stream.reshape(S, 2, g)
        amp_idx = lab.pack_amp_bits(per_dim_bits)  # (S, 2)
        signs = sign_bits[pol].reshape(S, 2)
        rails = (2 * amp_idx + 1) * (2 * signs.astype(np.int64) - 1)
        sym = scale * (rails[:, 0] + 1j * rails[:, 1])

        if config.mode == "end_to_end_interleaved":
            pol_seed = int(seed_sequence("wire", config.seeds.interleavers, pol).generate_state(1)[0])
            perm = rng_for("symbol-il", pol_seed).permutation(S)
            sym = sym[perm]
            symbol_perms[pol] = perm
        symbols[pol] = sym

    if config.mode == "emulation":
        # Histograms of finite i.i.d. draws wobble, so pin the realized frame
        # to unit mean power with one joint scalar.
        power = float(np.mean(np.abs(symbols) ** 2))
        symbols /= np.sqrt(power)
        scale /= np.sqrt(power)

    return ShapedFrame(
        config=config,
        qam_symbols=symbols,
        sign_bits=sign_bits,
        scale=scale,
        amplitudes=amplitudes,
        payload_bits=None if config.mode == "emulation" else payload_bits.copy(),
        burst_perms=burst_perms,
        symbol_perms=symbol_perms,
    )


# -- decode -----------------------------------------------------------------


def _map_rail_indices(
    values: np.ndarray, config: PasConfig, noise_variance: float | None
) -> np.ndarray:
    """Per-dimension decisions on real values, MAP under the shaping priors."""
    lab = config.labeling
    levels = lab.ask_levels * config.constellation_scale()
    if noise_variance is None:
        return np.argmin(np.abs(values[:, None] - levels[None, :]), axis=1)
    amp_probs = config.composition.probs
    log_prior = np.log(np.concatenate((amp_probs[::-1], amp_probs)) / 2.0)
    score = log_prior[None, :] - (values[:, None] - levels[None, :]) ** 2 / noise_variance
    return np.argmax(score, axis=1)


def pas_decode(
    received: np.ndarray, config: PasConfig, noise_variance: float | None = None
) -> DecodedPayload:
    """Recover payload bits from received symbols (ideal FEC assumed).

    Runs symbol-wise decisions (MAP when noise_variance is given, nearest
    neighbor otherwise), undoes the interleavers from the config seeds, and
    inverts every matcher block.  Blocks whose histogram mismatches the
    composition or whose rank falls outside the code image are counted and
    emitted as zero bits rather than aborting the frame.
    """
    if config.mode == "emulation":
        raise ValueError("emulation frames carry no payload to decode")
    received = np.asarray(received)
    if received.shape != (2, config.symbols_per_pol):
        raise ValueError("received symbols must have shape (2, symbols_per_pol)")

    lab = config.labeling
    S = config.symbols_per_pol
    comp = config.composition
    k = input_length(comp)

    payload = np.zeros((2, config.payload_bits_per_pol), dtype=np.uint8)
    failed = 0
    for pol in range(2):
        sym = received[pol]
        if config.mode == "end_to_end_interleaved":
            pol_seed = int(seed_sequence("wire", config.seeds.interleavers, pol).generate_state(1)[0])
            sym = symbol_deinterleave(sym, pol_seed)

        rail_values = np.empty(2 * S)
        rail_values[0::2] = sym.real
        rail_values[1::2] = sym.imag
        rail_idx = _map_rail_indices(rail_values, config, noise_variance)
        _, amp_idx = lab.split_ask_index(rail_idx)

        amplitudes = amp_idx
        if config.mode == "end_to_end_interleaved":
            pol_seed = int(seed_sequence("burst", config.seeds.interleavers, pol).generate_state(1)[0])
            amplitudes = burst_deinterleave(
                amplitudes, config.amplitudes_per_frame, pol_seed
            )
        for b, start in enumerate(range(0, amplitudes.size, comp.n)):
            block = amplitudes[start : start + comp.n]
            try:
                payload[pol, b * k : (b + 1) * k] = ccdm_decode(block, comp)
            except CodewordError:
                failed += 1
    return DecodedPayload(
        payload_bits=payload,
        failed_blocks=failed,
        total_blocks=2 * config.blocks_per_pol,
    )


# -- soft information ---------------------------------------------------------


def transmitted_bits(frame: ShapedFrame) -> np.ndarray:
    """Wire-order bit planes of a frame, shape (2, S, bits_per_symbol).

    Per symbol the layout is [sign_I, amp bits I..., sign_Q, amp bits Q...],
    matching compute_llrs.  Recovered by exact demapping of the clean
    symbols, so it reflects whatever interleaving the frame applied.
    """
    lab = frame.config.labeling
    num_ask = 2 * lab.num_amplitudes
    sym = frame.qam_symbols / frame.scale
    out = []
    for part in (sym.real, sym.imag):
        idx = np.rint((part + num_ask - 1) / 2).astype(np.int64)
        if np.any(idx < 0) or np.any(idx >= num_ask):
            raise ValueError("frame symbols are not clean constellation points")
        out.append(lab.ask_bits[idx])
    return np.concatenate(out, axis=-1).astype(np.uint8)


def compute_llrs(
    received: np.ndarray,
    config: PasConfig,
    noise_variance: float,
    scale: float | None = None,
) -> np.ndarray:
    """Bit-level LLRs ln(P[c=0|y] / P[c=1|y]) under an AWGN surrogate.

    The auxiliary channel is circular Gaussian with `noise_variance` per
    complex symbol; amplitude priors come from the block composition (or
    the target distribution in emulation mode).  Output shape is
    (2, S, bits_per_symbol), layout as in `transmitted_bits`.
    """
    if noise_variance <= 0:
        raise ValueError("noise_variance must be positive")
    received = np.asarray(received)
    lab = config.labeling
    if scale is None:
        scale = config.constellation_scale()
    levels = lab.ask_levels * scale
    if config.mode == "emulation":
        amp_probs = np.asarray(config.alphabet.probs)
    else:
        amp_probs = config.composition.probs
    log_prior = np.log(np.concatenate((amp_probs[::-1], amp_probs)) / 2.0)

    def rail_llrs(values: np.ndarray) -> np.ndarray:
        # (..., 2L) log metric per candidate level, then split per bit.
        metric = log_prior - (values[..., None] - levels) ** 2 / noise_variance
        width = lab.amp_bit_width + 1
        out = np.empty(values.shape + (width,))
        for b in range(width):
            zero = lab.ask_bits[:, b] == 0
            out[..., b] = logsumexp(metric[..., zero], axis=-1) - logsumexp(
                metric[..., ~zero], axis=-1
            )
        return out

    per_dim = rail_llrs(np.stack((received.real, received.imag), axis=-1))
    # (..., 2, width) -> [..., sign_I, ampI..., sign_Q, ampQ...]
    return per_dim.reshape(received.shape + (2 * (lab.amp_bit_width + 1),))
