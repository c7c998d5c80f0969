"""Link quality metrics: effective SNR and achievable information rates.

Rates follow the bit-metric decoding view of a PAS receiver: the soft
demapper emits one LLR per bit, the equivocation of those LLRs is charged
against the input entropy, and the shaping code's rate loss is subtracted
on top.  Conventions used throughout:

* a 2D symbol is one complex QAM symbol, a 4D symbol is the pair across
  both polarizations, so 4D rates are twice the 2D rates;
* input entropy per 2D symbol is 2 (1 + H(A)) with H(A) the entropy of the
  amplitude distribution actually on the wire (signs are uniform);
* rate loss is per amplitude, so a 4D symbol carries four times it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SNR_CAP_DB = 100.0

__all__ = [
    "SNR_CAP_DB",
    "MetricReport",
    "effective_snr_db",
    "combine_snr_db",
    "bmd_rate_2d",
    "air_4d",
    "metric_report",
    "average_reports",
]


def effective_snr_db(received: np.ndarray, reference: np.ndarray) -> float:
    """Signal-to-distortion ratio, signal power over var(received - reference).

    Distortion is the complex variance of the error, taken jointly over
    whatever axes the inputs carry, so passing both polarizations gives the
    polarization-averaged figure.  Returns dB, capped at `SNR_CAP_DB` so a
    noiseless loopback reports a finite sentinel.
    """
    received = np.asarray(received)
    reference = np.asarray(reference)
    if received.shape != reference.shape:
        raise ValueError("received and reference must share a shape")
    signal = float(np.mean(np.abs(reference) ** 2))
    if signal == 0.0:
        raise ValueError("reference has zero power")
    distortion = float(np.var(received - reference))
    if distortion <= signal * 10.0 ** (-SNR_CAP_DB / 10.0):
        return SNR_CAP_DB
    return 10.0 * math.log10(signal / distortion)


def combine_snr_db(snr_db_values) -> float:
    """Average SNRs across runs on the distortion (linear MSE) scale."""
    values = np.asarray(list(snr_db_values), dtype=float)
    if values.size == 0:
        raise ValueError("nothing to combine")
    mean_mse = np.mean(10.0 ** (-values / 10.0))
    return float(-10.0 * math.log10(mean_mse))


def bmd_rate_2d(llrs: np.ndarray, bits: np.ndarray, entropy_2d: float) -> float:
    """Achievable rate of bit-metric decoding, bits per 2D symbol.

    `llrs` and `bits` are aligned arrays whose last axis runs over the bits
    of one 2D symbol; llrs are ln(P[bit=0|y] / P[bit=1|y]).  The rate is
    the input entropy minus the LLR equivocation, clamped at zero since a
    decoder can always fall back to ignoring the channel.
    """
    llrs = np.asarray(llrs, dtype=float)
    bits = np.asarray(bits)
    if llrs.shape != bits.shape:
        raise ValueError("llrs and bits must share a shape")
    bits_per_symbol = llrs.shape[-1]
    signed = np.where(bits == 0, -llrs, llrs)
    equivocation = bits_per_symbol * float(np.mean(np.logaddexp(0.0, signed))) / math.log(2.0)
    return max(entropy_2d - equivocation, 0.0)


def air_4d(bmd_2d: float, rate_loss_per_amp: float) -> float:
    """Net PAS rate over two polarizations, bits per 4D symbol."""
    return 2.0 * (bmd_2d - 2.0 * rate_loss_per_amp)


@dataclass(frozen=True)
class MetricReport:
    """Receiver-side quality figures for one run, or averaged over runs."""

    snr_db_x: float
    snr_db_y: float
    snr_db_avg: float
    bmd_b4d: float
    rate_loss_b4d: float
    air_b4d: float
    run_count: int = 1
    config_hash: str = ""


def metric_report(
    received: np.ndarray,
    reference: np.ndarray,
    llrs: np.ndarray,
    bits: np.ndarray,
    amp_entropy: float,
    rate_loss_per_amp: float,
    config_hash: str = "",
) -> MetricReport:
    """Bundle SNR and rate metrics for one equalized run.

    `amp_entropy` is the entropy of the frame's amplitude distribution: the
    composition-induced one for matched frames (exact for every block), the
    target one for emulation draws.
    """
    entropy_2d = 2.0 * (1.0 + amp_entropy)
    bmd = bmd_rate_2d(llrs, bits, entropy_2d)
    return MetricReport(
        snr_db_x=effective_snr_db(received[0], reference[0]),
        snr_db_y=effective_snr_db(received[1], reference[1]),
        snr_db_avg=effective_snr_db(received, reference),
        bmd_b4d=2.0 * bmd,
        rate_loss_b4d=4.0 * rate_loss_per_amp,
        air_b4d=air_4d(bmd, rate_loss_per_amp),
        config_hash=config_hash,
    )


def average_reports(reports: "list[MetricReport]") -> MetricReport:
    """Combine per-run reports: SNRs on the distortion scale, rates linearly."""
    if not reports:
        raise ValueError("nothing to average")
    return MetricReport(
        snr_db_x=combine_snr_db([r.snr_db_x for r in reports]),
        snr_db_y=combine_snr_db([r.snr_db_y for r in reports]),
        snr_db_avg=combine_snr_db([r.snr_db_avg for r in reports]),
        bmd_b4d=float(np.mean([r.bmd_b4d for r in reports])),
        rate_loss_b4d=float(np.mean([r.rate_loss_b4d for r in reports])),
        air_b4d=float(np.mean([r.air_b4d for r in reports])),
        run_count=sum(r.run_count for r in reports),
        config_hash=reports[0].config_hash,
    )
