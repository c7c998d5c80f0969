"""Metric tests, with a numeric-integration oracle for the BMD rate."""

import math

import numpy as np
import pytest

from pasfiber.channel import awgn_channel
from pasfiber.distmatch import AmplitudeAlphabet
from pasfiber.labeling import GrayLabeling
from pasfiber.metrics import (
    SNR_CAP_DB,
    MetricReport,
    air_4d,
    bmd_rate_2d,
    combine_snr_db,
    effective_snr_db,
    metric_report,
)
from pasfiber.pascodec import PasConfig, SeedSet, compute_llrs, pas_encode, transmitted_bits

SHAPED_16 = AmplitudeAlphabet((1, 3), (0.7, 0.3))
SHAPED_64 = AmplitudeAlphabet((1, 3, 5, 7), (0.4, 0.3, 0.2, 0.1))


class TestEffectiveSnr:
    def test_known_noise_power(self):
        rng = np.random.default_rng(0)
        ref = np.exp(2j * math.pi * rng.random((2, 50_000)))
        noise = rng.normal(size=ref.shape) + 1j * rng.normal(size=ref.shape)
        noise *= math.sqrt(0.01 / 2)
        assert effective_snr_db(ref + noise, ref) == pytest.approx(20.0, abs=0.05)

    def test_clean_signal_hits_cap(self):
        ref = np.ones((2, 100), dtype=complex)
        assert effective_snr_db(ref, ref) == SNR_CAP_DB
        assert effective_snr_db(ref * (1 + 1e-9), ref) == SNR_CAP_DB

    def test_rejects_degenerate_inputs(self):
        ref = np.ones((2, 8))
        with pytest.raises(ValueError, match="shape"):
            effective_snr_db(ref[:, :4], ref)
        with pytest.raises(ValueError, match="zero power"):
            effective_snr_db(ref, np.zeros_like(ref))

    def test_run_combination_averages_distortion(self):
        assert combine_snr_db([17.3]) == pytest.approx(17.3)
        # Equal-power runs at 10 and 20 dB: mean MSE is 0.055.
        expected = -10 * math.log10((0.1 + 0.01) / 2)
        assert combine_snr_db([10.0, 20.0]) == pytest.approx(expected)
        assert combine_snr_db([20.0, 10.0]) == pytest.approx(expected)
        with pytest.raises(ValueError):
            combine_snr_db([])


class TestBmdRate:
    def test_zero_llrs_reach_exactly_zero_for_uniform_input(self):
        # Entropy 4 b/2D minus 4 bits of equivocation: nothing left.
        llrs = np.zeros((1000, 4))
        bits = np.random.default_rng(1).integers(0, 2, size=llrs.shape)
        assert bmd_rate_2d(llrs, bits, 4.0) == 0.0

    def test_zero_llrs_clamp_for_shaped_input(self):
        # Shaped 64QAM input entropy is about 5.69 b/2D, below the 6 bits
        # of equivocation; the rate clamps at zero instead of going negative.
        llrs = np.zeros((1000, 6))
        bits = np.random.default_rng(2).integers(0, 2, size=llrs.shape)
        entropy_2d = 2 * (1 + SHAPED_64.entropy)
        assert entropy_2d < 6.0
        assert bmd_rate_2d(llrs, bits, entropy_2d) == 0.0

    def test_confident_correct_llrs_recover_full_entropy(self):
        rng = np.random.default_rng(3)
        bits = rng.integers(0, 2, size=(500, 4))
        llrs = np.where(bits == 0, 1e3, -1e3)
        assert bmd_rate_2d(llrs, bits, 3.5) == pytest.approx(3.5, abs=1e-10)

    def test_matches_numeric_integration_oracle(self):
        # Independent oracle: per-rail expectation of the bitwise
        # equivocation by brute-force integration over the channel output.
        probs = np.array(SHAPED_16.probs)
        h_amp = SHAPED_16.entropy
        scale = 1 / math.sqrt(2 * (probs @ (np.array([1.0, 3.0]) ** 2)))
        levels = np.array([-3, -1, 1, 3], float) * scale
        rail_priors = np.array([probs[1], probs[0], probs[0], probs[1]]) / 2
        rail_bits = GrayLabeling(16).ask_bits

        snr_db = 10.0
        sigma_rail = math.sqrt(10 ** (-snr_db / 10) / 2)
        y = np.linspace(levels[0] - 10 * sigma_rail, levels[-1] + 10 * sigma_rail, 40_001)
        dy = y[1] - y[0]
        comps = np.array(
            [
                q * np.exp(-((y - x) ** 2) / (2 * sigma_rail**2))
                / math.sqrt(2 * math.pi * sigma_rail**2)
                for q, x in zip(rail_priors, levels)
            ]
        )
        equivocation = 0.0
        for j in range(2):
            llr = np.log(comps[rail_bits[:, j] == 0].sum(axis=0)) - np.log(
                comps[rail_bits[:, j] == 1].sum(axis=0)
            )
            for i in range(4):
                sign = 1.0 if rail_bits[i, j] == 0 else -1.0
                equivocation += dy * np.sum(comps[i] * np.log1p(np.exp(-sign * llr)))
        oracle = 2 * (1 + h_amp) - 2 * equivocation / math.log(2)
        assert oracle == pytest.approx(3.2494, abs=2e-4)

        config = PasConfig(
            qam_order=16,
            alphabet=SHAPED_16,
            block_len=10,
            mode="emulation",
            symbols_per_pol=200_000,
            seeds=SeedSet(1, 2, 3, 4),
        )
        frame = pas_encode(None, config)
        noisy = awgn_channel(frame.qam_symbols, snr_db, seed=42)
        sigma2 = float(np.mean(np.abs(frame.qam_symbols) ** 2)) * 10 ** (-snr_db / 10)
        llrs = compute_llrs(noisy, config, sigma2, scale=frame.scale)
        bits = transmitted_bits(frame)
        simulated = bmd_rate_2d(llrs, bits, 2 * (1 + h_amp))
        assert simulated == pytest.approx(oracle, abs=0.01)

    def test_mismatched_noise_estimate_loses_rate(self):
        config = PasConfig(
            qam_order=16,
            alphabet=SHAPED_16,
            block_len=10,
            mode="emulation",
            symbols_per_pol=100_000,
            seeds=SeedSet(5, 6, 7, 8),
        )
        frame = pas_encode(None, config)
        noisy = awgn_channel(frame.qam_symbols, 10.0, seed=9)
        sigma2 = float(np.mean(np.abs(frame.qam_symbols) ** 2)) * 0.1
        bits = transmitted_bits(frame)
        entropy_2d = 2 * (1 + SHAPED_16.entropy)
        matched = bmd_rate_2d(compute_llrs(noisy, config, sigma2, frame.scale), bits, entropy_2d)
        for wrong in (sigma2 / 3, sigma2 * 3):
            off = bmd_rate_2d(compute_llrs(noisy, config, wrong, frame.scale), bits, entropy_2d)
            assert off < matched

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError, match="shape"):
            bmd_rate_2d(np.zeros((5, 4)), np.zeros((5, 6), dtype=int), 4.0)


class TestReport:
    def test_air_arithmetic(self):
        assert air_4d(3.0, 0.25) == pytest.approx(5.0)
        assert air_4d(0.0, 0.1) == pytest.approx(-0.4)

    def test_report_composition(self):
        rng = np.random.default_rng(4)
        ref = np.exp(2j * math.pi * rng.random((2, 20_000)))
        noise = (rng.normal(size=ref.shape) + 1j * rng.normal(size=ref.shape)) * math.sqrt(
            0.005
        )
        rx = ref + noise
        bits = rng.integers(0, 2, size=(20_000, 4))
        llrs = np.where(bits == 0, 3.0, -3.0).astype(float)
        report = metric_report(rx, ref, llrs, bits, amp_entropy=0.8813, rate_loss_per_amp=0.1)
        assert isinstance(report, MetricReport)
        assert report.snr_db_avg == pytest.approx(20.0, abs=0.1)
        assert min(report.snr_db_x, report.snr_db_y) <= report.snr_db_avg
        assert max(report.snr_db_x, report.snr_db_y) >= report.snr_db_avg
        expected_bmd = bmd_rate_2d(llrs, bits, 2 * 1.8813)
        assert report.bmd_b4d == pytest.approx(2 * expected_bmd)
        assert report.rate_loss_b4d == pytest.approx(0.4)
        assert report.air_b4d == pytest.approx(2 * (expected_bmd - 0.2))
