"""Sweep orchestration: run cells, reduce to CSV, self-calibrate.

A sweep iterates (mode, block length, run) cells.  Every cell builds one
shaped frame per WDM channel from independent data, sends the comb down the
link, recovers the center channel, and reduces it to a MetricReport row.
Noise seeds depend on the run index alone, so cells that differ only in
mode or block length ride identical noise realizations and their SNR
differences isolate the transmit-side change.

Emulation mode has no block length; its cells are recorded once per run
with n = 0 in the CSV.
"""

from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from pasfiber.channel import (
    LinkSpec,
    OpticalField,
    WdmSpec,
    awgn_channel,
    rrc_shape,
    ssfm_propagate,
    wdm_mux,
)
from pasfiber.distmatch import AmplitudeAlphabet, rate_loss
from pasfiber.fieldio import config_digest, write_field
from pasfiber.labeling import GrayLabeling
from pasfiber.metrics import MetricReport, average_reports, metric_report
from pasfiber.pascodec import (
    MODES,
    PasConfig,
    SeedSet,
    compute_llrs,
    pas_encode,
    random_payload,
    transmitted_bits,
)
from pasfiber.rxdsp import align_to_reference, receive

CSV_COLUMNS = (
    "mode",
    "qam",
    "n",
    "run",
    "channel_power_dbm",
    "snr_db_x",
    "snr_db_y",
    "snr_db_avg",
    "bmd_b4d",
    "rate_loss_b4d",
    "air_b4d",
    "seed",
)

DEFAULT_SWEEP = (10, 20, 50, 100, 200, 500, 1000, 2000, 5000)

__all__ = [
    "CSV_COLUMNS",
    "DEFAULT_SWEEP",
    "ExperimentSpec",
    "CalibrationCheck",
    "run_cell",
    "run_experiment",
    "run_calibration",
]


@dataclass(frozen=True)
class ExperimentSpec:
    """One sweep's worth of configuration.

    The defaults are the desk scale: one cell lands near a minute on one
    core while the block-length SNR gap still clears the estimator noise.
    `paper()` returns the full-scale setup behind the same interface.
    """

    qam_order: int = 64
    target_probs: tuple = (0.4, 0.3, 0.2, 0.1)
    n_list: tuple = DEFAULT_SWEEP
    modes: tuple = MODES
    symbols_per_pol: int = 15000
    runs: int = 4
    master_seed: int = 2026
    power_dbm: float = 1.0
    wdm: WdmSpec = WdmSpec(channel_count=3, oversampling=6)
    link: LinkSpec = LinkSpec()
    awgn_snr_db: float | None = None  # replace the fiber with AWGN when set

    def __post_init__(self) -> None:
        if self.runs < 1:
            raise ValueError("runs: need at least one run")
        if not self.n_list:
            raise ValueError("n_list: sweep must not be empty")
        for n in self.n_list:
            if n < 1 or (2 * self.symbols_per_pol) % n:
                raise ValueError(
                    f"n_list: {2 * self.symbols_per_pol} amplitudes per "
                    f"polarization are not a whole number of n={n} blocks"
                )
        for mode in self.modes:
            if mode not in MODES:
                raise ValueError(f"modes: unknown mode {mode!r}")
        expected = GrayLabeling(self.qam_order).num_amplitudes
        if len(self.target_probs) != expected:
            raise ValueError(
                f"target_probs: {self.qam_order}QAM needs {expected} entries"
            )
        # Dispersion smears a few hundred symbols around the circular frame;
        # fiber frames must dwarf that for the wrap to be harmless.
        if self.awgn_snr_db is None and self.symbols_per_pol < 4096:
            raise ValueError(
                "symbols_per_pol: frame too short for the circular link model"
            )

    @classmethod
    def desk(cls, **overrides) -> "ExperimentSpec":
        return cls(**overrides)

    @classmethod
    def paper(cls, **overrides) -> "ExperimentSpec":
        """Full-scale setup: 7 x 42 GBd channels, 325000 symbols, 10 runs."""
        values = dict(
            symbols_per_pol=325000,
            runs=10,
            power_dbm=1.0,
            wdm=WdmSpec(channel_count=7, oversampling=16),
        )
        values.update(overrides)
        return cls(**values)

    @property
    def alphabet(self) -> AmplitudeAlphabet:
        labeling = GrayLabeling(self.qam_order)
        levels = tuple(labeling.ask_levels[labeling.num_amplitudes :])
        return AmplitudeAlphabet(levels, self.target_probs)

    def digest(self) -> str:
        return config_digest(self)


def _cell_axes(spec: ExperimentSpec):
    """Ordered (mode, n) pairs; emulation collapses the n axis to 0."""
    axes = []
    for mode in spec.modes:
        for n in spec.n_list if mode != "emulation" else (0,):
            axes.append((mode, n))
    return axes


def _frame_histogram(config: PasConfig) -> np.ndarray:
    """Exact per-frame amplitude counts over both polarizations."""
    per_block = np.asarray(config.composition.counts)
    return per_block * (2 * config.blocks_per_pol)


def run_cell(
    spec: ExperimentSpec, mode: str, n: int, run: int, dump_dir=None
) -> MetricReport:
    """Simulate one (mode, n, run) cell and reduce it to metrics."""
    center = (spec.wdm.channel_count - 1) // 2
    emulated = mode == "emulation"
    frames = []
    for ch in range(spec.wdm.channel_count):
        config = PasConfig(
            qam_order=spec.qam_order,
            alphabet=spec.alphabet,
            block_len=n if not emulated else 1,
            mode=mode,
            symbols_per_pol=spec.symbols_per_pol,
            seeds=SeedSet.from_master(spec.master_seed, run, ch),
        )
        payload = None if emulated else random_payload(config)
        frames.append(pas_encode(payload, config))

    ref = frames[center]
    if spec.awgn_snr_db is not None:
        noisy = awgn_channel(
            ref.qam_symbols, spec.awgn_snr_db, seed=ref.config.seeds.channel
        )
        equalized = align_to_reference(ref.qam_symbols, noisy)
    else:
        fields = [rrc_shape(f.qam_symbols, spec.wdm, spec.power_dbm) for f in frames]
        muxed = wdm_mux(fields, spec.wdm)
        out = ssfm_propagate(muxed, spec.link, ase_seed=ref.config.seeds.channel)
        received = receive(out, spec.wdm, spec.link, center)
        equalized = align_to_reference(ref.qam_symbols, received)

    if dump_dir is not None:
        dump_dir = Path(dump_dir)
        dump_dir.mkdir(parents=True, exist_ok=True)
        path = dump_dir / f"{mode}_n{n}_run{run}.bin"
        write_field(path, equalized, spec.wdm.symbol_rate_hz, spec.digest())

    # The demapper noise estimate is the measured distortion itself: the
    # usual auxiliary-Gaussian convention for achievable-rate accounting.
    sigma2 = max(float(np.var(equalized - ref.qam_symbols)), 1e-12)
    llrs = compute_llrs(equalized, ref.config, sigma2, scale=ref.scale)
    bits = transmitted_bits(ref)
    if emulated:
        amp_entropy = spec.alphabet.entropy
        loss = 0.0
    else:
        probs = ref.config.composition.probs
        probs = probs[probs > 0]
        amp_entropy = float(-(probs @ np.log2(probs)))
        loss = rate_loss(spec.alphabet, n)
    return metric_report(
        equalized,
        ref.qam_symbols,
        llrs,
        bits,
        amp_entropy,
        loss,
        config_hash=spec.digest(),
    )


def _cell_worker(args):
    spec, mode, n, run, dump_dir = args
    return run_cell(spec, mode, n, run, dump_dir)


def _format_row(mode, qam, n, run, power_dbm, report: MetricReport, seed) -> str:
    values = [
        mode,
        str(qam),
        str(n),
        str(run),
        f"{power_dbm:.2f}",
        f"{report.snr_db_x:.6f}",
        f"{report.snr_db_y:.6f}",
        f"{report.snr_db_avg:.6f}",
        f"{report.bmd_b4d:.6f}",
        f"{report.rate_loss_b4d:.6f}",
        f"{report.air_b4d:.6f}",
        str(seed),
    ]
    return ",".join(values)


def run_experiment(
    spec: ExperimentSpec, out_path, workers: int = 1, dump_dir=None
) -> Path:
    """Run the whole sweep and write the CSV; returns the CSV path.

    The output is byte-identical for a given spec regardless of `workers`:
    cells are independent and the reduction order is fixed.
    """
    axes = _cell_axes(spec)
    jobs = [
        (spec, mode, n, run, dump_dir)
        for mode, n in axes
        for run in range(spec.runs)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(_cell_worker, jobs))
    else:
        reports = [_cell_worker(job) for job in jobs]

    lines = [f"# config {spec.digest()}"]
    for mode, n in axes:
        if mode == "emulation":
            continue
        config = PasConfig(
            qam_order=spec.qam_order,
            alphabet=spec.alphabet,
            block_len=n,
            mode=mode,
            symbols_per_pol=spec.symbols_per_pol,
        )
        counts = ",".join(str(c) for c in _frame_histogram(config))
        lines.append(f"# histogram mode={mode} qam={spec.qam_order} n={n} counts={counts}")
    lines.append(",".join(CSV_COLUMNS))

    for idx, (mode, n) in enumerate(axes):
        cell_reports = reports[idx * spec.runs : (idx + 1) * spec.runs]
        for run, report in enumerate(cell_reports):
            seed = SeedSet.from_master(spec.master_seed, run).channel
            lines.append(
                _format_row(mode, spec.qam_order, n, run, spec.power_dbm, report, seed)
            )
        combined = average_reports(cell_reports)
        lines.append(
            _format_row(
                mode, spec.qam_order, n, "avg", spec.power_dbm, combined, spec.master_seed
            )
        )

    out_path = Path(out_path)
    out_path.write_text("\n".join(lines) + "\n")
    return out_path


@dataclass(frozen=True)
class CalibrationCheck:
    name: str
    measured: float
    limit: float
    passed: bool


def _check(name: str, measured: float, limit: float) -> CalibrationCheck:
    return CalibrationCheck(name, measured, limit, measured < limit)


def run_calibration(include_slow: bool = False) -> "list[CalibrationCheck]":
    """Analytic-limit self-tests of the channel and receiver numerics.

    The fast checks compare the simulator against closed forms (dispersion
    and SPM transfer, ASE budget, AWGN identity, Nyquist shaping, mux and
    demux transparency).  `include_slow` adds two simulation-level checks:
    the linear end-to-end SNR against the amplifier noise budget and
    step-size self-convergence of the nonlinear sweep configuration.
    """
    import scipy.fft as fft

    from pasfiber.channel import PLANCK, rrc_response
    from pasfiber.metrics import effective_snr_db

    checks = []
    rng = np.random.default_rng(12345)

    def symbols(count):
        return (rng.normal(size=(2, count)) + 1j * rng.normal(size=(2, count))) / math.sqrt(2)

    # Dispersion-only propagation against the quadratic-phase transfer.
    wdm1 = WdmSpec(channel_count=1, oversampling=4)
    tx = rrc_shape(symbols(512), wdm1, 0.0)
    link_d = LinkSpec(gamma_per_w_km=0.0, step_size_m=4000.0)
    out = ssfm_propagate(tx, link_d)
    omega = 2 * math.pi * fft.fftfreq(tx.samples.shape[1], 1 / wdm1.sample_rate_hz)
    transfer = np.exp(1j * (link_d.beta2_s2_per_m / 2) * omega**2 * link_d.total_length_m)
    ref = fft.ifft(fft.fft(tx.samples, axis=1) * transfer, axis=1)
    err = float(np.max(np.abs(out.samples - ref)) / np.max(np.abs(ref)))
    checks.append(_check("dispersion_closed_form_rel_err", err, 1e-6))

    # SPM-only propagation against the analytic phase rotation.
    tx2 = rrc_shape(symbols(512), wdm1, 3.0)
    link_s = LinkSpec(dispersion_ps_nm_km=0.0, step_size_m=1000.0)
    alpha = link_s.alpha_per_m
    leff = (1 - math.exp(-alpha * 80e3)) / alpha
    power = np.abs(tx2.samples[0]) ** 2 + np.abs(tx2.samples[1]) ** 2
    phase = link_s.num_spans * (8 / 9) * (link_s.gamma_per_w_km / 1e3) * leff * power
    ref2 = tx2.samples * np.exp(1j * phase)
    out2 = ssfm_propagate(tx2, link_s)
    err2 = float(np.max(np.abs(out2.samples - ref2)) / np.max(np.abs(ref2)))
    checks.append(_check("spm_closed_form_rel_err", err2, 1e-6))

    # ASE accumulation against the amplifier budget.
    link = LinkSpec(step_size_m=8000.0)
    n = 1 << 17
    fs = 252e9
    silent = ssfm_propagate(OpticalField(np.zeros((2, n)), fs), link, ase_seed=2718)
    nsp = 10 ** (link.amp_noise_figure_db / 10) / 2
    gain = 10 ** (link.amp_gain_db / 10)
    budget = link.num_spans * nsp * PLANCK * link.carrier_frequency_hz * (gain - 1) * fs
    measured = float(np.mean(np.abs(silent.samples) ** 2) / budget)
    checks.append(_check("ase_budget_rel_err", abs(measured - 1.0), 0.01))

    # AWGN loopback identity at 14 dB.
    clean = symbols(200_000)
    noisy = awgn_channel(clean, 14.0, seed=31)
    snr = effective_snr_db(noisy, clean)
    checks.append(_check("awgn_identity_err_db", abs(snr - 14.0), 0.05))

    # TX/RX filter cascade sampled at symbol instants is a delta.
    os = 8
    grid = 256 * os
    freqs = fft.fftfreq(grid, d=1.0)
    cascade = rrc_response(freqs, 1.0 / os, 0.1) ** 2
    impulse = np.zeros(grid)
    impulse[0] = 1.0
    response = fft.ifft(fft.fft(impulse) * cascade)[::os]
    isi = float(np.max(np.abs(response[1:])) / abs(response[0]))
    checks.append(_check("rrc_nyquist_isi", isi, 1e-10))

    # Back-to-back comb: mux, extract, compare.
    wdm3 = WdmSpec(channel_count=3, oversampling=6)
    seqs = [symbols(512) for _ in range(3)]
    muxed = wdm_mux([rrc_shape(s, wdm3, 1.0) for s in seqs], wdm3)
    rx = align_to_reference(seqs[1], receive(muxed, wdm3))
    evm_db = -effective_snr_db(rx, seqs[1])
    checks.append(_check("back_to_back_evm_db", evm_db, -50.0))

    if include_slow:
        # Linear end-to-end SNR against the matched-filter noise budget.
        spec = ExperimentSpec(
            n_list=(100,),
            modes=("end_to_end",),
            symbols_per_pol=16000,
            runs=1,
            power_dbm=1.0,
            link=LinkSpec(gamma_per_w_km=0.0, step_size_m=8000.0),
        )
        report = run_cell(spec, "end_to_end", 100, 0)
        density = (
            spec.link.num_spans
            * nsp
            * PLANCK
            * spec.link.carrier_frequency_hz
            * (gain - 1)
        )
        p_pol = 1e-3 * 10 ** (spec.power_dbm / 10) / 2
        analytic = 10 * math.log10(p_pol / (density * spec.wdm.symbol_rate_hz))
        checks.append(
            _check("linear_snr_budget_err_db", abs(report.snr_db_avg - analytic), 0.1)
        )

        # Nonlinear step-size self-convergence, 100 m vs 50 m.
        base = ExperimentSpec(
            n_list=(100,), modes=("end_to_end",), symbols_per_pol=4096, runs=1
        )
        halved = dataclasses.replace(base, link=LinkSpec(step_size_m=50.0))
        coarse = run_cell(base, "end_to_end", 100, 0)
        fine = run_cell(halved, "end_to_end", 100, 0)
        checks.append(
            _check(
                "step_halving_convergence_db",
                abs(coarse.snr_db_avg - fine.snr_db_avg),
                0.02,
            )
        )
    return checks
