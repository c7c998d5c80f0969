"""Command line front end for sweeps and calibration.

Configuration comes from three layers, later ones winning: the scale
preset (`--scale desk|paper`), a key=value config file, and individual
flags.  Config keys mirror ExperimentSpec field names; WDM and link
parameters nest with a dotted prefix (wdm.channel_count, link.step_size_m).
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from pasfiber.experiment import ExperimentSpec, run_calibration, run_experiment


def _int_tuple(text: str) -> tuple:
    return tuple(int(v) for v in text.split(",") if v.strip())


def _float_tuple(text: str) -> tuple:
    return tuple(float(v) for v in text.split(",") if v.strip())


def _str_tuple(text: str) -> tuple:
    return tuple(v.strip() for v in text.split(",") if v.strip())


_SPEC_FIELDS = {
    "qam_order": int,
    "target_probs": _float_tuple,
    "n_list": _int_tuple,
    "modes": _str_tuple,
    "symbols_per_pol": int,
    "runs": int,
    "master_seed": int,
    "power_dbm": float,
    "awgn_snr_db": float,
}

_WDM_FIELDS = {
    "symbol_rate_hz": float,
    "channel_count": int,
    "grid_spacing_hz": float,
    "rolloff": float,
    "oversampling": int,
}

_LINK_FIELDS = {
    "span_length_km": float,
    "num_spans": int,
    "alpha_db_per_km": float,
    "gamma_per_w_km": float,
    "dispersion_ps_nm_km": float,
    "step_size_m": float,
    "amp_gain_db": float,
    "amp_noise_figure_db": float,
    "center_wavelength_nm": float,
}


def load_config(path) -> dict:
    """Read key = value lines; '#' starts a comment, blank lines ignored."""
    values = {}
    with open(path) as handle:
        for lineno, raw in enumerate(handle, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value, got {raw!r}")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
    return values


def build_spec(scale: str, overrides: dict) -> ExperimentSpec:
    """Apply string-valued overrides on top of a scale preset."""
    base = ExperimentSpec.paper() if scale == "paper" else ExperimentSpec.desk()
    top, wdm, link = {}, {}, {}
    for key, value in overrides.items():
        if value is None:
            continue
        if key.startswith("wdm."):
            name = key[len("wdm.") :]
            if name not in _WDM_FIELDS:
                raise ValueError(f"{key}: unknown WDM parameter")
            wdm[name] = _WDM_FIELDS[name](value)
        elif key.startswith("link."):
            name = key[len("link.") :]
            if name not in _LINK_FIELDS:
                raise ValueError(f"{key}: unknown link parameter")
            link[name] = _LINK_FIELDS[name](value)
        elif key in _SPEC_FIELDS:
            top[key] = _SPEC_FIELDS[key](value)
        else:
            raise ValueError(f"{key}: unknown configuration key")
    if wdm:
        top["wdm"] = dataclasses.replace(base.wdm, **wdm)
    if link:
        top["link"] = dataclasses.replace(base.link, **link)
    return dataclasses.replace(base, **top)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pasfiber",
        description="Shaped-QAM fiber transmission sweeps and calibration.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a block-length sweep and write a CSV")
    run.add_argument("--config", help="key=value config file")
    run.add_argument("--scale", choices=("desk", "paper"), default="desk")
    run.add_argument("--mode", help="comma list of modes", dest="modes")
    run.add_argument("--n", help="comma list of block lengths", dest="n_list")
    run.add_argument("--runs", type=int)
    run.add_argument("--seed", type=int, dest="master_seed")
    run.add_argument("--qam", type=int, dest="qam_order")
    run.add_argument("--dist", dest="target_probs", help="comma list of amplitude probabilities")
    run.add_argument("--power-dbm", type=float, dest="power_dbm")
    run.add_argument("--symbols", type=int, dest="symbols_per_pol")
    run.add_argument("--awgn-snr-db", type=float, dest="awgn_snr_db")
    run.add_argument("--workers", type=int, default=1)
    run.add_argument("--out", default="results.csv")
    run.add_argument("--dump-fields", dest="dump_dir", help="directory for equalized constellation dumps")

    cal = sub.add_parser("calibrate", help="run the analytic self-tests")
    cal.add_argument("--slow", action="store_true", help="include the simulation-level checks")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)

    if args.command == "calibrate":
        failures = 0
        for check in run_calibration(include_slow=args.slow):
            verdict = "PASS" if check.passed else "FAIL"
            print(f"{verdict} {check.name}: {check.measured:.3e} (limit {check.limit:.3e})")
            failures += not check.passed
        return 1 if failures else 0

    overrides = {}
    if args.config:
        overrides.update(load_config(args.config))
    for key in _SPEC_FIELDS:
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value if isinstance(value, str) else str(value)
    try:
        spec = build_spec(args.scale, overrides)
    except ValueError as exc:
        source = args.config if args.config else "command line"
        print(f"invalid configuration ({source}): {exc}", file=sys.stderr)
        return 2
    path = run_experiment(spec, args.out, workers=args.workers, dump_dir=args.dump_dir)
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
