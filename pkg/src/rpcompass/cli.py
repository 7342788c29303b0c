"""Command-line front end.

Every verb loads one configuration (``--preset`` or ``--config``), applies
the unit-explicit overrides, runs, and prints a one-line summary: the value
for scalar observables, the written files for data-producing verbs.

Exit codes: 0 success, 1 invalid configuration or failed validation,
2 usage error. Set RPCOMPASS_WORKERS to bound the worker count.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .coherence import BASES, SUBSYSTEMS, CoherenceOptions, coherence_trace
from .config import SPIN_MAPPINGS, ConfigError, HyperfineTensor, RadicalPairConfig, builtin_presets, parse_config
from .experiments import (
    DEFAULT_2D_AZ_MT,
    DEFAULT_2D_TRANSVERSE_MT,
    DEFAULT_RATES,
    DEFAULT_TRANSVERSE_MT,
    N1_AXIAL_MT,
    REDUCED_2D_AZ_MT,
    REDUCED_2D_TRANSVERSE_MT,
    AngleGrid,
    coherence_vs_angle,
    sensitivity,
    sweep_2d,
    sweep_rates,
    sweep_transverse,
    write_csv,
    write_metadata,
    write_sweep,
    yield_profile,
)
from .oracle import validate_config
from .yields import singlet_yield_closed, singlet_yield_integrated

VERBS = ("yield", "profile", "sensitivity", "coherence", "sweep-transverse", "sweep-2d", "sweep-rates", "validate",
         "presets")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(2)


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _add_config_args(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", help="built-in configuration name (see the presets verb)")
    src.add_argument("--config", type=Path, help="path to a JSON configuration document")
    p.add_argument("--spin-mapping", choices=SPIN_MAPPINGS, default="label",
                   help="nuclear spins when not given per nucleus: 'label' (N* -> 1, else 1/2) or 'half'")
    g = p.add_argument_group("overrides")
    g.add_argument("--theta-deg", type=float, help="field inclination in degrees")
    g.add_argument("--phi-deg", type=float, help="field azimuth in degrees")
    g.add_argument("--b-uT", type=float, dest="b_uT", help="field magnitude in microtesla")
    g.add_argument("--k-per-sec", type=float, help="equal singlet and triplet recombination rate in 1/s")
    g.add_argument("--ax-mT", type=float, dest="ax_mT", help="set ax on every nucleus (requires --ay-mT, --az-mT)")
    g.add_argument("--ay-mT", type=float, dest="ay_mT")
    g.add_argument("--az-mT", type=float, dest="az_mT")


def _add_output_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", type=Path, default=Path("."), help="output directory (default: current)")
    p.add_argument("--stamp", action="store_true", help="record a creation timestamp in metadata")


def _add_grid_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n-theta", type=int, default=91, help="number of inclination points (default 91)")
    p.add_argument("--theta-max-deg", type=float, default=90.0, help="upper end of the inclination grid")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rpcompass", description="Radical-pair compass spin dynamics.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="verb", required=True, metavar="VERB", parser_class=_Parser)

    p = sub.add_parser("yield", help="singlet yield at one field orientation")
    _add_config_args(p)
    p.add_argument("--method", choices=("closed", "integrated"), default="closed")

    p = sub.add_parser("profile", help="singlet yield vs inclination, written as CSV")
    _add_config_args(p)
    _add_grid_args(p)
    _add_output_args(p)

    p = sub.add_parser("sensitivity", help="max - min of the yield over inclination")
    _add_config_args(p)
    _add_grid_args(p)

    p = sub.add_parser("coherence", help="relative entropy of coherence vs time, written as CSV")
    _add_config_args(p)
    _add_output_args(p)
    p.add_argument("--t-max-us", type=float, default=10.0)
    p.add_argument("--n-times", type=int, default=1001)
    p.add_argument("--subsystem", choices=SUBSYSTEMS, default="joint")
    p.add_argument("--basis", choices=BASES, default="product_z")
    p.add_argument("--no-renormalize", action="store_true", help="report tr(rho) * C(rho / tr(rho))")
    p.add_argument("--thetas-deg", type=_float_list,
                   help="comma-separated inclinations; writes one trace per angle (default: the override angle)")

    p = sub.add_parser("sweep-transverse", help="profiles with ax = ay swept on every nucleus")
    _add_config_args(p)
    _add_grid_args(p)
    _add_output_args(p)
    p.add_argument("--transverse-mT", type=_float_list, default=list(DEFAULT_TRANSVERSE_MT))
    p.add_argument("--fixed-az-mT", type=float, default=N1_AXIAL_MT)

    p = sub.add_parser("sweep-2d", help="Phi(0) - Phi(90 deg) over (transverse, axial) tensor components")
    _add_config_args(p)
    _add_output_args(p)
    p.add_argument("--reduced", action="store_true", help="coarse grid (0.02 mT x 0.25 mT) for quick runs")
    p.add_argument("--az-grid-mT", type=_float_list)
    p.add_argument("--transverse-grid-mT", type=_float_list)

    p = sub.add_parser("sweep-rates", help="profiles for several equal recombination rates")
    _add_config_args(p)
    _add_grid_args(p)
    _add_output_args(p)
    p.add_argument("--k-values", type=_float_list, default=list(DEFAULT_RATES))

    p = sub.add_parser("validate", help="cross-check the fast paths against the master-equation oracle")
    _add_config_args(p)

    p = sub.add_parser("presets", help="list built-in configurations")
    p.add_argument("--spin-mapping", choices=SPIN_MAPPINGS, default="label")
    p.add_argument("--show", help="print one preset as a configuration document")
    return parser


def load_config(args) -> RadicalPairConfig:
    if args.preset is not None:
        presets = builtin_presets(args.spin_mapping)
        if args.preset not in presets:
            raise ConfigError(f"unknown preset {args.preset!r}; choose from {', '.join(sorted(presets))}")
        cfg = presets[args.preset]
    else:
        try:
            text = args.config.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read {args.config}: {exc.strerror}") from None
        cfg = parse_config(text, args.spin_mapping)
    tensor = (args.ax_mT, args.ay_mT, args.az_mT)
    if any(v is not None for v in tensor):
        if any(v is None for v in tensor):
            raise ConfigError("--ax-mT, --ay-mT and --az-mT must be given together")
        cfg = cfg.with_all_tensors(HyperfineTensor(*tensor))
    cfg = cfg.with_field(
        theta=None if args.theta_deg is None else math.radians(args.theta_deg),
        phi=None if args.phi_deg is None else math.radians(args.phi_deg),
        b_magnitude=args.b_uT,
    )
    if args.k_per_sec is not None:
        cfg = cfg.with_rate(args.k_per_sec)
    return cfg.validate()


def _grid(args) -> AngleGrid:
    if args.n_theta < 2:
        raise ValueError("--n-theta must be at least 2")
    return AngleGrid.uniform(args.n_theta, math.radians(args.theta_max_deg), phi=0.0 if args.phi_deg is None
                             else math.radians(args.phi_deg))


def _stamp(args) -> str | None:
    if not args.stamp:
        return None
    from datetime import datetime, timezone

    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _report_files(paths) -> None:
    print("wrote " + " ".join(str(p) for p in paths))


def _cmd_yield(args) -> int:
    cfg = load_config(args)
    res = singlet_yield_integrated(cfg) if args.method == "integrated" else singlet_yield_closed(cfg)
    print(f"{res.value:.12f}")
    return 0


def _cmd_profile(args) -> int:
    cfg = load_config(args)
    res = yield_profile(cfg, _grid(args))
    _report_files(write_sweep(res, args.out / "profile.csv", cfg, args.spin_mapping, _stamp(args)))
    return 0


def _cmd_sensitivity(args) -> int:
    cfg = load_config(args)
    print(f"{sensitivity(cfg, _grid(args)):.12f}")
    return 0


def _cmd_coherence(args) -> int:
    cfg = load_config(args)
    options = CoherenceOptions(args.subsystem, args.basis, not args.no_renormalize)
    if args.n_times < 2:
        raise ValueError("--n-times must be at least 2")
    times = np.linspace(0.0, args.t_max_us * 1e-6, args.n_times)
    stamp = _stamp(args)
    if args.thetas_deg:
        thetas = [math.radians(x) for x in args.thetas_deg]
        res = coherence_vs_angle(cfg, times, thetas, options)
        _report_files(write_sweep(res, args.out / "coherence_vs_angle.csv", cfg, args.spin_mapping, stamp))
        return 0
    series = coherence_trace(cfg, times, options)
    path = write_csv(args.out / "coherence.csv", ["time_s", "coherence"], zip(series.times, series.values))
    meta = write_metadata(path, cfg, ["time_s", "coherence"], args.spin_mapping,
                          {"observable": "coherence", **series.metadata}, stamp)
    _report_files([path, meta])
    return 0


def _write_with_sensitivity(res, name: str, cfg, args) -> int:
    stamp = _stamp(args)
    files = write_sweep(res, args.out / f"{name}.csv", cfg, args.spin_mapping, stamp)
    files += write_sweep(res.sensitivity(), args.out / f"{name}_sensitivity.csv", cfg, args.spin_mapping, stamp)
    _report_files(files)
    return 0


def _cmd_sweep_transverse(args) -> int:
    cfg = load_config(args)
    res = sweep_transverse(cfg, args.transverse_mT, args.fixed_az_mT, _grid(args))
    return _write_with_sensitivity(res, "sweep_transverse", cfg, args)


def _cmd_sweep_2d(args) -> int:
    cfg = load_config(args)
    az = args.az_grid_mT or (REDUCED_2D_AZ_MT if args.reduced else DEFAULT_2D_AZ_MT)
    tr = args.transverse_grid_mT or (REDUCED_2D_TRANSVERSE_MT if args.reduced else DEFAULT_2D_TRANSVERSE_MT)
    res = sweep_2d(cfg, az, tr)
    _report_files(write_sweep(res, args.out / "sweep_2d.csv", cfg, args.spin_mapping, _stamp(args)))
    return 0


def _cmd_sweep_rates(args) -> int:
    cfg = load_config(args)
    res = sweep_rates(cfg, args.k_values, _grid(args))
    return _write_with_sensitivity(res, "sweep_rates", cfg, args)


def _cmd_validate(args) -> int:
    cfg = load_config(args)
    report = validate_config(cfg)
    for line in report.lines():
        print(line)
    worst = max(c.deviation / c.tolerance for c in report.checks)
    print(f"{'PASS' if report.passed else 'FAIL'}: {len(report.checks)} checks, worst deviation/tolerance {worst:.3e}")
    return 0 if report.passed else 1


def _cmd_presets(args) -> int:
    presets = builtin_presets(args.spin_mapping)
    if args.show:
        if args.show not in presets:
            raise ConfigError(f"unknown preset {args.show!r}")
        from .config import serialize_config

        sys.stdout.write(serialize_config(presets[args.show]) + "\n")
        return 0
    for name, cfg in presets.items():
        print(f"{name}: radical dims {cfg.radical_a.dim} x {cfg.radical_b.dim}, joint dim {cfg.joint_dim}")
    return 0


_COMMANDS = {
    "yield": _cmd_yield,
    "profile": _cmd_profile,
    "sensitivity": _cmd_sensitivity,
    "coherence": _cmd_coherence,
    "sweep-transverse": _cmd_sweep_transverse,
    "sweep-2d": _cmd_sweep_2d,
    "sweep-rates": _cmd_sweep_rates,
    "validate": _cmd_validate,
    "presets": _cmd_presets,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.verb](args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())
