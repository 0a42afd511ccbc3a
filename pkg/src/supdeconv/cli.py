"""Command line entry point.

Exit codes: 0 success, 1 failed model validation, 2 usage/config error,
3 numeric guard (bandwidth too small for double precision).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import decomposition, estimator, harness, limitlaw, models, supstat
from .errors import DeconvError, OverflowGuard
from .quadrature import QuadratureSpec

EXIT_OK, EXIT_INVALID, EXIT_CONFIG, EXIT_GUARD = 0, 1, 2, 3


def _emit(text: str, out) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _add_models(p: argparse.ArgumentParser, signal: bool = False) -> None:
    p.add_argument("--models", help="JSON file with {error, kernel, signal} model objects")
    p.add_argument("--error", default="gaussian", choices=["gaussian", "gaussian_laplace_mix"])
    p.add_argument("--kernel", default="sinc_flat", help="sinc_flat, polynomial_m or polynomial_3")
    p.add_argument("--kernel-m", type=int, default=3, help="order m of the polynomial kernel")
    if signal:
        p.add_argument("--signal-mean", type=float, default=0.0)
        p.add_argument("--signal-sd", type=float, default=1.0)


def _add_estimator(p: argparse.ArgumentParser) -> None:
    p.add_argument("samples", help="CSV file, one observation per line")
    p.add_argument("--h", type=float, required=True, help="bandwidth")
    p.add_argument("--grid-points", type=int, default=101)
    p.add_argument("--nodes-per-unit", type=int, default=QuadratureSpec().nodes_per_unit)
    p.add_argument("--rule", default="simpson", choices=["simpson", "trapezoid"])
    p.add_argument("--out", help="output file (default: stdout)")


def _models(args):
    if getattr(args, "models", None):
        raw = json.loads(Path(args.models).read_text())
        return models.models_from_dict(raw)
    kernel = {"name": args.kernel}
    if args.kernel == "polynomial_m":
        kernel["params"] = {"m": args.kernel_m}
    signal = {"name": "gaussian", "params": {"mean": getattr(args, "signal_mean", 0.0),
                                             "sd": getattr(args, "signal_sd", 1.0)}}
    return models.models_from_dict({"error": {"name": args.error}, "kernel": kernel, "signal": signal})


def _est_cfg(args) -> estimator.EstimatorConfig:
    return estimator.EstimatorConfig(args.h, QuadratureSpec(args.nodes_per_unit, args.rule))


def cmd_estimate(args) -> int:
    error, kernel, _ = _models(args)
    samples = estimator.read_samples_csv(args.samples)
    grid = estimator.grid_on_unit_interval(args.grid_points)
    _emit(estimator.deconv_estimate(samples, error, kernel, _est_cfg(args), grid).to_csv(), args.out)
    return EXIT_OK


def cmd_band(args) -> int:
    error, kernel, _ = _models(args)
    samples = estimator.read_samples_csv(args.samples)
    grid = estimator.grid_on_unit_interval(args.grid_points)
    band = supstat.confidence_band(samples, error, kernel, _est_cfg(args), args.level, grid)
    _emit(band.to_csv(), args.out)
    return EXIT_OK


def cmd_supstat(args) -> int:
    error, kernel, signal = _models(args)
    samples = estimator.read_samples_csv(args.samples)
    grid = estimator.grid_on_unit_interval(args.grid_points)
    res = supstat.sup_statistic(samples, error, kernel, signal, _est_cfg(args), grid)
    _emit(_json(res.to_dict()), args.out)
    return EXIT_OK


def _load_config(args) -> harness.ExperimentConfig:
    return harness.ExperimentConfig.load(args.config, output_dir=args.output_dir, threads=args.threads)


def cmd_mc_sup(args) -> int:
    _emit(_json(harness.run_sup_convergence(_load_config(args))), args.out)
    return EXIT_OK


def cmd_mc_bands(args) -> int:
    cfg = _load_config(args)
    if args.infinite_band:
        cfg.infinite_band = True
    _emit(_json(harness.run_band_coverage(cfg, args.level)), args.out)
    return EXIT_OK


def cmd_diag_decomp(args) -> int:
    if args.config:
        _emit(_json(harness.run_remainder_diagnostics(_load_config(args))), args.out)
        return EXIT_OK
    if not args.samples or args.h is None:
        raise DeconvError("diag-decomp needs either --config or --samples with --h")
    error, kernel, _ = _models(args)
    samples = estimator.read_samples_csv(args.samples)
    grid = estimator.grid_on_unit_interval(args.grid_points)
    cfg = estimator.EstimatorConfig(args.h, QuadratureSpec(args.nodes_per_unit))
    dcfg = decomposition.DecompositionConfig(args.epsilon, QuadratureSpec(args.nodes_per_unit))
    _emit(decomposition.decompose(samples, error, kernel, cfg, dcfg, grid).to_csv(), args.out)
    return EXIT_OK


def cmd_limit_law(args) -> int:
    if args.mode == "table":
        x = np.linspace(0.0, args.x_max, args.points)
        rows = ["x,pdf,cdf"] + [
            f"{xi!r},{p!r},{c!r}"
            for xi, p, c in zip(x.tolist(), limitlaw.rayleigh_pdf(x).tolist(), limitlaw.rayleigh_cdf(x).tolist())
        ]
        _emit("\n".join(rows) + "\n", args.out)
    elif args.mode == "w-paths":
        grid = limitlaw.periodic_grid(args.points)
        sample = limitlaw.sample_w_process(grid, args.seed, paths=args.paths)
        header = "path," + ",".join(f"{g!r}" for g in grid.tolist())
        rows = [header] + [f"{i}," + ",".join(f"{v!r}" for v in row) for i, row in enumerate(sample.path.tolist())]
        _emit("\n".join(rows) + "\n", args.out)
    else:
        if not args.config:
            raise DeconvError("limit-law cosine needs --config")
        _emit(_json(harness.run_process_convergence(_load_config(args))), args.out)
    return EXIT_OK


def cmd_validate(args) -> int:
    error, kernel, _ = _models(args)
    report = models.validate_conditions(error, kernel)
    _emit(_json(report.to_dict()), args.out)
    return EXIT_OK if report.all_passed else EXIT_INVALID


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="supdeconv", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="deconvolution density estimate on [0, 1]")
    _add_estimator(p)
    _add_models(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("band", help="uniform confidence band for E[f_nh]")
    _add_estimator(p)
    _add_models(p)
    p.add_argument("--level", type=float, default=0.95)
    p.set_defaults(func=cmd_band)

    p = sub.add_parser("supstat", help="M_n against the closed-form E[f_nh] of a known signal")
    _add_estimator(p)
    _add_models(p, signal=True)
    p.set_defaults(func=cmd_supstat)

    def experiment(name, helptext, func):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("config", nargs="?" if name in ("diag-decomp", "limit-law") else None,
                       help="experiment config (JSON)")
        p.add_argument("--output-dir")
        p.add_argument("--threads", type=int, default=None, help="worker processes")
        p.add_argument("--out", help="report file (default: stdout)")
        p.set_defaults(func=func)
        return p

    experiment("mc-sup", "Monte Carlo ladder for the scaled sup distance", cmd_mc_sup)
    p = experiment("mc-bands", "Monte Carlo band coverage", cmd_mc_bands)
    p.add_argument("--level", type=float, default=None)
    p.add_argument("--infinite-band", action="store_true", help=argparse.SUPPRESS)

    p = experiment("diag-decomp", "decomposition CSV for a sample, or remainder ladder for a config",
                   cmd_diag_decomp)
    p.add_argument("--samples")
    p.add_argument("--h", type=float)
    p.add_argument("--epsilon", type=float, default=decomposition.DEFAULT_EPSILON)
    p.add_argument("--grid-points", type=int, default=101)
    p.add_argument("--nodes-per-unit", type=int, default=QuadratureSpec().nodes_per_unit)
    _add_models(p)

    p = experiment("limit-law", "Rayleigh table, W sample paths, or S_n ladder", cmd_limit_law)
    p.add_argument("--mode", choices=["table", "w-paths", "cosine"], default="table")
    p.add_argument("--points", type=int, default=64)
    p.add_argument("--x-max", type=float, default=5.0)
    p.add_argument("--paths", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("validate", help="check the model conditions")
    _add_models(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except OverflowGuard as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (DeconvError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
