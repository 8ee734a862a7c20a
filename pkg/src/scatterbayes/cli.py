"""``scatter`` command line: synth, run, validate, plot.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 I/O failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .errors import ChainError, ConfigurationError, DomainError, NumericalError
from .experiment import render_figures, run_experiment, synthesize_data, validate_forward
from .forward import FarFieldMap, unit_directions
from .storage import ChainSummary, ExperimentConfig

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4

log = logging.getLogger("scatterbayes")


def _cmd_synth(args) -> int:
    fmap = FarFieldMap(k=args.k, incident_dirs=unit_directions(args.incident), eta=args.eta,
                       m=args.m, tau=args.tau, shift=args.shift)
    data = synthesize_data(args.obstacle, fmap, args.seed, args.n_points, args.grading,
                           auto_shift=args.shift_value if args.auto_shift else None)
    data.save(args.out)
    print(f"wrote {args.out}: {len(data.y)} counts, total {int(np.sum(data.y))}")
    return EXIT_OK


def _cmd_run(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    if args.output_dir:
        cfg.output_dir = args.output_dir
    summary = run_experiment(cfg)
    print(f"acceptance rate {summary.acceptance_rate:.3f}, "
          f"{summary.n_retained} samples retained")
    if summary.rel_l2_error is not None:
        print(f"relative L2 error of mean radius {summary.rel_l2_error:.4f}, "
              f"band coverage {summary.band_coverage:.3f}")
    print(f"results in {cfg.output_dir}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    checks = validate_forward()
    for c in checks:
        print(c.line())
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return EXIT_OK if not failed else EXIT_NUMERICAL


def _cmd_plot(args) -> int:
    summary = ChainSummary.load(args.result)
    out = Path(args.out) if args.out else Path(args.result).parent
    for p in render_figures(summary, out):
        print(f"wrote {p}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="scatter", description=(
        "Bayesian reconstruction of sound-soft obstacles from Poisson far-field data."))
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="synthesise Poisson data for a catalog obstacle")
    s.add_argument("--obstacle", default="peanut")
    s.add_argument("--tau", type=float, default=1000.0)
    s.add_argument("--m", type=int, default=64, help="number of observation directions")
    s.add_argument("--k", type=float, default=1.0, help="wavenumber")
    s.add_argument("--eta", type=float, default=None, help="coupling parameter (default k)")
    s.add_argument("--incident", type=float, nargs="+", default=[0.0],
                   help="incident direction angles in radians")
    s.add_argument("--shift", type=float, default=0.0, help="uniform intensity shift")
    s.add_argument("--auto-shift", action="store_true",
                   help="add --shift-value when some intensity is below 1e-12")
    s.add_argument("--shift-value", type=float, default=0.1)
    s.add_argument("--n-points", type=int, default=512)
    s.add_argument("--grading", type=int, default=None, help="corner grading order")
    s.add_argument("--seed", type=int, default=7)
    s.add_argument("--out", default="data.json")
    s.set_defaults(func=_cmd_synth)

    r = sub.add_parser("run", help="run a reconstruction experiment")
    r.add_argument("--config", required=True)
    r.add_argument("--output-dir", default=None, help="override [experiment] output_dir")
    r.set_defaults(func=_cmd_run)

    v = sub.add_parser("validate", help="check the forward solver against oracles")
    v.set_defaults(func=_cmd_validate)

    pl = sub.add_parser("plot", help="redraw figures from a summary file")
    pl.add_argument("--result", required=True)
    pl.add_argument("--out", default=None)
    pl.set_defaults(func=_cmd_plot)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, DomainError, ChainError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
