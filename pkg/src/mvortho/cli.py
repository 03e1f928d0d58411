"""Command-line experiment runner.

Exit codes: 0 success, 1 usage error, 2 numerical failure (outputs are
still written with the breakdown degree recorded).
"""

from __future__ import annotations

import argparse
import sys

from .errors import NumericalFailure, PointCloudError
from .experiments import EXPERIMENTS, METHODS, ExperimentConfig, run_experiment


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mvortho",
                     description="Orthogonal-polynomial recurrence experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one experiment/method pair")
    run.add_argument("--experiment", required=True, choices=EXPERIMENTS)
    run.add_argument("--method", required=True, choices=METHODS)
    run.add_argument("--degree", type=int, default=None,
                     help="max total degree N (default 39 for d=2, 15 for d=3)")
    run.add_argument("--mc-samples", type=int, default=1_000_000,
                     help="Monte Carlo sample count for hol")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--cloud", default=None, help="point-cloud CSV path")
    run.add_argument("--out", default=".", help="output directory")
    run.add_argument("--n-points", type=int, default=None,
                     help="per-axis Gauss points for jac experiments")
    run.add_argument("--n-radial", type=int, default=None)
    run.add_argument("--n-theta", type=int, default=None,
                     help="angular points (ann/cur/tor)")
    run.add_argument("--n-phi", type=int, default=None,
                     help="azimuthal points (tor)")
    run.add_argument("--experimental-wopp", action="store_true",
                     help="enable the experimental d>3 closure")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    config = ExperimentConfig(
        experiment=args.experiment,
        method=args.method,
        degree=args.degree,
        n_points=args.n_points,
        n_radial=args.n_radial,
        n_angular=args.n_theta,
        n_azimuthal=args.n_phi,
        mc_samples=args.mc_samples,
        seed=args.seed,
        cloud_path=args.cloud,
        output_dir=args.out,
        experimental_wopp=args.experimental_wopp,
    )
    try:
        result = run_experiment(config)
    except (ValueError, PointCloudError, FileNotFoundError) as exc:
        print(f"mvortho: error: {exc}", file=sys.stderr)
        return 1
    except NumericalFailure as exc:
        print(f"mvortho: numerical failure: {exc}", file=sys.stderr)
        return 2

    if result.failed:
        what = result.failure_message or \
            f"Gram factorization broke down at degree {result.breakdown_degree}"
        print(f"mvortho: numerical failure: {what} (outputs written to "
              f"{result.config.output_dir})", file=sys.stderr)
        return 2
    print(f"{result.config.experiment}/{result.config.method}: degree "
          f"{result.degree}, {result.size} basis functions over "
          f"{result.n_nodes} nodes, max |E| = {result.error.max_abs:.3e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
