"""Command line entry point: one subcommand per experiment kind.

Exit codes: 0 all checks pass, 1 at least one check failed, 2 unusable
configuration, 3 numerical abort (SPD loss, degenerate geometry, failed
quadrature).
"""

import argparse
import sys

from .ballmap import BallDomainError
from .config import ConfigError, load_config
from .currents import CurrentError
from .curvature import CurvatureError
from .distances import DistanceError
from .experiments import EXPERIMENT_KINDS, run_experiment
from .kernel import QuadratureError
from .maps import GroupError
from .metrics import MetricError
from .scenarios import ScenarioError

__all__ = ["main"]

NUMERICAL_ERRORS = (BallDomainError, CurrentError, CurvatureError,
                    DistanceError, GroupError, MetricError, QuadratureError)


def _parser():
    parser = argparse.ArgumentParser(
        prog="eqmollify",
        description="Equivariant smoothing experiments on built-in scenarios.",
    )
    sub = parser.add_subparsers(dest="kind", required=True, metavar="KIND")
    for kind in EXPERIMENT_KINDS:
        p = sub.add_parser(kind, help="run the %s experiment" % kind)
        p.add_argument("--config", required=True, metavar="PATH",
                       help="JSON experiment config")
        p.add_argument("--out", metavar="DIR",
                       help="output directory (default runs/<scenario>-<kind>)")
        p.add_argument("--seed", type=int, metavar="N", help="override the seed")
        p.add_argument("--epsilon-steps", type=int, metavar="K",
                       help="replace the schedule by K halvings of its start")
        p.add_argument("--grid", type=int, metavar="N",
                       help="override metric grid nodes per axis")
        p.add_argument("--quiet", action="store_true",
                       help="suppress per-check output")
    return parser


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        config = load_config(args.config)
        config = config.override(out=args.out, seed=args.seed, grid=args.grid)
        if args.epsilon_steps is not None:
            if args.epsilon_steps < 1:
                raise ConfigError("--epsilon-steps must be at least 1")
            start = config.epsilons[0]
            config = config.override(
                epsilons=tuple(start * 0.5**j for j in range(args.epsilon_steps))
            )
        report = run_experiment(args.kind, config)
    except (ConfigError, ScenarioError) as err:
        print("configuration error: %s" % err, file=sys.stderr)
        return 2
    except NUMERICAL_ERRORS as err:
        print("numerical abort in %s on %s: %s"
              % (args.kind, getattr(args, "config", "?"), err), file=sys.stderr)
        return 3
    if not args.quiet:
        for check in report.checks:
            print("[%s] %s: value=%.6g tolerance=%.6g"
                  % ("PASS" if check.passed else "FAIL", check.name,
                     check.value, check.tolerance))
        print("report: %s" % report.summary_path)
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
