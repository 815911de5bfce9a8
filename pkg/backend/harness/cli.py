"""
Command line entry point.

    python backend/harness/cli.py solve --problem 1 --method sipg --strategy uniform \
        --levels 5 --output results/mp1_sipg.csv

Exit codes: 0 success, 1 solver/stage failure, 2 configuration error.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

# Add backend to path
backend_path = Path(__file__).parent.parent
sys.path.insert(0, str(backend_path))

from harness.runner import run_study, summary_table
from utils.config import METHODS, STRATEGIES, load_study_config, log_level_from_env, merge_overrides
from utils.errors import ConfigError, DGContactError

logger = logging.getLogger("harness.cli")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dgcontact",
        description="Quadratic DG solver for frictionless Signorini contact: uniform and adaptive studies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="run a convergence or adaptive study")
    solve.add_argument("--config", metavar="PATH", default=None,
                       help="YAML file with study keys (flags override it)")
    solve.add_argument("--problem", type=int, choices=(1, 2), default=None)
    solve.add_argument("--method", choices=METHODS, default=None)
    solve.add_argument("--strategy", choices=STRATEGIES, default=None)
    solve.add_argument("--levels", type=int, metavar="N", default=None,
                       help="uniform levels, h = 2^-1 ... 2^-N")
    solve.add_argument("--theta", type=float, metavar="T", default=None,
                       help="Dorfler bulk parameter in (0, 1]")
    solve.add_argument("--penalty", type=float, metavar="P", default=None,
                       help="interior penalty eta (default 70 for both forms)")
    solve.add_argument("--initial-n", type=int, metavar="N0", default=None,
                       help="cells per side of the initial structured mesh")
    solve.add_argument("--max-dofs", type=int, metavar="M", default=None)
    solve.add_argument("--max-iterations", type=int, metavar="K", default=None)
    solve.add_argument("--quad-degree", type=int, metavar="Q", default=None)
    solve.add_argument("--output", metavar="PATH", default=None, help="CSV results file")
    solve.add_argument("--emit-meshes", metavar="DIR", default=None, help="write mesh snapshots here")
    solve.add_argument("--verbose", action="store_true", default=None)
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    keys = ("problem", "method", "strategy", "levels", "theta", "penalty", "initial_n", "max_dofs",
            "max_iterations", "quad_degree", "output", "emit_meshes", "verbose")
    return {k: getattr(args, k) for k in keys}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    try:
        config = merge_overrides(load_study_config(args.config), _overrides(args))
    except ConfigError as e:
        logging.basicConfig(level=logging.ERROR)
        logger.error(f"Configuration error: {e}")
        return 2

    level = logging.DEBUG if config.verbose else log_level_from_env(logging.INFO)
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")

    try:
        records = run_study(config)
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return 2
    except DGContactError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return 1
    except (ValueError, ArithmeticError) as e:
        logger.error(f"Numerical failure: {type(e).__name__}: {e}")
        return 1

    print(summary_table(records))
    if config.output:
        print(f"Results written to {config.output}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
