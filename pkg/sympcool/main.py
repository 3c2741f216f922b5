import argparse
import logging
import sys
from typing import List, Optional

from dotenv import load_dotenv

from sympcool.cli.commands import COMMANDS
from sympcool.core.analysis import FITTERS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sympcool",
        description="Sympathetic sideband cooling of a 40Ca+/43Ca+ crystal: simulation, synthetic data and fits.",
    )
    parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="logging verbosity")
    parser.add_argument("--constants", default=None, help="physical constants file (default: packaged constants.txt or $SYMPCOOL_CONSTANTS)")

    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute an experiment config and write records, fits and a summary")
    run.add_argument("config", help="experiment config (.cfg)")
    run.add_argument("--seed", type=int, default=None, help="override [sequence] seed")

    budget = sub.add_parser("budget", help="Cartesian sweep of the gate-error budget")
    budget.add_argument("config", help="experiment config (.cfg)")
    budget.add_argument(
        "--sweep", action="append", metavar="AXIS=V1,V2",
        help="sweep axis (eta, nbar, cycles, eps, elastic_fraction); repeatable",
    )
    budget.add_argument("--output-dir", default=None, help="directory for budget.csv (default: [output] directory)")

    selfcheck = sub.add_parser("selfcheck", help="run the built-in oracle checks")
    selfcheck.add_argument("--constants", default=argparse.SUPPRESS, help="constants file to check")

    fit = sub.add_parser("fit", help="fit a record CSV")
    fit.add_argument("record", help="record CSV with '# key=value' header")
    fit.add_argument("--model", required=True, choices=sorted(FITTERS), help="fit model family")
    fit.add_argument("--readout-corrected", action="store_true", help="undo readout fidelities stored in the record header")
    fit.add_argument("--output-dir", default=None, help="directory for the fit CSV (default: $SYMPCOOL_OUTPUT_DIR or output)")

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()

    args = build_parser().parse_args(argv)

    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    return COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
