import argparse
import logging
import os
import sys
import time
from pathlib import Path
from typing import Callable, List

from sympcool.config import DEFAULT_OUTPUT_DIR, OUTPUT_DIR_ENV_VAR
from sympcool.core.analysis import FITTERS
from sympcool.core.budget import budget_table, parse_sweep, write_budget
from sympcool.core.config_loader import hash_config, load_experiment_config
from sympcool.core.constants import load_constants
from sympcool.core.logger import log_run
from sympcool.core.orchestrator import build_modes, run, scatter_params
from sympcool.core.records import format_fit_report, fits_to_frame, read_record, write_table
from sympcool.core.selfcheck import run_selfcheck
from sympcool.types import ErrorReport


logger = logging.getLogger(__name__)


EXIT_OK = 0
EXIT_OTHER = 1
EXIT_INPUT = 2
EXIT_DOMAIN = 3
EXIT_SELFCHECK = 4
EXIT_LOGGING = 5

EXIT_CODES = {
    "config_error": EXIT_INPUT,
    "constants_error": EXIT_INPUT,
    "record_error": EXIT_INPUT,
    "domain_error": EXIT_DOMAIN,
    "fit_error": EXIT_DOMAIN,
    "selfcheck_failure": EXIT_SELFCHECK,
    "logging_failure": EXIT_LOGGING,
}


class SelfcheckFailure(Exception):
    pass


def error_report(e: Exception) -> ErrorReport:
    message = str(e)
    token = message.split(":", 1)[0].strip()

    if isinstance(e, RuntimeError) and message == "logging_failure":
        return ErrorReport(error="Logging failure: run log not written", error_type="logging_failure")
    if isinstance(e, SelfcheckFailure):
        return ErrorReport(error=message, error_type="selfcheck_failure")
    if isinstance(e, ValueError) and token in EXIT_CODES:
        return ErrorReport(error=message.split(":", 1)[1].strip(), error_type=token)
    return ErrorReport(error=f"Internal error: {message}", error_type="internal_error")


def guarded(handler: Callable[[argparse.Namespace], List[Path]]) -> Callable[[argparse.Namespace], int]:
    """Runs a command, maps its failure to an exit code and appends the run log line."""

    def wrapped(args: argparse.Namespace) -> int:
        started = time.perf_counter()
        outputs: List[Path] = []
        status = "ok"
        code = EXIT_OK

        try:
            outputs = handler(args)
        except Exception as e:
            logger.debug("%s failed", args.command, exc_info=True)
            report = error_report(e)
            status = report.error_type
            code = EXIT_CODES.get(report.error_type, EXIT_OTHER)
            print(f"{report.error_type}: {report.error}", file=sys.stderr)
            if code == EXIT_LOGGING:
                return code

        try:
            log_run({
                "command": args.command,
                "config_hash": getattr(args, "config_hash", ""),
                "seed": getattr(args, "seed", None),
                "outputs": outputs,
                "status": status,
                "wall_time_ms": (time.perf_counter() - started) * 1000,
            }, _output_dir(args))
        except RuntimeError:
            print("logging_failure: run log not written", file=sys.stderr)
            return EXIT_LOGGING

        return code

    return wrapped


def _output_dir(args: argparse.Namespace) -> Path:
    if getattr(args, "output_dir", None):
        return Path(args.output_dir)
    return Path(os.getenv(OUTPUT_DIR_ENV_VAR) or DEFAULT_OUTPUT_DIR)


# ============================================
# COMMANDS
# ============================================

def cmd_run(args: argparse.Namespace) -> List[Path]:
    constants = load_constants(args.constants)
    config = load_experiment_config(Path(args.config), constants=constants)

    if args.seed is not None:
        config = config.model_copy(update={"sequence": config.sequence.model_copy(update={"seed": args.seed})})

    args.config_hash, args.seed = config.config_hash, config.sequence.seed
    args.output_dir = config.output.directory

    artifacts = run(config, constants)

    print(artifacts["summary"].to_string(index=False))
    return artifacts["outputs"]


def cmd_budget(args: argparse.Namespace) -> List[Path]:
    constants = load_constants(args.constants)
    config = load_experiment_config(Path(args.config), constants=constants)
    args.config_hash, args.seed = config.config_hash, config.sequence.seed
    args.output_dir = args.output_dir or config.output.directory

    axes = parse_sweep(args.sweep or [])
    modes = build_modes(config, constants)
    axes.setdefault("eta", [modes.eta(1, m) for m in config.sequence.cooling_modes])
    axes.setdefault("cycles", [float(config.sequence.cycles)])

    frame = budget_table(axes, scatter_params(config, modes, constants))
    path = write_budget(frame, Path(args.output_dir), {"config_hash": config.config_hash, "seed": str(config.sequence.seed)})

    print(frame.to_string(index=False))
    return [path]


def cmd_selfcheck(args: argparse.Namespace) -> List[Path]:
    results = run_selfcheck(args.constants)

    for r in results:
        print(f"{'PASS' if r['passed'] else 'FAIL'}  {r['check']:<24} {r['detail']}")

    failed = [r["check"] for r in results if not r["passed"]]
    if failed:
        raise SelfcheckFailure(f"failed checks: {', '.join(failed)}")
    return []


def cmd_fit(args: argparse.Namespace) -> List[Path]:
    if args.model not in FITTERS:
        raise ValueError(f"fit_error: unknown model '{args.model}' (expected one of {', '.join(FITTERS)})")

    path = Path(args.record)
    record = read_record(path)
    args.config_hash = record.metadata.get("config_hash") or hash_config(path.read_text(encoding="utf-8"))
    args.seed = record.seed

    result = FITTERS[args.model](record, args.readout_corrected)
    print(format_fit_report(result, path.name), end="")

    out = write_table(
        fits_to_frame([result], [path.name]),
        _output_dir(args) / f"{path.stem}_{args.model}_fit.csv",
        {"config_hash": args.config_hash, "seed": str(record.seed)},
    )
    return [out]


COMMANDS = {
    "run": guarded(cmd_run),
    "budget": guarded(cmd_budget),
    "selfcheck": guarded(cmd_selfcheck),
    "fit": guarded(cmd_fit),
}
