"""Command-line entry point."""

import argparse
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

import structlog
from pydantic import ValidationError

from src import __version__
from src.cli.commands import COMMANDS, run_command
from src.cli.presets import preset_names
from src.core.exceptions import InvariantViolation, SolverError
from src.infrastructure.storage import ResultStorage
from src.schemas.experiment import ExperimentConfig, dump_config, load_config
from src.utils.helpers import calculate_hash
from src.utils.logging import bind_run_context, setup_logging

logger = structlog.get_logger()

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_SOLVER = 2
EXIT_ACCEPTANCE = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="obstacle-lab",
        description="Penalization and ergodicity experiments for stochastic obstacle problems.",
    )
    parser.add_argument("command", choices=[*COMMANDS, "list-presets"])
    parser.add_argument("--config", type=Path, default=None, help="TOML experiment file")
    parser.add_argument("--seed", type=int, default=None, help="master seed (u64)")
    parser.add_argument("--threads", type=int, default=None, help="worker threads")
    parser.add_argument("--out", type=Path, default=None, help="output directory")
    parser.add_argument("--preset", default=None, help="scenario preset name")
    parser.add_argument(
        "--log-level", default=None, choices=["DEBUG", "INFO", "WARNING", "ERROR"]
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return parser


def apply_overrides(config: ExperimentConfig, args: argparse.Namespace) -> ExperimentConfig:
    """Flags override the file; the result is re-validated."""
    data: dict[str, Any] = config.model_dump(mode="json")
    if args.seed is not None:
        data["master_seed"] = args.seed
    if args.threads is not None:
        data["threads"] = args.threads
    if args.out is not None:
        data["output_dir"] = str(args.out)
    if args.preset is not None:
        data["scenario"] = {**data["scenario"], "preset": args.preset}
    return ExperimentConfig.model_validate(data)


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse ``argv``, run the command and return the exit status."""
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level)

    if args.command == "list-presets":
        for name in preset_names():
            print(name)
        return EXIT_OK

    try:
        config = apply_overrides(load_config(args.config), args)
        config_hash = calculate_hash(config.model_dump(mode="json"))
        bind_run_context(args.command, config.master_seed, config_hash)
        result = run_command(args.command, config)
        csv_path, json_path = ResultStorage(config.output_dir).save(
            args.command,
            result.rows,
            {**result.summary, "passed": result.passed},
            config_toml=dump_config(config),
        )
    except (InvariantViolation, ValidationError) as exc:
        logger.error("Invalid configuration", command=args.command, error=str(exc))
        print(f"ERROR {args.command} {type(exc).__name__}: {exc}")
        return EXIT_INVALID
    except SolverError as exc:
        logger.error("Solver failure", command=args.command, error=str(exc))
        print(f"ERROR {args.command} {type(exc).__name__}: {exc}")
        return EXIT_SOLVER

    logger.info("Artifacts written", csv=str(csv_path), json=str(json_path))
    print(result.summary_line())
    return EXIT_ACCEPTANCE if result.passed is False else EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
