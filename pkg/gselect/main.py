"""Command-line application."""
import argparse
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from . import __version__
from .commands import (
    register_diagnostics,
    register_experiments,
    register_priors,
    register_select,
)
from .exceptions import GSelectError, InvalidInputError
from .settings import get_settings

logger = logging.getLogger("gselect")

EXIT_OK = 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gselect",
        description="Bayesian variable selection with mixtures of g-priors",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", help="Override GSELECT_LOG_LEVEL")

    subparsers = parser.add_subparsers(dest="command", required=True)
    register_select(subparsers)
    register_experiments(subparsers)
    register_diagnostics(subparsers)
    register_priors(subparsers)
    return parser


def configure_logging(level: str) -> None:
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def exit_code_for(exc: BaseException) -> int:
    """0 success, 2 config or input error, 3 degenerate data."""
    if isinstance(exc, GSelectError):
        return exc.exit_code
    if isinstance(exc, (ValidationError, OSError)):
        return InvalidInputError.exit_code
    return 1


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    settings = get_settings()
    configure_logging(args.log_level or settings.log_level)

    try:
        return args.func(args, settings)
    except (GSelectError, ValidationError, OSError) as e:
        logger.debug("Command %s failed", args.command, exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return exit_code_for(e)


if __name__ == "__main__":
    sys.exit(main())
