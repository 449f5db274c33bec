"""Command-line entry point."""
import argparse
import logging
import sys
from typing import List, Optional

import torch

from stereogan.commands import evaluate, gen_data, infer, train
from stereogan.config import settings
from stereogan.exceptions import ConfigError

logger = logging.getLogger("stereogan")

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_FAILED = 2


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with EXIT_INVALID."""

    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def create_parser() -> argparse.ArgumentParser:
    """Create the root parser with one subcommand per operation."""
    parser = _Parser(
        prog=settings.APP_NAME,
        description="Stereo-consistent cross-domain image translation",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {settings.APP_VERSION}"
    )
    parser.add_argument("--log-level", default=settings.LOG_LEVEL)

    # Include subcommands
    subparsers = parser.add_subparsers(dest="command", required=True)
    gen_data.register(subparsers)
    train.register(subparsers)
    infer.register(subparsers)
    evaluate.register(subparsers)

    return parser


def configure_runtime() -> None:
    """Apply thread and determinism settings before any tensor work."""
    if settings.NUM_THREADS > 0:
        torch.set_num_threads(settings.NUM_THREADS)
    if settings.DETERMINISTIC:
        torch.use_deterministic_algorithms(True, warn_only=True)


def main(argv: Optional[List[str]] = None) -> int:
    """Run one subcommand; returns 0 on success, 1 on invalid input, 2 on failure."""
    try:
        args = create_parser().parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code is None else int(e.code)
    logging.basicConfig(
        level=args.log_level.upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    configure_runtime()
    try:
        return args.handler(args)
    except ConfigError as e:
        logger.error(str(e))
        return EXIT_INVALID
    except ValueError as e:
        logger.error(f"Invalid input: {e}")
        return EXIT_INVALID
    except Exception as e:
        logger.error(f"{args.command} failed: {e}")
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
