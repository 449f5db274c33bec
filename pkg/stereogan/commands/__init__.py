"""CLI subcommands.

Each module exposes ``register(subparsers)``, which adds its parser and sets
``handler`` to a function taking the parsed namespace and returning an exit
code.
"""
import argparse
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from stereogan.config import load_run_config
from stereogan.schemas.config import RunConfig


def add_common_arguments(parser: argparse.ArgumentParser) -> None:
    """``--config``, ``--seed`` and ``--out``, shared by every subcommand."""
    parser.add_argument("--config", type=Path, default=None, help="YAML run config")
    parser.add_argument("--seed", type=int, default=None, help="Random seed")
    parser.add_argument("--out", type=Path, default=None, help="Output directory")


def parse_size(text: str) -> Tuple[int, int]:
    """``"64x128"`` -> ``(64, 128)`` (height x width)."""
    try:
        height, width = (int(part) for part in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"size must look like HxW, got '{text}'") from None
    if height <= 0 or width <= 0:
        raise argparse.ArgumentTypeError(f"size must be positive, got '{text}'")
    return height, width


def resolve_config(
    args: argparse.Namespace, overrides: Optional[Dict[str, Any]] = None
) -> RunConfig:
    """Config file plus the flags common to all subcommands plus ``overrides``."""
    flags: Dict[str, Any] = {"training.seed": args.seed}
    flags.update(overrides or {})
    return load_run_config(args.config, flags)
