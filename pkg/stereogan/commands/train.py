"""``train``: run the mono-then-stereo curriculum."""
import argparse
import logging
from pathlib import Path

from stereogan.commands import add_common_arguments, parse_size, resolve_config
from stereogan.config import dump_run_config, settings
from stereogan.schemas.config import TrainingMode
from stereogan.schemas.data import DatasetMode, Domain
from stereogan.utils.datasets import load_dataset
from stereogan.utils.trainer import run_curriculum

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("train", help="Train a model")
    add_common_arguments(parser)
    parser.add_argument("--mode", choices=[m.value for m in TrainingMode], default=None)
    parser.add_argument("--epochs-mono", type=int, default=None)
    parser.add_argument("--epochs-stereo", type=int, default=None)
    parser.add_argument("--data", type=Path, default=None, help="Dataset root (trainX, trainY)")
    parser.add_argument(
        "--mono-data", type=Path, default=None, help="Mono dataset root for phase 1"
    )
    parser.add_argument("--crop", type=parse_size, default=None, help="Crop size HxW")
    parser.add_argument("--resume", type=Path, default=None, help="Checkpoint to resume")
    parser.set_defaults(handler=cmd_train)


def cmd_train(args: argparse.Namespace) -> int:
    """Train, writing config.yaml, metrics.jsonl and checkpoints to the output dir."""
    overrides = {
        "training.mode": args.mode,
        "training.epochs_mono": args.epochs_mono,
        "training.epochs_stereo": args.epochs_stereo,
        "data.root": str(args.data) if args.data else None,
        "data.mono_root": str(args.mono_data) if args.mono_data else None,
        "output_dir": str(args.out) if args.out else None,
    }
    if args.crop is not None:
        overrides["augment.crop_height"], overrides["augment.crop_width"] = args.crop
    config = resolve_config(args, overrides)
    output_dir = Path(config.output_dir)
    dump_run_config(config, output_dir / "config.yaml")

    root = Path(config.data.root)
    stereo_x = load_dataset(root / "trainX", DatasetMode.STEREO, Domain.X)
    stereo_y = load_dataset(root / "trainY", DatasetMode.STEREO, Domain.Y)
    mono_x = mono_y = None
    if config.data.mono_root is not None:
        mono_root = Path(config.data.mono_root)
        mono_x = load_dataset(mono_root / "trainX", DatasetMode.MONO, Domain.X)
        mono_y = load_dataset(mono_root / "trainY", DatasetMode.MONO, Domain.Y)

    logger.info(f"Training {config.training.mode.value} model into {output_dir}")
    trainer, final = run_curriculum(
        config,
        mono_x=mono_x,
        mono_y=mono_y,
        stereo_x=stereo_x,
        stereo_y=stereo_y,
        output_dir=output_dir,
        resume_from=args.resume,
        device=settings.DEVICE,
    )
    logger.info(f"Finished after {trainer.step} steps; final checkpoint {final}")
    return 0
