"""``infer``: translate a directory of X images with a trained model."""
import argparse
import logging
from pathlib import Path
from typing import Optional

import numpy as np
import torch
import torchvision.transforms.functional as TF

from stereogan.commands import add_common_arguments, resolve_config
from stereogan.config import settings
from stereogan.exceptions import CheckpointError, DatasetError
from stereogan.models.cyclegan import CycleGANModels, translate
from stereogan.schemas.config import TrainingMode
from stereogan.schemas.data import DatasetMode, Domain, StereoPair
from stereogan.utils.checkpoint import load_models
from stereogan.utils.datasets import load_dataset, read_image, write_image
from stereogan.utils.evaluation import translate_pair

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("infer", help="Translate images X -> Y")
    add_common_arguments(parser)
    parser.add_argument("--checkpoint", type=Path, required=True)
    parser.add_argument("--input", type=Path, required=True, help="Input directory")
    parser.add_argument(
        "--input-mode", choices=[m.value for m in DatasetMode], default=DatasetMode.STEREO.value
    )
    parser.add_argument(
        "--mode",
        choices=[m.value for m in TrainingMode],
        default=None,
        help="Expected model mode; a mismatch with the checkpoint is an error",
    )
    condition = parser.add_mutually_exclusive_group()
    condition.add_argument("--condition", type=Path, default=None, help="Condition image y_W")
    condition.add_argument(
        "--condition-dir", type=Path, default=None, help="Directory to draw y_W from"
    )
    parser.set_defaults(handler=cmd_infer)


def _condition(
    args: argparse.Namespace, seed: int, models: CycleGANModels
) -> Optional[torch.Tensor]:
    """One condition image per invocation; logged so runs can be reproduced."""
    if not models.conditional:
        return None
    if args.condition is not None:
        logger.info(f"Condition image: {args.condition}")
        return read_image(args.condition)
    if args.condition_dir is None:
        raise DatasetError("a conditional model needs --condition or --condition-dir")
    mode = DatasetMode.STEREO if (args.condition_dir / "left").is_dir() else DatasetMode.MONO
    pool = load_dataset(args.condition_dir, mode, Domain.Y)
    sample = pool[int(np.random.default_rng(seed).integers(len(pool)))]
    logger.info(f"Condition image: {args.condition_dir} stem {sample.stem} (seed {seed})")
    return sample.left if isinstance(sample, StereoPair) else sample.image


def _fit(condition: Optional[torch.Tensor], like: torch.Tensor) -> Optional[torch.Tensor]:
    if condition is None or condition.shape[-2:] == like.shape[-2:]:
        return condition
    return TF.resize(condition, list(like.shape[-2:]), antialias=True)


def cmd_infer(args: argparse.Namespace) -> int:
    """Translate every input; outputs mirror the input stems under ``--out``."""
    config = resolve_config(args)
    models, _ = load_models(args.checkpoint, device=settings.DEVICE)
    if args.mode is not None and TrainingMode(args.mode) != models.mode:
        raise CheckpointError(
            f"checkpoint holds a {models.mode.value} model, --mode asked for {args.mode}"
        )
    out = Path(args.out or config.output_dir / "infer")
    dataset = load_dataset(args.input, DatasetMode(args.input_mode), Domain.X)
    condition = _condition(args, config.training.seed, models)
    device = next(models.parameters()).device

    for sample in dataset.samples:
        name = f"{sample.stem}.png"
        if isinstance(sample, StereoPair):
            output = translate_pair(models, sample, _fit(condition, sample.left))
            write_image(output.left, out / "left" / name)
            write_image(output.right, out / "right" / name)
            continue
        y_w = _fit(condition, sample.image)
        image = translate(
            models,
            sample.image.to(device),
            y_w=None if y_w is None else y_w.to(device),
            mode=TrainingMode.MONO if models.conditional else TrainingMode.BASELINE,
        )
        write_image(image, out / name)
    logger.info(f"Translated {len(dataset)} {dataset.mode.value} samples into {out}")
    return 0
