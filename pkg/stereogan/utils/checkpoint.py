"""Checkpoint save/load for training resumption and inference."""
import logging
from pathlib import Path
from typing import TYPE_CHECKING, Any, Dict, Optional, Tuple, Union

import torch
from pydantic import ValidationError

from stereogan.exceptions import CheckpointError
from stereogan.models.cyclegan import CycleGANModels
from stereogan.schemas.config import RunConfig, TrainingMode

if TYPE_CHECKING:
    from stereogan.utils.trainer import StereoCycleTrainer

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


def save_checkpoint(
    trainer: "StereoCycleTrainer",
    path: Union[str, Path],
    extra: Optional[Dict[str, Any]] = None,
) -> Path:
    """Write everything needed to resume ``trainer`` bit-for-bit."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "format_version": FORMAT_VERSION,
        "config": trainer.config.model_dump(mode="json"),
        "trainer": trainer.state_dict(),
        "step": trainer.step,
        "phase": trainer.history[-1].phase if trainer.history else 1,
        "extra": dict(extra or {}),
    }
    torch.save(payload, path)
    logger.info(f"Saved checkpoint at step {trainer.step} to {path}")
    return path


def load_checkpoint(
    path: Union[str, Path], expected_mode: Optional[TrainingMode] = None
) -> Dict[str, Any]:
    """Read and sanity-check a checkpoint written by ``save_checkpoint``."""
    path = Path(path)
    if not path.is_file():
        raise CheckpointError(f"checkpoint {path} does not exist")
    try:
        payload = torch.load(path, map_location="cpu", weights_only=False)
    except Exception as e:
        raise CheckpointError(f"cannot read checkpoint {path}: {e}") from e
    if not isinstance(payload, dict) or payload.get("format_version") != FORMAT_VERSION:
        raise CheckpointError(
            f"checkpoint {path} has unsupported format "
            f"{payload.get('format_version') if isinstance(payload, dict) else type(payload)}"
        )
    mode = payload["trainer"].get("mode")
    if expected_mode is not None and mode != TrainingMode(expected_mode).value:
        raise CheckpointError(
            f"checkpoint {path} was trained in mode '{mode}', "
            f"expected '{TrainingMode(expected_mode).value}'"
        )
    return payload


def checkpoint_config(payload: Dict[str, Any]) -> RunConfig:
    """Validated run config stored in a loaded checkpoint payload."""
    try:
        return RunConfig.model_validate(payload["config"])
    except ValidationError as e:
        raise CheckpointError(f"checkpoint carries an invalid config: {e}") from e


def load_models(
    path: Union[str, Path], device: Union[str, torch.device] = "cpu"
) -> Tuple[CycleGANModels, RunConfig]:
    """Rebuild the four networks of a checkpoint in eval mode."""
    payload = load_checkpoint(path)
    config = checkpoint_config(payload)
    models = CycleGANModels.build(config)
    try:
        models.load_state_dict(payload["trainer"]["models"])
    except RuntimeError as e:
        raise CheckpointError(f"checkpoint {path} does not match its config: {e}") from e
    models.to(device).eval()
    logger.info(f"Loaded {models.mode.value} model from {path} (step {payload['step']})")
    return models, config
