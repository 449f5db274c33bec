"""Random crop/rescale, horizontal flip and intensity re-scaling.

Both eyes of a stereo pair always share one draw of the random parameters.
"""
from typing import NamedTuple, Tuple, Union

import numpy as np
import torch
import torchvision.transforms.functional as TF
from torchvision.transforms import InterpolationMode

from stereogan.exceptions import ShapeError
from stereogan.schemas.config import AugmentConfig
from stereogan.schemas.data import MonoSample, StereoPair

Augmentable = Union[StereoPair, MonoSample]


class AugmentParams(NamedTuple):
    """One draw of augmentation randomness."""

    top: int
    left: int
    window_height: int
    window_width: int
    flip: bool
    factor: float


def draw_augment_params(
    size: Tuple[int, int], cfg: AugmentConfig, rng: np.random.Generator
) -> AugmentParams:
    """Draw a crop window (scale >= 1 relative to the target), flip and factor."""
    height, width = size
    max_scale = min(height / cfg.crop_height, width / cfg.crop_width)
    if max_scale < 1:
        raise ShapeError(
            f"source {height}x{width} is smaller than crop target "
            f"{cfg.crop_height}x{cfg.crop_width}; pass --crop HxW or set "
            "augment.crop_height and augment.crop_width"
        )
    scale = float(rng.uniform(1.0, max_scale))
    window_h = min(height, max(cfg.crop_height, round(cfg.crop_height * scale)))
    window_w = min(width, max(cfg.crop_width, round(cfg.crop_width * scale)))
    top = int(rng.integers(0, height - window_h + 1))
    left = int(rng.integers(0, width - window_w + 1))
    flip = bool(rng.random() < cfg.flip_probability)
    low, high = cfg.intensity_jitter
    factor = float(rng.uniform(low, high))
    return AugmentParams(top, left, window_h, window_w, flip, factor)


def _crop(image: torch.Tensor, p: AugmentParams, cfg: AugmentConfig, mode) -> torch.Tensor:
    if (p.window_height, p.window_width) == (cfg.crop_height, cfg.crop_width):
        return image[..., p.top : p.top + p.window_height, p.left : p.left + p.window_width]
    return TF.resized_crop(
        image,
        p.top,
        p.left,
        p.window_height,
        p.window_width,
        [cfg.crop_height, cfg.crop_width],
        interpolation=mode,
        antialias=mode == InterpolationMode.BILINEAR,
    )


def _crop_map(values: torch.Tensor, p: AugmentParams, cfg: AugmentConfig) -> torch.Tensor:
    cropped = _crop(values.unsqueeze(0).float(), p, cfg, InterpolationMode.NEAREST)
    return cropped[0]


def flip_pair(pair: StereoPair) -> StereoPair:
    """Mirror both views and swap eyes, which keeps disparities positive.

    Ground truth is dropped: it is defined on the old right view, which is
    not available.
    """
    return StereoPair(
        left=TF.hflip(pair.right),
        right=TF.hflip(pair.left),
        stem=pair.stem,
        scene_id=pair.scene_id,
    )


def _intensity(image: torch.Tensor, factor: float) -> torch.Tensor:
    return (image * factor).clamp(-1.0, 1.0)


def apply_augment(sample: Augmentable, p: AugmentParams, cfg: AugmentConfig) -> Augmentable:
    """Apply a fixed parameter draw to a sample."""
    if isinstance(sample, MonoSample):
        image = _crop(sample.image, p, cfg, InterpolationMode.BILINEAR)
        if p.flip:
            image = TF.hflip(image)
        return MonoSample(
            image=_intensity(image, p.factor), stem=sample.stem, scene_id=sample.scene_id
        )

    disparity = occlusion = None
    if sample.disparity_gt is not None:
        disparity = _crop_map(sample.disparity_gt, p, cfg) * (
            cfg.crop_width / p.window_width
        )
    if sample.occlusion is not None:
        occlusion = _crop_map(sample.occlusion, p, cfg) > 0.5
    pair = StereoPair(
        left=_crop(sample.left, p, cfg, InterpolationMode.BILINEAR),
        right=_crop(sample.right, p, cfg, InterpolationMode.BILINEAR),
        disparity_gt=disparity,
        occlusion=occlusion,
        stem=sample.stem,
        scene_id=sample.scene_id,
    )
    if p.flip:
        pair = flip_pair(pair)
    return pair.model_copy(
        update={
            "left": _intensity(pair.left, p.factor),
            "right": _intensity(pair.right, p.factor),
        }
    )


def augment(sample: Augmentable, cfg: AugmentConfig, rng: np.random.Generator) -> Augmentable:
    """Randomly crop, rescale, flip and re-scale the intensity of a sample."""
    size = sample.size if isinstance(sample, StereoPair) else tuple(sample.image.shape[1:])
    params = draw_augment_params(size, cfg, rng)
    return apply_augment(sample, params, cfg)
