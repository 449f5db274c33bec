"""Dataset directory IO and batch sampling.

Layout of one split directory (``root/trainX`` etc.)::

    stereo:  left/<stem>.png  right/<stem>.png
             [disparity/<stem>.png]  16-bit, pixels x 256
             [occlusion/<stem>.png]  8-bit mask
    mono:    <stem>.png
"""
import logging
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np
import torch
from PIL import Image

from stereogan.exceptions import DatasetError
from stereogan.schemas.data import (
    DatasetMode,
    Domain,
    DomainDataset,
    MonoSample,
    Sample,
    StereoPair,
)

logger = logging.getLogger(__name__)

DISPARITY_SCALE = 256.0
IMAGE_SUFFIX = ".png"


def to_tensor(array: np.ndarray) -> torch.Tensor:
    """8-bit ``(H, W, 3)`` array -> float ``(3, H, W)`` in [-1, 1]."""
    return torch.from_numpy(array.astype(np.float32) / 127.5 - 1.0).permute(2, 0, 1).contiguous()


def to_array(image: torch.Tensor) -> np.ndarray:
    """Float ``(3, H, W)`` in [-1, 1] -> 8-bit ``(H, W, 3)`` array."""
    scaled = ((image.detach().cpu().float() + 1.0) * 127.5).round().clamp(0, 255)
    return scaled.to(torch.uint8).permute(1, 2, 0).numpy()


def read_image(path: Path) -> torch.Tensor:
    with Image.open(path) as img:
        return to_tensor(np.asarray(img.convert("RGB")))


def write_image(image: torch.Tensor, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(to_array(image)).save(path)


def read_disparity(path: Path) -> torch.Tensor:
    with Image.open(path) as img:
        values = np.asarray(img).astype(np.float32) / DISPARITY_SCALE
    return torch.from_numpy(values)


def write_disparity(disparity: torch.Tensor, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    scaled = (disparity.detach().cpu().numpy() * DISPARITY_SCALE).round()
    Image.fromarray(np.clip(scaled, 0, 65535).astype(np.uint16)).save(path)


def read_mask(path: Path) -> torch.Tensor:
    with Image.open(path) as img:
        return torch.from_numpy(np.asarray(img.convert("L")) > 127)


def write_mask(mask: torch.Tensor, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(mask.detach().cpu().numpy().astype(np.uint8) * 255).save(path)


def _stems(directory: Path) -> Dict[str, Path]:
    return {p.stem: p for p in sorted(directory.glob(f"*{IMAGE_SUFFIX}"))}


def _scene_id(stem: str) -> Optional[int]:
    return int(stem) if stem.isdigit() else None


def infer_domain(root: Path) -> Domain:
    """Domain from a split directory name ending in X or Y."""
    suffix = root.name[-1:].upper()
    if suffix not in ("X", "Y"):
        raise DatasetError(f"cannot infer domain from directory name '{root.name}'")
    return Domain(suffix)


def load_dataset(
    root: Union[str, Path], mode: DatasetMode, domain: Optional[Domain] = None
) -> DomainDataset:
    """Load a split directory; samples are ordered lexicographically by stem."""
    root = Path(root)
    mode = DatasetMode(mode)
    domain = domain or infer_domain(root)
    if not root.is_dir():
        raise DatasetError(f"dataset directory {root} does not exist")

    samples: List[Sample] = []
    if mode == DatasetMode.MONO:
        for stem, path in _stems(root).items():
            samples.append(MonoSample(image=read_image(path), stem=stem, scene_id=_scene_id(stem)))
    else:
        left_dir, right_dir = root / "left", root / "right"
        for sub in (left_dir, right_dir):
            if not sub.is_dir():
                raise DatasetError(f"stereo dataset {root} is missing '{sub.name}/'")
        lefts, rights = _stems(left_dir), _stems(right_dir)
        orphans = sorted(set(lefts) ^ set(rights))
        if orphans:
            named = ", ".join(
                f"{'left' if s in lefts else 'right'}/{s}{IMAGE_SUFFIX}" for s in orphans
            )
            raise DatasetError(f"stereo dataset {root} has unpaired images: {named}")
        for stem in sorted(lefts):
            disparity_path = root / "disparity" / f"{stem}{IMAGE_SUFFIX}"
            occlusion_path = root / "occlusion" / f"{stem}{IMAGE_SUFFIX}"
            disparity = read_disparity(disparity_path) if disparity_path.exists() else None
            occlusion = read_mask(occlusion_path) if occlusion_path.exists() else None
            samples.append(
                StereoPair(
                    left=read_image(lefts[stem]),
                    right=read_image(rights[stem]),
                    disparity_gt=disparity,
                    occlusion=occlusion,
                    stem=stem,
                    scene_id=_scene_id(stem),
                )
            )
    if not samples:
        raise DatasetError(f"dataset {root} is empty")
    logger.info(f"Loaded {len(samples)} {mode.value} samples of domain {domain.value} from {root}")
    return DomainDataset(domain=domain, mode=mode, samples=samples)


def save_dataset(dataset: DomainDataset, root: Union[str, Path]) -> None:
    """Write a dataset in the layout ``load_dataset`` reads."""
    root = Path(root)
    for sample in dataset.samples:
        name = f"{sample.stem}{IMAGE_SUFFIX}"
        if isinstance(sample, MonoSample):
            write_image(sample.image, root / name)
            continue
        write_image(sample.left, root / "left" / name)
        write_image(sample.right, root / "right" / name)
        if sample.disparity_gt is not None:
            write_disparity(sample.disparity_gt, root / "disparity" / name)
        if sample.occlusion is not None:
            write_mask(sample.occlusion, root / "occlusion" / name)


def sample_batch(dataset: DomainDataset, rng: np.random.Generator) -> Sample:
    """Uniformly random single sample (batch size 1)."""
    if len(dataset) == 0:
        raise DatasetError("cannot sample from an empty dataset")
    return dataset[int(rng.integers(len(dataset)))]
