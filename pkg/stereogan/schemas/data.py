"""Pydantic containers for images, stereo pairs and datasets.

Images are float32 tensors shaped ``(3, H, W)`` with values in [-1, 1].
"""
from enum import Enum
from typing import List, Optional, Union

import torch
from pydantic import BaseModel, ConfigDict, model_validator

from stereogan.exceptions import DatasetError, ShapeError
from stereogan.utils.validators import validate_image


class Domain(str, Enum):
    """Image domain: X is the simulation phantom, Y the intraoperative scene."""

    X = "X"
    Y = "Y"

    @property
    def opposite(self) -> "Domain":
        return Domain.Y if self is Domain.X else Domain.X


class DatasetMode(str, Enum):
    """Sample kind held by a dataset."""

    STEREO = "stereo"
    MONO = "mono"


class _TensorModel(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


class MonoSample(_TensorModel):
    """A single image."""

    image: torch.Tensor
    stem: str = ""
    scene_id: Optional[int] = None

    @model_validator(mode="after")
    def _check_image(self) -> "MonoSample":
        if not validate_image(self.image):
            raise ShapeError(f"image must be (3, H, W), got {tuple(self.image.shape)}")
        return self


class StereoPair(_TensorModel):
    """Rectified left/right views, optionally with ground-truth geometry.

    ``disparity_gt`` is defined on left-view pixels: the content at left column
    ``x`` appears in the right view at column ``x - d``. ``occlusion`` marks
    left pixels with no visible counterpart in the right view.
    """

    left: torch.Tensor
    right: torch.Tensor
    disparity_gt: Optional[torch.Tensor] = None
    occlusion: Optional[torch.Tensor] = None
    stem: str = ""
    scene_id: Optional[int] = None

    @model_validator(mode="after")
    def _check_geometry(self) -> "StereoPair":
        if not validate_image(self.left) or self.left.shape != self.right.shape:
            raise ShapeError(
                f"left {tuple(self.left.shape)} and right {tuple(self.right.shape)} "
                "must be identically shaped (3, H, W) images"
            )
        size = tuple(self.left.shape[1:])
        for name in ("disparity_gt", "occlusion"):
            extra = getattr(self, name)
            if extra is not None and tuple(extra.shape) != size:
                raise ShapeError(f"{name} shape {tuple(extra.shape)} != image size {size}")
        if self.disparity_gt is not None and self.disparity_gt.numel():
            if float(self.disparity_gt.min()) < 0:
                raise ShapeError("disparity_gt must be non-negative")
        return self

    @property
    def size(self) -> tuple:
        return tuple(self.left.shape[1:])


Sample = Union[StereoPair, MonoSample]


class DomainDataset(_TensorModel):
    """Ordered, non-empty collection of samples from one domain."""

    domain: Domain
    mode: DatasetMode
    samples: List[Union[StereoPair, MonoSample]]

    @model_validator(mode="after")
    def _check_samples(self) -> "DomainDataset":
        if not self.samples:
            raise DatasetError(f"dataset for domain {self.domain.value} is empty")
        expected = StereoPair if self.mode == DatasetMode.STEREO else MonoSample
        for sample in self.samples:
            if not isinstance(sample, expected):
                raise DatasetError(
                    f"{self.mode.value} dataset holds a {type(sample).__name__}"
                )
        return self

    def __len__(self) -> int:
        return len(self.samples)

    def __getitem__(self, index: int) -> Sample:
        return self.samples[index]

    @property
    def stems(self) -> List[str]:
        return [s.stem for s in self.samples]

    def left_view(self) -> "DomainDataset":
        """Mono dataset made of the left images only."""
        if self.mode == DatasetMode.MONO:
            return self
        return DomainDataset(
            domain=self.domain,
            mode=DatasetMode.MONO,
            samples=[
                MonoSample(image=p.left, stem=p.stem, scene_id=p.scene_id)
                for p in self.samples
            ],
        )


class DisparityMap(_TensorModel):
    """Per-pixel horizontal disparity (pixels) with a validity mask."""

    values: torch.Tensor
    valid: torch.Tensor
    max_disparity: float

    @model_validator(mode="after")
    def _check_shape(self) -> "DisparityMap":
        if self.values.shape != self.valid.shape or self.values.dim() != 2:
            raise ShapeError(
                f"values {tuple(self.values.shape)} and valid "
                f"{tuple(self.valid.shape)} must be matching (H, W) maps"
            )
        return self

    @property
    def valid_fraction(self) -> float:
        return float(self.valid.float().mean()) if self.valid.numel() else 0.0

    @classmethod
    def from_ground_truth(cls, pair: StereoPair) -> "DisparityMap":
        """Exact map from a pair's ground truth; occluded pixels are invalid."""
        if pair.disparity_gt is None:
            raise DatasetError(f"pair '{pair.stem}' has no ground-truth disparity")
        values = pair.disparity_gt.float()
        valid = torch.ones_like(values, dtype=torch.bool)
        if pair.occlusion is not None:
            valid &= ~pair.occlusion.bool()
        top = float(values.max()) if values.numel() else 0.0
        return cls(values=values, valid=valid, max_disparity=top)
