"""Validation utilities for image tensors."""
import torch

from stereogan.exceptions import ShapeError


def validate_image(image: torch.Tensor, channels: int = 3) -> bool:
    """Check an image is a ``(channels, H, W)`` tensor."""
    return image.dim() == 3 and image.shape[0] == channels


def validate_divisible(image: torch.Tensor, factor: int = 4) -> bool:
    """Check both spatial dimensions are divisible by ``factor``."""
    height, width = image.shape[-2:]
    return height % factor == 0 and width % factor == 0


def ensure_same_size(*images: torch.Tensor) -> None:
    """Raise ShapeError unless all images share their spatial size."""
    sizes = {tuple(img.shape[-2:]) for img in images}
    if len(sizes) > 1:
        raise ShapeError(f"image sizes differ: {sorted(sizes)}")


def as_batch(image: torch.Tensor) -> torch.Tensor:
    """Add a batch axis to a single ``(C, H, W)`` image."""
    if image.dim() == 3:
        return image.unsqueeze(0)
    if image.dim() == 4:
        return image
    raise ShapeError(f"expected (C, H, W) or (N, C, H, W), got {tuple(image.shape)}")
