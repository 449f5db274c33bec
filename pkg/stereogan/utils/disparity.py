"""SAD block-matching disparity and disparity-driven warping."""
from typing import Tuple

import torch
import torch.nn.functional as F

from stereogan.exceptions import ShapeError
from stereogan.schemas.data import DisparityMap, StereoPair

# Cost of matching against columns shifted out of the right view.
OUT_OF_VIEW_COST = 1e3


def _box_mean(values: torch.Tensor, block: int) -> torch.Tensor:
    """Mean over a ``block x block`` window centred on each pixel of (H, W) maps."""
    pooled = F.avg_pool2d(
        values.unsqueeze(1),
        kernel_size=block,
        stride=1,
        padding=block // 2,
        count_include_pad=False,
    )
    return pooled.squeeze(1)


def block_match_disparity(
    pair: StereoPair,
    block: int = 9,
    max_disparity: int = 12,
    min_variance: float = 1e-4,
    max_sad: float = 0.25,
) -> DisparityMap:
    """Winner-take-all SAD block matching along horizontal epipolar lines.

    For each left pixel the disparity ``d`` in ``[0, max_disparity]``
    minimizing the mean absolute difference between the left block and the
    right block ``d`` columns to its left is chosen. A pixel is valid when
    its best per-pixel SAD is at most ``max_sad``, its left block has
    grey-level variance of at least ``min_variance``, it lies at least
    ``max_disparity`` columns plus half a block from the left border (so no
    candidate block leaves the right view), and its block fits
    inside the image.
    """
    if block < 3 or block % 2 == 0:
        raise ShapeError(f"block size must be odd and >= 3, got {block}")
    height, width = pair.size
    if height < block or width < block:
        raise ShapeError(f"image {height}x{width} is smaller than block {block}")
    if max_disparity >= width / 4:
        raise ShapeError(f"max_disparity {max_disparity} must be < width/4 ({width / 4:g})")

    left, right = pair.left.float(), pair.right.float()
    costs = []
    for d in range(max_disparity + 1):
        diff = torch.full((height, width), OUT_OF_VIEW_COST)
        diff[:, d:] = (left[:, :, d:] - right[:, :, : width - d]).abs().mean(dim=0)
        costs.append(diff)
    aggregated = _box_mean(torch.stack(costs), block)
    best_cost, best = aggregated.min(dim=0)

    grey = left.mean(dim=0, keepdim=True)
    variance = _box_mean(grey**2, block)[0] - _box_mean(grey, block)[0] ** 2

    half = block // 2
    ys = torch.arange(height)[:, None]
    xs = torch.arange(width)[None, :]
    interior = (ys >= half) & (ys < height - half) & (xs >= half) & (xs < width - half)
    valid = (
        (best_cost <= max_sad)
        & (variance >= min_variance)
        & (xs >= max_disparity + half)
        & interior
    )
    return DisparityMap(values=best.float(), valid=valid, max_disparity=float(max_disparity))


def warp_by_disparity(
    image: torch.Tensor, disparity: DisparityMap
) -> Tuple[torch.Tensor, torch.Tensor]:
    """Resample ``image`` at ``x - d(x)`` with linear interpolation.

    Warping the right view by left-view disparity reconstructs the left view.
    Returns the warped image and a mask of pixels whose source lies inside
    the image and whose disparity is valid.
    """
    height, width = image.shape[-2:]
    if tuple(disparity.values.shape) != (height, width):
        raise ShapeError(
            f"disparity {tuple(disparity.values.shape)} does not match image {height}x{width}"
        )
    ys = torch.arange(height, dtype=torch.float32)[:, None].expand(height, width)
    xs = torch.arange(width, dtype=torch.float32)[None, :].expand(height, width)
    source_x = xs - disparity.values.float()
    inside = (source_x >= 0) & (source_x <= width - 1)

    grid = torch.stack(
        (
            2.0 * source_x / max(width - 1, 1) - 1.0,
            2.0 * ys / max(height - 1, 1) - 1.0,
        ),
        dim=-1,
    )
    warped = F.grid_sample(
        image.float().unsqueeze(0),
        grid.unsqueeze(0),
        mode="bilinear",
        padding_mode="border",
        align_corners=True,
    )[0]
    return warped, inside & disparity.valid.bool()
