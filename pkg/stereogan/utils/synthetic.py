"""Synthetic two-domain stereo scenes with exact disparity and occlusion.

A scene is a stack of fronto-parallel layers (a full-frame background plus
ellipses and rectangles) at integer disparities. Each layer is painted on a
canvas ``max_disparity`` columns wider than the view; the left view shows
canvas columns ``[0, W)`` and the right view shows ``[d, d + W)`` of each
layer, so ``right(x - d) == left(x)`` holds exactly wherever the layer is
visible in both views.

Domain X looks like a silicone phantom (flat fills). Domain Y looks like
tissue (multi-octave texture, grain and specular highlights). Texture lives
on the layer, so it moves with the layer's disparity.
"""
from typing import List, Optional, Tuple

import numpy as np
import torch
import torch.nn.functional as F

from stereogan.schemas.data import DatasetMode, Domain, DomainDataset, StereoPair

X_BACKGROUND = (-0.55, -0.5, -0.35)
X_OBJECT = (0.75, 0.35, 0.35)
Y_BACKGROUND = (-0.1, -0.65, -0.6)
Y_OBJECT = (0.45, -0.25, -0.2)


def _smooth_noise(rng: np.random.Generator, height: int, width: int) -> torch.Tensor:
    """Multi-octave value noise in roughly [-1, 1], shaped (H, W)."""
    total = torch.zeros(height, width)
    for step, amplitude in ((16, 0.5), (8, 0.3), (4, 0.2)):
        coarse = torch.from_numpy(
            rng.uniform(-1.0, 1.0, size=(height // step + 2, width // step + 2))
        ).float()
        up = F.interpolate(
            coarse[None, None], size=(height, width), mode="bilinear", align_corners=False
        )
        total += amplitude * up[0, 0]
    return total


def _highlights(
    rng: np.random.Generator, height: int, width: int, count: int
) -> torch.Tensor:
    """Sum of small Gaussian blobs in [0, 1], shaped (H, W)."""
    ys = torch.arange(height).float()[:, None]
    xs = torch.arange(width).float()[None, :]
    total = torch.zeros(height, width)
    for _ in range(count):
        cy, cx = rng.uniform(0, height), rng.uniform(0, width)
        sigma = rng.uniform(1.0, max(1.5, height / 24))
        total += torch.exp(-((ys - cy) ** 2 + (xs - cx) ** 2) / (2 * sigma**2))
    return total.clamp(0.0, 1.0)


def _appearance(
    rng: np.random.Generator, domain: Domain, height: int, width: int, background: bool
) -> torch.Tensor:
    """Paint one layer's (3, H, W) canvas."""
    if domain == Domain.X:
        base = X_BACKGROUND if background else X_OBJECT
        jitter = rng.uniform(-0.1, 0.1, size=3)
        color = torch.tensor([b + j for b, j in zip(base, jitter)]).float()
        return color[:, None, None].expand(3, height, width).clone()

    base = Y_BACKGROUND if background else Y_OBJECT
    jitter = rng.uniform(-0.15, 0.15, size=3)
    color = torch.tensor([b + j for b, j in zip(base, jitter)]).float()
    texture = _smooth_noise(rng, height, width)
    grain = torch.from_numpy(rng.uniform(-1.0, 1.0, size=(height, width))).float()
    shading = 0.3 * texture + 0.08 * grain
    image = color[:, None, None] + shading[None] * torch.tensor([1.0, 0.6, 0.6])[:, None, None]
    specular = _highlights(rng, height, width, int(rng.integers(1, 4)))
    image = image * (1 - specular) + specular
    return image.clamp(-1.0, 1.0)


def _shape_mask(rng: np.random.Generator, height: int, width: int) -> torch.Tensor:
    ys = torch.arange(height).float()[:, None]
    xs = torch.arange(width).float()[None, :]
    cy, cx = rng.uniform(0, height), rng.uniform(0, width)
    ry = rng.uniform(height / 8, height / 3)
    rx = rng.uniform(width / 12, width / 5)
    if rng.random() < 0.5:
        return ((ys - cy) / ry) ** 2 + ((xs - cx) / rx) ** 2 <= 1.0
    return ((ys - cy).abs() <= ry) & ((xs - cx).abs() <= rx)


def render_scene(
    rng: np.random.Generator,
    domain: Domain,
    size: Tuple[int, int],
    max_disparity: int,
    max_objects: int = 4,
    background_disparity: Optional[int] = None,
) -> Tuple[torch.Tensor, torch.Tensor, torch.Tensor, torch.Tensor]:
    """Render ``(left, right, disparity, occlusion)`` for one random scene."""
    height, width = size
    canvas_width = width + max_disparity
    if background_disparity is None:
        background_disparity = int(rng.integers(0, max_disparity // 3 + 1))
    count = int(rng.integers(1, max_objects + 1)) if max_objects > 0 else 0
    object_disparities = sorted(
        int(d) for d in rng.integers(background_disparity, max_disparity + 1, size=count)
    )

    disparities = [background_disparity] + object_disparities
    canvases = [_appearance(rng, domain, height, canvas_width, background=True)]
    masks = [torch.ones(height, canvas_width, dtype=torch.bool)]
    for _ in object_disparities:
        masks.append(_shape_mask(rng, height, canvas_width))
        canvases.append(_appearance(rng, domain, height, canvas_width, background=False))

    left = torch.empty(3, height, width)
    right = torch.empty(3, height, width)
    top_left = torch.zeros(height, width, dtype=torch.long)
    top_right = torch.zeros(height, width, dtype=torch.long)
    for index, (d, canvas, mask) in enumerate(zip(disparities, canvases, masks)):
        view_l = mask[:, :width]
        view_r = mask[:, d : d + width]
        left = torch.where(view_l[None], canvas[:, :, :width], left)
        right = torch.where(view_r[None], canvas[:, :, d : d + width], right)
        top_left[view_l] = index
        top_right[view_r] = index

    layer_disparity = torch.tensor(disparities, dtype=torch.long)
    disparity = layer_disparity[top_left]
    xs = torch.arange(width)[None, :].expand(height, width)
    target = xs - disparity
    inside = target >= 0
    seen = top_right.gather(1, target.clamp(min=0))
    occlusion = ~inside | (seen != top_left)
    return left, right, disparity.float(), occlusion


def synth_generate(
    n: int,
    domain: Domain,
    size: Tuple[int, int],
    max_disparity: int,
    seed: int,
    max_objects: int = 4,
    background_disparity: Optional[int] = None,
    scene_offset: int = 0,
) -> DomainDataset:
    """Render ``n`` stereo pairs of one domain with ground-truth disparity.

    Scene ``i`` gets id ``scene_offset + i`` and its own random stream derived
    from ``(seed, domain, id)``, so datasets are reproducible and splits that
    use disjoint id ranges never share a scene.
    """
    height, width = size
    if max_disparity >= width / 8:
        raise ValueError(f"max_disparity {max_disparity} must be < width/8 ({width / 8:g})")
    if height % 4 or width % 4:
        raise ValueError(f"size {height}x{width} is not divisible by 4")
    domain_index = 0 if domain == Domain.X else 1
    samples: List[StereoPair] = []
    for i in range(n):
        scene_id = scene_offset + i
        rng = np.random.default_rng([seed, domain_index, scene_id])
        left, right, disparity, occlusion = render_scene(
            rng, domain, size, max_disparity, max_objects, background_disparity
        )
        samples.append(
            StereoPair(
                left=left,
                right=right,
                disparity_gt=disparity,
                occlusion=occlusion,
                stem=f"{scene_id:05d}",
                scene_id=scene_id,
            )
        )
    return DomainDataset(domain=domain, mode=DatasetMode.STEREO, samples=samples)


def split_by_scene(
    dataset: DomainDataset, test_fraction: float, seed: int = 0
) -> Tuple[DomainDataset, DomainDataset]:
    """Partition by scene id so train and test never share a scene."""
    ids = sorted({s.scene_id for s in dataset.samples})
    rng = np.random.default_rng(seed)
    shuffled = [ids[i] for i in rng.permutation(len(ids))]
    n_test = max(1, round(len(ids) * test_fraction))
    if n_test >= len(ids):
        raise ValueError("split leaves no training scenes")
    test_ids = set(shuffled[:n_test])
    train = [s for s in dataset.samples if s.scene_id not in test_ids]
    test = [s for s in dataset.samples if s.scene_id in test_ids]
    return (
        DomainDataset(domain=dataset.domain, mode=dataset.mode, samples=train),
        DomainDataset(domain=dataset.domain, mode=dataset.mode, samples=test),
    )
