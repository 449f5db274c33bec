"""Full-image discriminator emitting one score per image."""
from typing import Tuple

import torch
from torch import nn

from stereogan.exceptions import ShapeError
from stereogan.models import Parameters, init_weights, named_parameters
from stereogan.schemas.config import DiscriminatorSpec
from stereogan.utils.validators import as_batch

MIN_INPUT_SIZE = 16
MAX_SCORE_SIZE = 4


def _down(in_channels: int, out_channels: int, norm: bool) -> list:
    layers = [
        nn.Conv2d(in_channels, out_channels, kernel_size=4, stride=2, padding=1, bias=not norm)
    ]
    if norm:
        layers.append(nn.InstanceNorm2d(out_channels, affine=True))
    layers.append(nn.LeakyReLU(0.2, inplace=True))
    return layers


def _halve(size: int) -> int:
    return (size + 2 - 4) // 2 + 1


class FullImageDiscriminator(nn.Module):
    """Stride-2 conv stack f -> 2f -> 4f -> 8f, then a shared 8f reduction block
    applied until both spatial dims are <= 4, a 1-channel conv and a global mean.

    The reduction block is shared so the parameter set does not depend on the
    input size.
    """

    def __init__(self, spec: DiscriminatorSpec):
        super().__init__()
        self.spec = spec
        f = spec.base_filters
        self.stack = nn.Sequential(
            *_down(spec.input_channels, f, norm=False),
            *_down(f, 2 * f, norm=True),
            *_down(2 * f, 4 * f, norm=True),
            *_down(4 * f, 8 * f, norm=True),
        )
        self.reduce = nn.Sequential(*_down(8 * f, 8 * f, norm=True))
        self.score = nn.Conv2d(8 * f, 1, kernel_size=3, padding=1)

    @staticmethod
    def reductions_for(height: int, width: int) -> int:
        """Number of reduction passes needed for an input of this size."""
        if min(height, width) < MIN_INPUT_SIZE:
            raise ShapeError(
                f"discriminator input {height}x{width} is smaller than "
                f"{MIN_INPUT_SIZE} pixels on a side"
            )
        rows, cols = height, width
        for _ in range(4):
            rows, cols = _halve(rows), _halve(cols)
        # instance norm needs more than one value per channel
        if rows * cols < 2:
            raise ShapeError(
                f"discriminator input {height}x{width} leaves a 1x1 map after the conv stack"
            )
        passes = 0
        while rows > MAX_SCORE_SIZE or cols > MAX_SCORE_SIZE:
            if min(rows, cols) < 2:
                raise ShapeError(
                    f"discriminator input {height}x{width} has too extreme an aspect ratio"
                )
            rows, cols = _halve(rows), _halve(cols)
            passes += 1
        return passes

    def forward(self, image: torch.Tensor) -> torch.Tensor:
        passes = self.reductions_for(*image.shape[-2:])
        x = self.stack(image)
        for _ in range(passes):
            x = self.reduce(x)
        x = self.score(x)
        if self.spec.reduce_to_scalar:
            return x.mean(dim=(1, 2, 3))
        return x


def build_discriminator(
    spec: DiscriminatorSpec, seed: int
) -> Tuple[FullImageDiscriminator, Parameters]:
    """Build a discriminator with seeded Gaussian(0, 0.02) weights."""
    net = FullImageDiscriminator(spec)
    init_weights(net, seed)
    return net, named_parameters(net)


def discriminator_forward(
    discriminator: FullImageDiscriminator, image: torch.Tensor
) -> torch.Tensor:
    """Score one image (returns a 0-d tensor) or a batch (returns ``(N,)``)."""
    single = image.dim() == 3
    scores = discriminator(as_batch(image))
    return scores[0] if single else scores
