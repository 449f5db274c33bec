"""Two-input conditional ResNet generator.

Content and condition images are concatenated channel-wise and mapped to an
output image of the content's size:

    stem 7x7 -> 2x stride-2 down -> residual blocks -> 2x up -> 7x7 head, tanh
"""
from typing import Optional, Tuple

import torch
from torch import nn

from stereogan.exceptions import ShapeError
from stereogan.models import Parameters, init_weights, named_parameters
from stereogan.schemas.config import GeneratorSpec, UpsampleMode
from stereogan.utils.validators import as_batch, ensure_same_size, validate_divisible


class ResidualBlock(nn.Module):
    """Two reflection-padded 3x3 convs with an identity shortcut."""

    def __init__(self, channels: int):
        super().__init__()
        self.block = nn.Sequential(
            nn.ReflectionPad2d(1),
            nn.Conv2d(channels, channels, kernel_size=3, bias=False),
            nn.InstanceNorm2d(channels, affine=True),
            nn.ReLU(inplace=True),
            nn.ReflectionPad2d(1),
            nn.Conv2d(channels, channels, kernel_size=3, bias=False),
            nn.InstanceNorm2d(channels, affine=True),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return x + self.block(x)


def _up_stage(in_channels: int, out_channels: int, mode: UpsampleMode) -> nn.Sequential:
    if mode == UpsampleMode.TRANSPOSE:
        conv = [
            nn.ConvTranspose2d(
                in_channels,
                out_channels,
                kernel_size=3,
                stride=2,
                padding=1,
                output_padding=1,
                bias=False,
            )
        ]
    else:
        conv = [
            nn.Upsample(scale_factor=2, mode="nearest"),
            nn.ReflectionPad2d(1),
            nn.Conv2d(in_channels, out_channels, kernel_size=3, bias=False),
        ]
    return nn.Sequential(
        *conv, nn.InstanceNorm2d(out_channels, affine=True), nn.ReLU(inplace=True)
    )


class ConditionalGenerator(nn.Module):
    """ResNet generator taking a content image and, if conditional, a condition image.

    Convs that feed an instance norm carry no bias: the affine norm supplies
    the shift and a bias there would receive no gradient.
    """

    def __init__(self, spec: GeneratorSpec):
        super().__init__()
        self.spec = spec
        f = spec.base_filters
        self.stem = nn.Sequential(
            nn.ReflectionPad2d(3),
            nn.Conv2d(spec.input_channels, f, kernel_size=7, bias=False),
            nn.InstanceNorm2d(f, affine=True),
            nn.ReLU(inplace=True),
        )
        self.down = nn.Sequential(
            nn.Conv2d(f, 2 * f, kernel_size=3, stride=2, padding=1, bias=False),
            nn.InstanceNorm2d(2 * f, affine=True),
            nn.ReLU(inplace=True),
            nn.Conv2d(2 * f, 4 * f, kernel_size=3, stride=2, padding=1, bias=False),
            nn.InstanceNorm2d(4 * f, affine=True),
            nn.ReLU(inplace=True),
        )
        self.blocks = nn.Sequential(
            *[ResidualBlock(4 * f) for _ in range(spec.residual_blocks)]
        )
        self.up = nn.Sequential(
            _up_stage(4 * f, 2 * f, spec.upsample),
            _up_stage(2 * f, f, spec.upsample),
        )
        self.head = nn.Sequential(
            nn.ReflectionPad2d(3),
            nn.Conv2d(f, spec.output_channels, kernel_size=7),
            nn.Tanh(),
        )

    def forward(
        self, content: torch.Tensor, condition: Optional[torch.Tensor] = None
    ) -> torch.Tensor:
        if self.spec.conditional:
            if condition is None:
                raise ShapeError("conditional generator requires a condition image")
            x = torch.cat([content, condition], dim=1)
        else:
            x = content
        x = self.stem(x)
        x = self.down(x)
        x = self.blocks(x)
        x = self.up(x)
        return self.head(x)


def build_generator(
    spec: GeneratorSpec, seed: int
) -> Tuple[ConditionalGenerator, Parameters]:
    """Build a generator with seeded Gaussian(0, 0.02) weights."""
    factor = 2 if spec.conditional else 1
    if spec.input_channels != factor * spec.output_channels:
        raise ShapeError(
            f"generator input_channels {spec.input_channels} must equal "
            f"{factor} x output_channels {spec.output_channels}"
        )
    if spec.residual_blocks < 1:
        raise ShapeError("generator needs at least one residual block")
    net = ConditionalGenerator(spec)
    init_weights(net, seed)
    return net, named_parameters(net)


def generator_forward(
    generator: ConditionalGenerator,
    content: torch.Tensor,
    condition: Optional[torch.Tensor] = None,
) -> torch.Tensor:
    """Translate ``content`` guided by ``condition``; output matches content's size.

    Accepts single ``(C, H, W)`` images or ``(N, C, H, W)`` batches and returns
    the same rank.
    """
    single = content.dim() == 3
    content_b = as_batch(content)
    channels = generator.spec.output_channels
    if content_b.shape[1] != channels:
        raise ShapeError(f"content must have {channels} channels, got {content_b.shape[1]}")
    if not validate_divisible(content_b, 4):
        raise ShapeError(
            f"image size {tuple(content_b.shape[-2:])} is not divisible by 4"
        )
    condition_b = None
    if generator.spec.conditional:
        if condition is None:
            raise ShapeError("conditional generator requires a condition image")
        condition_b = as_batch(condition)
        ensure_same_size(content_b, condition_b)
        if condition_b.shape[1] != generator.spec.condition_channels:
            raise ShapeError(
                f"condition must have {generator.spec.condition_channels} channels"
            )
    output = generator(content_b, condition_b)
    return output[0] if single else output
