"""The four networks of one model and stereo-consistent translation.

G maps X -> Y and F maps Y -> X; each takes a content image and a condition
image from its target domain. For a stereo pair the left eye is conditioned
on a random target-domain sample and the right eye on the translated left eye:

    y'_l = G(x_l, y_W)        y'_r = G(x_r, y'_l)
"""
from typing import Optional, Tuple, Union

import torch
from torch import nn

from stereogan.models.discriminator import FullImageDiscriminator, build_discriminator
from stereogan.models.generator import ConditionalGenerator, build_generator, generator_forward
from stereogan.schemas.config import RunConfig, TrainingMode
from stereogan.utils.validators import ensure_same_size


class CycleGANModels(nn.Module):
    """G (X->Y), F (Y->X), D_X and D_Y."""

    def __init__(
        self,
        g: ConditionalGenerator,
        f: ConditionalGenerator,
        d_x: FullImageDiscriminator,
        d_y: FullImageDiscriminator,
        mode: TrainingMode,
    ):
        super().__init__()
        self.g = g
        self.f = f
        self.d_x = d_x
        self.d_y = d_y
        self.mode = TrainingMode(mode)

    @classmethod
    def build(cls, config: RunConfig) -> "CycleGANModels":
        """Seeded networks for the configured mode (unconditional for baseline)."""
        seed = config.training.seed
        spec = config.generator_spec()
        g, _ = build_generator(spec, seed)
        f, _ = build_generator(spec, seed + 1)
        d_x, _ = build_discriminator(config.discriminator, seed + 2)
        d_y, _ = build_discriminator(config.discriminator, seed + 3)
        return cls(g, f, d_x, d_y, config.training.mode)

    @property
    def conditional(self) -> bool:
        return self.g.spec.conditional


def apply_generator(
    generator: ConditionalGenerator,
    content: torch.Tensor,
    condition: Optional[torch.Tensor],
) -> torch.Tensor:
    """Apply a generator, passing the condition only when it takes one."""
    if not generator.spec.conditional:
        return generator_forward(generator, content)
    return generator_forward(generator, content, condition)


def generate_stereo(
    generator: ConditionalGenerator,
    x_l: torch.Tensor,
    x_r: torch.Tensor,
    y_w: torch.Tensor,
) -> Tuple[torch.Tensor, torch.Tensor]:
    """Translate a stereo pair, conditioning the right eye on the translated left eye."""
    ensure_same_size(x_l, x_r, y_w)
    y_l = apply_generator(generator, x_l, y_w)
    y_r = apply_generator(generator, x_r, y_l)
    return y_l, y_r


@torch.no_grad()
def translate(
    models: CycleGANModels,
    x_l: torch.Tensor,
    x_r: Optional[torch.Tensor] = None,
    y_w: Optional[torch.Tensor] = None,
    mode: Optional[TrainingMode] = None,
) -> Union[torch.Tensor, Tuple[torch.Tensor, torch.Tensor]]:
    """Inference X -> Y.

    ``mono`` returns ``G(x_l, y_W)``; ``stereo`` returns the chained pair;
    ``baseline`` translates each given eye independently and unconditionally.
    """
    mode = TrainingMode(mode or models.mode)
    if mode == TrainingMode.BASELINE or not models.conditional:
        left = apply_generator(models.g, x_l, None)
        return left if x_r is None else (left, apply_generator(models.g, x_r, None))
    if y_w is None:
        raise ValueError(f"{mode.value} translation needs a condition image")
    if mode == TrainingMode.MONO:
        return apply_generator(models.g, x_l, y_w)
    if x_r is None:
        raise ValueError("stereo translation needs the right image")
    return generate_stereo(models.g, x_l, x_r, y_w)
