"""Pytest configuration and fixtures."""
import pytest
import torch

from stereogan.schemas.config import RunConfig
from stereogan.schemas.data import Domain, StereoPair
from stereogan.utils.synthetic import synth_generate

SIZE = (64, 128)


def tiny_config(**sections) -> RunConfig:
    """Small networks and 64x128 crops; ``sections`` override whole sections."""
    raw = {
        "training": {"epochs_mono": 1, "epochs_stereo": 1, "log_every": 1},
        "augment": {"crop_height": SIZE[0], "crop_width": SIZE[1]},
        "generator": {"residual_blocks": 1, "base_filters": 4},
        "discriminator": {"base_filters": 4},
        "synth": {"count": 3, "height": SIZE[0], "width": SIZE[1], "max_disparity": 4},
    }
    for name, values in sections.items():
        raw[name] = {**raw.get(name, {}), **values}
    return RunConfig.model_validate(raw)


@pytest.fixture
def config():
    """Provide a tiny run config in stereo mode."""
    return tiny_config()


@pytest.fixture(scope="session")
def stereo_x():
    """Provide three synthetic domain-X stereo pairs."""
    return synth_generate(3, Domain.X, SIZE, 4, seed=0)


@pytest.fixture(scope="session")
def stereo_y():
    """Provide three synthetic domain-Y stereo pairs."""
    return synth_generate(3, Domain.Y, SIZE, 4, seed=0)


def shifted_pair(shift: int, height: int = 64, width: int = 128, seed: int = 0) -> StereoPair:
    """Random-texture pair whose right view is the left view moved ``shift`` px left."""
    generator = torch.Generator().manual_seed(seed)
    left = torch.rand(3, height, width, generator=generator) * 2 - 1
    right = torch.rand(3, height, width, generator=generator) * 2 - 1
    right[:, :, : width - shift] = left[:, :, shift:]
    return StereoPair(left=left, right=right, stem=f"shift{shift}")
