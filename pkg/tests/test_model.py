"""Tests for generator and discriminator networks."""
import random

import pytest
import torch

from stereogan.exceptions import ShapeError
from stereogan.models import parameter_count
from stereogan.models.discriminator import (
    FullImageDiscriminator,
    build_discriminator,
    discriminator_forward,
)
from stereogan.models.generator import build_generator, generator_forward
from stereogan.schemas.config import DiscriminatorSpec, GeneratorSpec, UpsampleMode

TINY = GeneratorSpec(residual_blocks=1, base_filters=4)


def expected_generator_parameters(spec: GeneratorSpec) -> int:
    """Closed-form parameter count of the conditional ResNet generator."""
    f = spec.base_filters
    norm = lambda c: 2 * c  # noqa: E731
    stem = spec.input_channels * f * 49 + norm(f)
    down = f * 2 * f * 9 + norm(2 * f) + 2 * f * 4 * f * 9 + norm(4 * f)
    block = 2 * (4 * f * 4 * f * 9 + norm(4 * f))
    up = 4 * f * 2 * f * 9 + norm(2 * f) + 2 * f * f * 9 + norm(f)
    head = f * spec.output_channels * 49 + spec.output_channels
    return stem + down + spec.residual_blocks * block + up + head


def finite_difference_check(net, loss_fn, samples: int = 10, eps: float = 1e-6) -> None:
    """Compare autograd with central differences on randomly chosen parameter entries."""
    net.zero_grad()
    loss_fn().backward()
    params = [p for p in net.parameters() if p.grad is not None]
    chooser = random.Random(0)
    with torch.no_grad():
        for _ in range(samples):
            param = chooser.choice(params)
            index = chooser.randrange(param.numel())
            flat = param.view(-1)
            original = flat[index].item()
            flat[index] = original + eps
            plus = loss_fn().item()
            flat[index] = original - eps
            minus = loss_fn().item()
            flat[index] = original
            numeric = (plus - minus) / (2 * eps)
            analytic = param.grad.view(-1)[index].item()
            scale = max(abs(numeric), abs(analytic), 1e-6)
            assert abs(numeric - analytic) <= 1e-3 * scale


class TestGenerator:
    """Test the conditional ResNet generator."""

    def test_default_spec_shape_and_range(self):
        """Test a 6-channel generator keeps the content size and outputs in [-1, 1]."""
        net, _ = build_generator(GeneratorSpec(), seed=0)
        content = torch.rand(3, 64, 128) * 2 - 1
        output = generator_forward(net, content, torch.rand(3, 64, 128) * 2 - 1)
        assert output.shape == (3, 64, 128)
        assert output.min() >= -1 and output.max() <= 1

    @pytest.mark.slow
    def test_full_resolution_forward(self):
        """Test a 256x512 six-channel input maps to a 256x512 image."""
        net, _ = build_generator(GeneratorSpec(), seed=0)
        output = generator_forward(net, torch.zeros(3, 256, 512), torch.zeros(3, 256, 512))
        assert output.shape == (3, 256, 512)

    def test_seven_residual_blocks(self):
        """Test the default spec has seven blocks and the closed-form parameter count."""
        spec = GeneratorSpec()
        net, _ = build_generator(spec, seed=0)
        assert len(net.blocks) == 7
        assert parameter_count(net) == expected_generator_parameters(spec)

    @pytest.mark.parametrize("size", [(32, 32), (48, 80), (64, 128)])
    def test_spatial_shape_preserved(self, size):
        """Test any size divisible by 4 is preserved."""
        net, _ = build_generator(TINY, seed=0)
        output = generator_forward(net, torch.zeros(3, *size), torch.zeros(3, *size))
        assert tuple(output.shape[1:]) == size

    def test_resize_upsampling(self):
        """Test the resize-convolution variant has the same output contract."""
        spec = TINY.model_copy(update={"upsample": UpsampleMode.RESIZE})
        net, _ = build_generator(spec, seed=0)
        output = generator_forward(net, torch.zeros(3, 32, 64), torch.zeros(3, 32, 64))
        assert output.shape == (3, 32, 64)

    def test_seeded_build_is_deterministic(self):
        """Test the same spec and seed give bitwise-identical parameters."""
        _, first = build_generator(TINY, seed=3)
        _, second = build_generator(TINY, seed=3)
        assert first.keys() == second.keys()
        assert all(torch.equal(first[k], second[k]) for k in first)

    def test_forward_is_pure(self):
        """Test identical calls give identical outputs."""
        net, _ = build_generator(TINY, seed=0)
        content, condition = torch.rand(3, 32, 32), torch.rand(3, 32, 32)
        assert torch.equal(
            generator_forward(net, content, condition), generator_forward(net, content, condition)
        )

    def test_condition_changes_output(self):
        """Test two different conditions give different outputs for the same content."""
        net, _ = build_generator(TINY, seed=0)
        content = torch.rand(3, 32, 32)
        first = generator_forward(net, content, torch.rand(3, 32, 32))
        second = generator_forward(net, content, -torch.rand(3, 32, 32))
        assert not torch.equal(first, second)

    def test_size_not_divisible_by_four(self):
        """Test content sizes not divisible by 4 are rejected."""
        net, _ = build_generator(TINY, seed=0)
        with pytest.raises(ShapeError):
            generator_forward(net, torch.zeros(3, 30, 32), torch.zeros(3, 30, 32))

    def test_condition_size_mismatch(self):
        """Test content and condition must share their size."""
        net, _ = build_generator(TINY, seed=0)
        with pytest.raises(ShapeError):
            generator_forward(net, torch.zeros(3, 32, 32), torch.zeros(3, 32, 64))

    def test_missing_condition(self):
        """Test a conditional generator needs a condition."""
        net, _ = build_generator(TINY, seed=0)
        with pytest.raises(ShapeError):
            generator_forward(net, torch.zeros(3, 32, 32))

    def test_channel_mismatch_rejected(self):
        """Test a spec whose input is not twice the output channels is invalid."""
        with pytest.raises(ValueError):
            GeneratorSpec(input_channels=5, output_channels=3)

    def test_unconditional_baseline(self):
        """Test the unconditional spec takes the content image alone."""
        spec = TINY.unconditional()
        assert spec.input_channels == spec.output_channels == 3
        net, _ = build_generator(spec, seed=0)
        assert generator_forward(net, torch.zeros(3, 32, 32)).shape == (3, 32, 32)

    def test_finite_difference_gradients(self):
        """Test autograd agrees with float64 central differences."""
        spec = GeneratorSpec(residual_blocks=1, base_filters=2)
        net, _ = build_generator(spec, seed=0)
        net.double()
        generator = torch.Generator().manual_seed(1)
        content = torch.rand(1, 3, 8, 8, generator=generator, dtype=torch.float64)
        condition = torch.rand(1, 3, 8, 8, generator=generator, dtype=torch.float64)
        weights = torch.rand(1, 3, 8, 8, generator=generator, dtype=torch.float64)
        finite_difference_check(net, lambda: (net(content, condition) * weights).sum())


class TestDiscriminator:
    """Test the full-image discriminator."""

    @pytest.mark.parametrize("size", [(64, 128), (256, 512)])
    def test_one_score_per_image(self, size):
        """Test single images map to a 0-d score at both working resolutions."""
        net, _ = build_discriminator(DiscriminatorSpec(base_filters=4), seed=0)
        score = discriminator_forward(net, torch.zeros(3, *size))
        assert score.dim() == 0

    def test_batch_scores(self):
        """Test a batch gives one score per image."""
        net, _ = build_discriminator(DiscriminatorSpec(base_filters=4), seed=0)
        assert discriminator_forward(net, torch.zeros(2, 3, 64, 128)).shape == (2,)

    def test_default_spec_scalar(self):
        """Test the 64-filter default also reduces a 64x128 image to a scalar."""
        net, _ = build_discriminator(DiscriminatorSpec(), seed=0)
        assert discriminator_forward(net, torch.zeros(3, 64, 128)).dim() == 0

    @pytest.mark.parametrize("size", [(8, 64), (16, 16), (15, 64), (16, 128)])
    def test_too_small_input(self, size):
        """Test inputs that leave no usable map after the conv stack are rejected."""
        net, _ = build_discriminator(DiscriminatorSpec(base_filters=4), seed=0)
        with pytest.raises(ShapeError):
            discriminator_forward(net, torch.zeros(3, *size))

    @pytest.mark.parametrize("size", [(16, 32), (16, 64), (32, 16)])
    def test_smallest_inputs(self, size):
        """Test a 16-pixel side is scored when the other side leaves a wider map."""
        net, _ = build_discriminator(DiscriminatorSpec(base_filters=4), seed=0)
        generator = torch.Generator().manual_seed(0)
        image = torch.rand(3, *size, generator=generator) * 2 - 1
        score = discriminator_forward(net, image)
        assert score.dim() == 0
        assert torch.isfinite(score)
        assert FullImageDiscriminator.reductions_for(*size) == 0

    def test_reduction_passes(self):
        """Test the shared reduction block is applied until both dims are at most 4."""
        assert FullImageDiscriminator.reductions_for(32, 64) == 0
        assert FullImageDiscriminator.reductions_for(64, 128) == 1
        assert FullImageDiscriminator.reductions_for(256, 512) == 3

    def test_parameters_independent_of_input_size(self):
        """Test the parameter set does not depend on the input size."""
        first, params_a = build_discriminator(DiscriminatorSpec(base_filters=4), seed=0)
        discriminator_forward(first, torch.zeros(3, 256, 512))
        _, params_b = build_discriminator(DiscriminatorSpec(base_filters=4), seed=0)
        assert params_a.keys() == params_b.keys()

    def test_seeded_build_is_deterministic(self):
        """Test the same seed gives identical parameters."""
        _, first = build_discriminator(DiscriminatorSpec(base_filters=4), seed=5)
        _, second = build_discriminator(DiscriminatorSpec(base_filters=4), seed=5)
        assert all(torch.equal(first[k], second[k]) for k in first)

    def test_finite_difference_gradients(self):
        """Test autograd agrees with float64 central differences."""
        net, _ = build_discriminator(DiscriminatorSpec(base_filters=2), seed=0)
        net.double()
        image = torch.rand(
            1, 3, 64, 128, generator=torch.Generator().manual_seed(2), dtype=torch.float64
        )
        finite_difference_check(net, lambda: net(image).sum())
