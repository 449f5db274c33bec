"""Tests for adversarial, cycle and total losses."""
import random

import pytest
import torch

from stereogan.exceptions import ShapeError
from stereogan.schemas.config import AdversarialForm, LossWeights
from stereogan.utils.losses import (
    adv_loss_discriminator,
    adv_loss_generator,
    cycle_loss,
    identity_loss,
    total_generator_loss,
)


class TestAdversarialLoss:
    """Test least-squares adversarial losses."""

    @pytest.mark.parametrize(
        "scores, expected",
        [([1.0, 1.0], 0.0), ([0.0], 1.0), ([0.5, 0.0], 0.625)],
    )
    def test_generator_loss(self, scores, expected):
        """Test the generator loss against hand-computed values."""
        assert float(adv_loss_generator(scores)) == pytest.approx(expected, abs=1e-6)

    @pytest.mark.parametrize(
        "real, fake, expected",
        [([1.0], [0.0], 0.0), ([0.0], [1.0], 1.0), ([0.8], [0.3], 0.065)],
    )
    def test_discriminator_loss(self, real, fake, expected):
        """Test the slowed-down discriminator loss against hand-computed values."""
        loss = adv_loss_discriminator(real, fake, LossWeights())
        assert float(loss) == pytest.approx(expected, abs=1e-6)

    def test_empty_scores(self):
        """Test an empty score list is rejected."""
        with pytest.raises(ValueError):
            adv_loss_generator([])

    def test_tensor_scores_are_differentiable(self):
        """Test gradients flow through tensor scores."""
        scores = torch.tensor([0.2, 0.7], requires_grad=True)
        adv_loss_generator(scores).backward()
        assert scores.grad is not None

    def test_bce_form(self):
        """Test the BCE form treats scores as logits."""
        loss = adv_loss_generator([0.0], form=AdversarialForm.BCE)
        assert float(loss) == pytest.approx(0.693147, abs=1e-6)

    def test_discriminator_minimum_on_equal_scores(self):
        """Test equal real and fake scores cost least at 0.5, where the loss is slowdown / 2."""
        weights = LossWeights()
        grid = [i / 100 for i in range(101)]
        values = [float(adv_loss_discriminator([s], [s], weights)) for s in grid]
        best = min(range(len(grid)), key=values.__getitem__)
        assert grid[best] == 0.5
        assert values[best] == pytest.approx(weights.d_slowdown * 0.5, abs=1e-6)

    @pytest.mark.parametrize("form", list(AdversarialForm))
    def test_non_negative(self, form):
        """Test both adversarial losses are non-negative for arbitrary scores."""
        generator = torch.Generator().manual_seed(2)
        weights = LossWeights(adversarial=form)
        for _ in range(20):
            real = torch.randn(4, generator=generator) * 3
            fake = torch.randn(4, generator=generator) * 3
            assert float(adv_loss_generator(fake, form=form)) >= 0
            assert float(adv_loss_discriminator(real, fake, weights)) >= 0


class TestCycleLoss:
    """Test the lambda-weighted L1 cycle loss."""

    def test_identical_images(self):
        """Test a perfect reconstruction costs nothing."""
        image = torch.rand(3, 8, 8)
        assert float(cycle_loss(image, image.clone(), LossWeights())) == 0.0

    def test_uniform_difference(self):
        """Test a uniform 0.1 error with lambda 20 costs 2."""
        image = torch.zeros(3, 4, 4)
        loss = cycle_loss(image, image + 0.1, LossWeights())
        assert float(loss) == pytest.approx(2.0, abs=1e-6)

    def test_matches_brute_force(self):
        """Test against an independent per-pixel sum."""
        generator = torch.Generator().manual_seed(0)
        original = torch.rand(3, 4, 4, generator=generator)
        reconstructed = torch.rand(3, 4, 4, generator=generator)
        total = 0.0
        for value_a, value_b in zip(original.flatten().tolist(), reconstructed.flatten().tolist()):
            total += abs(value_a - value_b)
        expected = 20.0 * total / original.numel()
        assert float(cycle_loss(original, reconstructed, LossWeights())) == pytest.approx(
            expected, abs=1e-6
        )

    def test_linear_in_lambda(self):
        """Test the loss scales exactly with lambda."""
        generator = torch.Generator().manual_seed(1)
        original = torch.rand(3, 4, 4, generator=generator)
        reconstructed = torch.rand(3, 4, 4, generator=generator)
        base = float(cycle_loss(original, reconstructed, LossWeights(lambda_cycle=1.0)))
        for lam in (1.0, 20.0, 40.0):
            loss = cycle_loss(original, reconstructed, LossWeights(lambda_cycle=lam))
            assert float(loss) == pytest.approx(lam * base, rel=1e-6)

    def test_shape_mismatch(self):
        """Test differently shaped images are rejected."""
        with pytest.raises(ShapeError):
            cycle_loss(torch.zeros(3, 4, 4), torch.zeros(3, 4, 8), LossWeights())

    def test_symmetric(self):
        """Test swapping original and reconstruction leaves the loss unchanged."""
        generator = torch.Generator().manual_seed(3)
        a = torch.rand(3, 8, 8, generator=generator)
        b = torch.rand(3, 8, 8, generator=generator)
        weights = LossWeights()
        assert float(cycle_loss(a, b, weights)) == float(cycle_loss(b, a, weights))

    def test_non_negative(self):
        """Test cycle and identity losses are non-negative on random images."""
        generator = torch.Generator().manual_seed(4)
        weights = LossWeights(lambda_identity=0.5)
        for _ in range(10):
            a = torch.rand(3, 4, 4, generator=generator) * 2 - 1
            b = torch.rand(3, 4, 4, generator=generator) * 2 - 1
            assert float(cycle_loss(a, b, weights)) >= 0
            assert float(identity_loss(a, b, weights)) >= 0

    def test_gradient_is_scaled_sign(self):
        """Test the gradient wrt the reconstruction is lambda / N times the error sign."""
        generator = torch.Generator().manual_seed(5)
        original = torch.rand(3, 4, 4, generator=generator)
        reconstructed = torch.rand(3, 4, 4, generator=generator).requires_grad_(True)
        cycle_loss(original, reconstructed, LossWeights()).backward()
        expected = 20.0 / original.numel() * torch.sign(reconstructed.detach() - original)
        assert torch.allclose(reconstructed.grad, expected, atol=1e-7)

    def test_identity_loss_default_weight(self):
        """Test the identity term is off by default."""
        assert float(identity_loss(torch.zeros(3, 4, 4), torch.ones(3, 4, 4), LossWeights())) == 0


class TestTotalGeneratorLoss:
    """Test summation of generator loss terms."""

    def test_zero(self):
        """Test all-zero terms sum to zero."""
        total, _ = total_generator_loss([0.0], [0.0])
        assert total == 0.0

    def test_summation(self):
        """Test plain summation of adversarial and cycle terms."""
        total, breakdown = total_generator_loss([0.5, 0.5], [2.0, 2.0])
        assert total == pytest.approx(5.0)
        assert breakdown["total"] == pytest.approx(5.0)
        assert set(breakdown) == {"adv_0", "adv_1", "cycle_0", "cycle_1", "total"}

    def test_left_fold(self):
        """Test random terms equal an independent sequential sum."""
        chooser = random.Random(0)
        adv = [chooser.random() for _ in range(4)]
        cycle = [chooser.random() * 20 for _ in range(4)]
        expected = 0.0
        for term in adv + cycle:
            expected += term
        total, _ = total_generator_loss(adv, cycle)
        assert total == pytest.approx(expected, abs=1e-9)

    def test_named_terms(self):
        """Test mappings keep their names in the breakdown."""
        _, breakdown = total_generator_loss({"adv_g": 1.0}, {"cycle_x": 2.0}, {"identity_g": 0.5})
        assert breakdown == {"adv_g": 1.0, "cycle_x": 2.0, "identity_g": 0.5, "total": 3.5}
