"""Adversarial, cycle-consistency and identity losses.

All functions accept torch tensors (differentiable) or plain sequences of
floats and return a 0-d tensor.
"""
from typing import Dict, Mapping, Optional, Sequence, Tuple, Union

import torch
import torch.nn.functional as F

from stereogan.exceptions import ShapeError
from stereogan.schemas.config import AdversarialForm, LossWeights

Scores = Union[torch.Tensor, Sequence[float]]
Terms = Union[Mapping[str, object], Sequence[object]]


def _as_scores(scores: Scores) -> torch.Tensor:
    if isinstance(scores, torch.Tensor):
        values = scores.reshape(-1)
    else:
        values = torch.as_tensor(list(scores), dtype=torch.get_default_dtype())
    if values.numel() == 0:
        raise ValueError("score list is empty")
    return values


def _against(scores: torch.Tensor, target: float, form: AdversarialForm) -> torch.Tensor:
    targets = torch.full_like(scores, target)
    if form == AdversarialForm.BCE:
        return F.binary_cross_entropy_with_logits(scores, targets)
    return F.mse_loss(scores, targets)


def adv_loss_generator(
    fake_scores: Scores, form: AdversarialForm = AdversarialForm.LSGAN
) -> torch.Tensor:
    """Mean squared error of discriminator scores on fakes against the real target 1."""
    return _against(_as_scores(fake_scores), 1.0, form)


def adv_loss_discriminator(
    real_scores: Scores, fake_scores: Scores, weights: LossWeights
) -> torch.Tensor:
    """``d_slowdown * (MSE(real, 1) + MSE(fake, 0))``."""
    real = _against(_as_scores(real_scores), 1.0, weights.adversarial)
    fake = _against(_as_scores(fake_scores), 0.0, weights.adversarial)
    return weights.d_slowdown * (real + fake)


def cycle_loss(
    original: torch.Tensor, reconstructed: torch.Tensor, weights: LossWeights
) -> torch.Tensor:
    """``lambda_cycle * mean(|original - reconstructed|)`` over pixels and channels."""
    if original.shape != reconstructed.shape:
        raise ShapeError(
            f"cycle loss shapes differ: {tuple(original.shape)} vs "
            f"{tuple(reconstructed.shape)}"
        )
    return weights.lambda_cycle * F.l1_loss(reconstructed, original)


def identity_loss(
    original: torch.Tensor, mapped: torch.Tensor, weights: LossWeights
) -> torch.Tensor:
    """``lambda_identity * mean(|original - mapped|)``; zero weight by default."""
    if original.shape != mapped.shape:
        raise ShapeError("identity loss shapes differ")
    return weights.lambda_identity * F.l1_loss(mapped, original)


def _named(terms: Terms, prefix: str) -> Dict[str, object]:
    if isinstance(terms, Mapping):
        return dict(terms)
    return {f"{prefix}_{i}": term for i, term in enumerate(terms)}


def _scalar(term: object) -> float:
    return float(term.detach()) if isinstance(term, torch.Tensor) else float(term)


def total_generator_loss(
    adv_terms: Terms, cycle_terms: Terms, extra_terms: Optional[Terms] = None
) -> Tuple[object, Dict[str, float]]:
    """Sum of all terms plus a per-term breakdown for logging.

    ``cycle_terms`` must already be lambda-weighted. Terms are summed left to
    right, so float inputs give the sequential fold exactly.
    """
    named = {**_named(adv_terms, "adv"), **_named(cycle_terms, "cycle")}
    if extra_terms is not None:
        named.update(_named(extra_terms, "extra"))
    total: object = 0.0
    for term in named.values():
        total = total + term
    breakdown = {name: _scalar(term) for name, term in named.items()}
    breakdown["total"] = _scalar(total)
    return total, breakdown
