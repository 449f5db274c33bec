"""Network models package."""
from typing import Dict

import torch
from torch import nn

Parameters = Dict[str, torch.Tensor]


def init_weights(net: nn.Module, seed: int) -> None:
    """Seeded Gaussian(0, 0.02) init of conv weights; zero biases; unit norm scales."""
    generator = torch.Generator().manual_seed(seed)
    with torch.no_grad():
        for module in net.modules():
            if isinstance(module, (nn.Conv2d, nn.ConvTranspose2d)):
                module.weight.normal_(0.0, 0.02, generator=generator)
                if module.bias is not None:
                    module.bias.zero_()
            elif isinstance(module, nn.InstanceNorm2d) and module.affine:
                module.weight.fill_(1.0)
                module.bias.zero_()


def named_parameters(net: nn.Module) -> Parameters:
    """Live view of a network's parameters keyed by layer identifier."""
    return dict(net.named_parameters())


def parameter_count(net: nn.Module) -> int:
    """Total number of scalar parameters in a network."""
    return sum(p.numel() for p in net.parameters())
