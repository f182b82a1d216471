from __future__ import annotations

import torch
import torch.nn.functional as F
from torch import nn

from ..errors import ShapeMismatch
from .spec import NervBlockSpec


def nerv_block_forward(
    x: torch.Tensor,
    spec: NervBlockSpec,
    weight: torch.Tensor,
    bias: torch.Tensor | None,
) -> torch.Tensor:
    """Convolution (same padding) -> pixel-shuffle -> GELU.

    Accepts ``[C_in, h, w]`` or a batch ``[B, C_in, h, w]``.
    """

    unbatched = x.dim() == 3
    if unbatched:
        x = x.unsqueeze(0)
    if x.dim() != 4 or x.shape[1] != spec.in_channels:
        raise ShapeMismatch(
            f"NeRV block expects {spec.in_channels} input channels, got {tuple(x.shape)}"
        )
    expected = (spec.conv_channels, spec.in_channels, spec.kernel_size, spec.kernel_size)
    if tuple(weight.shape) != expected:
        raise ShapeMismatch(f"NeRV block weight must be {expected}, got {tuple(weight.shape)}")
    y = F.conv2d(x, weight, bias, padding=spec.kernel_size // 2)
    y = F.pixel_shuffle(y, spec.upscale)
    y = F.gelu(y)
    return y[0] if unbatched else y


class NervBlock(nn.Module):
    def __init__(self, spec: NervBlockSpec) -> None:
        super().__init__()
        self.spec = spec
        self.conv = nn.Conv2d(
            spec.in_channels,
            spec.conv_channels,
            spec.kernel_size,
            padding=spec.kernel_size // 2,
            bias=True,
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return nerv_block_forward(x, self.spec, self.conv.weight, self.conv.bias)


__all__ = ["nerv_block_forward", "NervBlock"]
