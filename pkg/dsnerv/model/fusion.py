"""Cross-channel attention fusion of the aligned static and dynamic features."""
from __future__ import annotations

from typing import Tuple

import torch
from torch import nn

from ..errors import ShapeMismatch


def channel_attention(q: torch.Tensor, k: torch.Tensor) -> torch.Tensor:
    """Row-softmax of the [c1, c1] channel score matrix ``Q K^T`` (no temperature)."""

    return torch.softmax(q @ k.transpose(-2, -1), dim=-1)


class CrossChannelFusion(nn.Module):
    """Static channels query the dynamic channels; the static feature is added back."""

    def __init__(self, channels: int) -> None:
        super().__init__()
        self.channels = channels
        self.conv_q = nn.Conv2d(channels, channels, kernel_size=1, stride=1)
        self.conv_k = nn.Conv2d(channels, channels, kernel_size=1, stride=1)
        self.conv_v = nn.Conv2d(channels, channels, kernel_size=1, stride=1)

    def attention(
        self, static_feat: torch.Tensor, dynamic_feat: torch.Tensor
    ) -> Tuple[torch.Tensor, torch.Tensor]:
        """Return the attention matrix [B, c1, c1] and the flattened values [B, c1, N]."""

        if static_feat.shape != dynamic_feat.shape or static_feat.shape[-3] != self.channels:
            raise ShapeMismatch(
                f"fusion expects two [{self.channels}, h, w] features, got "
                f"{tuple(static_feat.shape)} and {tuple(dynamic_feat.shape)}"
            )
        q = self.conv_q(static_feat).flatten(-2)
        k = self.conv_k(dynamic_feat).flatten(-2)
        v = self.conv_v(dynamic_feat).flatten(-2)
        return channel_attention(q, k), v

    def forward(self, static_feat: torch.Tensor, dynamic_feat: torch.Tensor) -> torch.Tensor:
        unbatched = static_feat.dim() == 3
        if unbatched:
            static_feat = static_feat.unsqueeze(0)
            dynamic_feat = dynamic_feat.unsqueeze(0)
        attn, v = self.attention(static_feat, dynamic_feat)
        fused = (attn @ v).view_as(static_feat) + static_feat
        return fused[0] if unbatched else fused


def cca_fuse(
    static_feat: torch.Tensor, dynamic_feat: torch.Tensor, fusion: CrossChannelFusion
) -> torch.Tensor:
    return fusion(static_feat, dynamic_feat)


__all__ = ["channel_attention", "CrossChannelFusion", "cca_fuse"]
