from __future__ import annotations

from typing import Optional

import torch

from ..errors import EmptyMask, ShapeMismatch


def l2_loss(
    pred: torch.Tensor, target: torch.Tensor, mask: Optional[torch.Tensor] = None
) -> torch.Tensor:
    """Mean squared error; with ``mask`` only pixels where ``mask == 1`` participate.

    Frames are ``[..., H, W, 3]``; the mask is ``[..., H, W]`` and broadcast over channels.
    """

    if pred.shape != target.shape:
        raise ShapeMismatch(f"prediction {tuple(pred.shape)} vs target {tuple(target.shape)}")
    squared = (pred - target) ** 2
    if mask is None:
        return squared.mean()
    if tuple(mask.shape) != tuple(pred.shape[:-1]):
        raise ShapeMismatch(f"mask {tuple(mask.shape)} does not cover {tuple(pred.shape[:-1])}")
    weights = mask.to(pred.dtype).unsqueeze(-1)
    count = weights.sum() * pred.shape[-1]
    if float(count) == 0.0:
        raise EmptyMask("no pixel participates in the loss")
    return (squared * weights).sum() / count


__all__ = ["l2_loss"]
