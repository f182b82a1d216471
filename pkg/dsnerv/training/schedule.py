from __future__ import annotations

import math
from typing import Tuple

import torch
from torch.optim.lr_scheduler import LambdaLR

from .config import TrainConfig


def warmup_steps(total_steps: int, config: TrainConfig) -> int:
    return int(config.warmup_ratio * total_steps)


def lr_factor(step: int, total_steps: int, config: TrainConfig) -> float:
    """Fraction of ``base_lr`` applied at ``step``.

    Linear warmup from 0, then a cosine over ``[warmup, total_steps - 1]`` that is exactly 0 on
    the last step. The half-way value of the cosine falls at step
    ``warmup + (total_steps - 1 - warmup) / 2``, one half step before the midpoint of the
    remaining steps.
    """

    if not 0 <= step < total_steps:
        raise ValueError(f"step {step} outside [0, {total_steps})")
    warmup = warmup_steps(total_steps, config)
    if step < warmup:
        return step / warmup
    span = total_steps - 1 - warmup
    progress = (step - warmup) / span if span > 0 else 1.0
    return 0.5 * (1.0 + math.cos(math.pi * progress))


def lr_schedule(step: int, total_steps: int, config: TrainConfig) -> Tuple[float, float]:
    """``(decoder_lr, code_lr)`` at ``step``; codes run ``code_lr_multiplier`` times faster."""

    lr = config.base_lr * lr_factor(step, total_steps, config)
    return lr, lr * config.code_lr_multiplier


def build_scheduler(
    optimizer: torch.optim.Optimizer, total_steps: int, config: TrainConfig
) -> LambdaLR:
    """``LambdaLR`` driving every group along :func:`lr_factor`.

    Steps past the end hold the final (zero) rate so a trailing ``scheduler.step()`` is safe.
    """

    if total_steps < 1:
        raise ValueError(f"total_steps must be >= 1 (got {total_steps})")

    def factor(step: int) -> float:
        return lr_factor(min(step, total_steps - 1), total_steps, config)

    return LambdaLR(optimizer, lr_lambda=[factor] * len(optimizer.param_groups))


__all__ = ["warmup_steps", "lr_factor", "lr_schedule", "build_scheduler"]
