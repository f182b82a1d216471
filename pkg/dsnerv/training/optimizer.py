"""Adan (adaptive Nesterov momentum) with decoupled, proximal weight decay."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence, Tuple

import torch
from torch import nn

from ..errors import NonFiniteGradient
from .config import TrainConfig


@dataclass
class AdanState:
    step: int
    exp_avg: torch.Tensor
    exp_avg_diff: torch.Tensor
    exp_avg_sq: torch.Tensor
    pre_grad: torch.Tensor

    @classmethod
    def zeros_like(cls, param: torch.Tensor) -> "AdanState":
        return cls(
            0,
            torch.zeros_like(param),
            torch.zeros_like(param),
            torch.zeros_like(param),
            torch.zeros_like(param),
        )


@torch.no_grad()
def adan_step(
    param: torch.Tensor,
    grad: torch.Tensor,
    state: AdanState,
    *,
    lr: float,
    betas: Tuple[float, float, float],
    weight_decay: float,
    eps: float,
) -> None:
    """One in-place Adan update of ``param``; ``state`` is advanced alongside.

    On the first step the previous gradient is taken to be the current one.
    """

    if not bool(torch.isfinite(grad).all()):
        raise NonFiniteGradient("gradient contains NaN or Inf")
    beta1, beta2, beta3 = betas
    if state.step == 0:
        state.pre_grad.copy_(grad)
    state.step += 1
    bias_correction1 = 1.0 - beta1**state.step
    bias_correction2 = 1.0 - beta2**state.step
    bias_correction3 = 1.0 - beta3**state.step

    grad_diff = grad - state.pre_grad
    state.exp_avg.lerp_(grad, 1.0 - beta1)
    state.exp_avg_diff.lerp_(grad_diff, 1.0 - beta2)
    nesterov = grad + beta2 * grad_diff
    state.exp_avg_sq.mul_(beta3).addcmul_(nesterov, nesterov, value=1.0 - beta3)

    denom = (state.exp_avg_sq / bias_correction3).sqrt().add_(eps)
    momentum = state.exp_avg / bias_correction1 + beta2 * state.exp_avg_diff / bias_correction2
    update = momentum / denom
    param.add_(update, alpha=-lr)
    param.div_(1.0 + lr * weight_decay)
    state.pre_grad.copy_(grad)


class Adan(torch.optim.Optimizer):
    def __init__(
        self,
        params: Iterable,
        lr: float = 1e-3,
        betas: Tuple[float, float, float] = (0.98, 0.92, 0.99),
        eps: float = 1e-8,
        weight_decay: float = 0.0,
    ) -> None:
        if lr < 0.0:
            raise ValueError(f"Invalid learning rate: {lr}")
        if eps < 0.0:
            raise ValueError(f"Invalid epsilon value: {eps}")
        for index, beta in enumerate(betas):
            if not 0.0 <= beta < 1.0:
                raise ValueError(f"Invalid beta parameter at index {index}: {beta}")
        defaults = dict(lr=lr, betas=tuple(betas), eps=eps, weight_decay=weight_decay)
        super().__init__(params, defaults)

    @torch.no_grad()
    def step(self, closure=None):
        loss = None
        if closure is not None:
            with torch.enable_grad():
                loss = closure()
        for group in self.param_groups:
            for p in group["params"]:
                if p.grad is None:
                    continue
                state = self.state[p]
                if "adan" not in state:
                    state["adan"] = AdanState.zeros_like(p)
                adan_step(
                    p,
                    p.grad,
                    state["adan"],
                    lr=group["lr"],
                    betas=group["betas"],
                    weight_decay=group["weight_decay"],
                    eps=group["eps"],
                )
        return loss


def parameter_groups(model: nn.Module) -> List[Dict]:
    """Split parameters into the ``codes`` group (grids) and the ``decoder`` group."""

    codes, decoder = [], []
    for name, param in model.named_parameters():
        (codes if name.startswith("codes.") else decoder).append(param)
    return [{"params": decoder, "name": "decoder"}, {"params": codes, "name": "codes"}]


def build_optimizer(model: nn.Module, config: TrainConfig) -> Adan:
    """Adan over both groups; the ``codes`` group starts at ``code_lr_multiplier`` x ``base_lr``."""

    groups = parameter_groups(model)
    for group in groups:
        scale = config.code_lr_multiplier if group["name"] == "codes" else 1.0
        group["lr"] = config.base_lr * scale
    return Adan(
        groups,
        lr=config.base_lr,
        betas=config.betas,
        eps=config.epsilon,
        weight_decay=config.weight_decay,
    )


def optimizer_step(
    params: Sequence[torch.Tensor],
    grads: Sequence[torch.Tensor],
    states: List[AdanState],
    lrs: Sequence[float],
    config: TrainConfig,
) -> List[AdanState]:
    """Functional form: update each tensor with its own rate; states are created lazily."""

    if not (len(params) == len(grads) == len(lrs)):
        raise ValueError("params, grads and lrs must have equal length")
    while len(states) < len(params):
        states.append(AdanState.zeros_like(params[len(states)]))
    for param, grad, state, lr in zip(params, grads, states, lrs):
        if param.shape != grad.shape:
            raise ValueError(f"gradient {tuple(grad.shape)} for parameter {tuple(param.shape)}")
        adan_step(
            param,
            grad,
            state,
            lr=float(lr),
            betas=config.betas,
            weight_decay=config.weight_decay,
            eps=config.epsilon,
        )
    return states


__all__ = [
    "AdanState",
    "adan_step",
    "Adan",
    "parameter_groups",
    "build_optimizer",
    "optimizer_step",
]
