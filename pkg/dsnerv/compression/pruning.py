"""Global magnitude pruning of decoder weights."""
from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional

import torch
from torch import nn

from ..errors import ConfigMismatch
from ..model.decoder import CODE_PREFIX

ParameterStore = Dict[str, torch.Tensor]


@dataclass(frozen=True)
class PruneResult:
    store: ParameterStore
    masks: Dict[str, torch.Tensor]
    sparsity: float

    @property
    def pruned_count(self) -> int:
        return int(sum(int((~mask).sum()) for mask in self.masks.values()))


def parameter_store(model: nn.Module) -> ParameterStore:
    """Detached copies of every parameter, keyed by name in module order."""

    return OrderedDict((name, p.detach().clone()) for name, p in model.named_parameters())


def prunable_names(store: ParameterStore) -> List[str]:
    """Decoder convolution weights; code grids and biases are exempt."""

    return sorted(
        name
        for name in store
        if name.endswith("weight") and not name.startswith(CODE_PREFIX)
    )


def prune(
    store: ParameterStore, sparsity: float, names: Optional[Iterable[str]] = None
) -> PruneResult:
    """Zero the smallest-magnitude ``sparsity`` fraction of the prunable weights.

    Equal magnitudes are taken in name order, then flat index order.
    """

    if not 0.0 <= sparsity < 1.0:
        raise ConfigMismatch(f"sparsity must lie in [0, 1) (got {sparsity})")
    selected = sorted(names) if names is not None else prunable_names(store)
    pruned: ParameterStore = OrderedDict((name, t.clone()) for name, t in store.items())
    masks = {name: torch.ones_like(store[name], dtype=torch.bool) for name in selected}
    total = sum(store[name].numel() for name in selected)
    k = int(round(sparsity * total))
    if k == 0 or total == 0:
        return PruneResult(pruned, masks, 0.0)

    magnitudes = torch.cat([store[name].detach().reshape(-1).abs().double() for name in selected])
    order = torch.sort(magnitudes, stable=True).indices[:k]
    flat_keep = torch.ones(total, dtype=torch.bool)
    flat_keep[order] = False
    offset = 0
    for name in selected:
        size = store[name].numel()
        keep = flat_keep[offset : offset + size].view_as(store[name])
        masks[name] = keep
        pruned[name] = torch.where(keep, store[name], torch.zeros_like(store[name]))
        offset += size
    return PruneResult(pruned, masks, k / total)


__all__ = ["ParameterStore", "PruneResult", "parameter_store", "prunable_names", "prune"]
