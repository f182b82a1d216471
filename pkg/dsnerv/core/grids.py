from __future__ import annotations

from typing import Sequence, Tuple

import torch
from torch import nn

from .codes import DynamicCodes, StaticCodes, init_codes
from .sampler import sample_code_batch
from .timeline import TimelineConfig, static_anchor_positions


class CodeGrids(nn.Module):
    """The static and dynamic grids as trainable parameters."""

    def __init__(
        self,
        timeline: TimelineConfig,
        static_shape: Sequence[int],
        dynamic_shape: Sequence[int],
        seed: int = 0,
    ) -> None:
        super().__init__()
        static_anchor_positions(timeline)
        self.timeline = timeline
        static, dynamic = init_codes(timeline, (static_shape, dynamic_shape), seed)
        self.static_grid = nn.Parameter(static.grid)
        self.dynamic_grid = nn.Parameter(dynamic.grid)

    @property
    def static(self) -> StaticCodes:
        return StaticCodes(self.static_grid, self.timeline)

    @property
    def dynamic(self) -> DynamicCodes:
        return DynamicCodes(self.dynamic_grid, self.timeline)

    def forward(self, ts: torch.Tensor | float) -> Tuple[torch.Tensor, torch.Tensor]:
        return sample_code_batch(self.static, self.dynamic, ts)


__all__ = ["CodeGrids"]
