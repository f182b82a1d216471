from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Tuple

import torch

from ..errors import ShapeMismatch
from .timeline import TimelineConfig

INIT_STD = 0.02

CodeShape = Tuple[int, int, int]


def _check_grid(grid: torch.Tensor, length: int, label: str) -> None:
    if grid.dim() != 4:
        raise ShapeMismatch(f"{label} grid must be [length, h, w, dim], got {tuple(grid.shape)}")
    if grid.shape[0] != length:
        raise ShapeMismatch(f"{label} grid holds {grid.shape[0]} codes, timeline expects {length}")


@dataclass(frozen=True)
class StaticCodes:
    grid: torch.Tensor
    timeline: TimelineConfig

    def __post_init__(self) -> None:
        _check_grid(self.grid, self.timeline.static_count, "static")

    @property
    def code_shape(self) -> CodeShape:
        _, h, w, d = self.grid.shape
        return int(h), int(w), int(d)


@dataclass(frozen=True)
class DynamicCodes:
    grid: torch.Tensor
    timeline: TimelineConfig

    def __post_init__(self) -> None:
        _check_grid(self.grid, self.timeline.dynamic_count, "dynamic")

    @property
    def code_shape(self) -> CodeShape:
        _, h, w, d = self.grid.shape
        return int(h), int(w), int(d)


@dataclass(frozen=True)
class SampledCodePair:
    """Static and dynamic code of one frame position, both [h, w, dim]."""

    static_code: torch.Tensor
    dynamic_code: torch.Tensor
    t: float


def _positive_shape(shape: Sequence[int], label: str) -> CodeShape:
    dims = tuple(int(v) for v in shape)
    if len(dims) != 3 or any(v <= 0 for v in dims):
        raise ShapeMismatch(f"{label} code shape must be three positive dims, got {shape!r}")
    return dims  # type: ignore[return-value]


def init_codes(
    timeline: TimelineConfig,
    shapes: Tuple[Sequence[int], Sequence[int]],
    seed: int,
    *,
    dtype: torch.dtype = torch.float32,
) -> Tuple[StaticCodes, DynamicCodes]:
    """Draw both grids i.i.d. from N(0, 0.02^2) with a private generator."""

    static_shape = _positive_shape(shapes[0], "static")
    dynamic_shape = _positive_shape(shapes[1], "dynamic")
    gen = torch.Generator().manual_seed(int(seed))
    static = torch.randn(
        (timeline.static_count, *static_shape), generator=gen, dtype=dtype
    ) * INIT_STD
    dynamic = torch.randn(
        (timeline.dynamic_count, *dynamic_shape), generator=gen, dtype=dtype
    ) * INIT_STD
    return StaticCodes(static, timeline), DynamicCodes(dynamic, timeline)


__all__ = [
    "INIT_STD",
    "StaticCodes",
    "DynamicCodes",
    "SampledCodePair",
    "init_codes",
]
