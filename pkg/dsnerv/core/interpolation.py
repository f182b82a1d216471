"""Static weighted-sum sampling and dynamic linear interpolation along the timeline."""
from __future__ import annotations

from typing import Tuple

import numpy as np
import torch
import torch.nn.functional as F

from ..errors import ShapeMismatch
from .codes import DynamicCodes, StaticCodes
from .timeline import TimelineConfig, static_anchor_positions


def _anchor_array(timeline: TimelineConfig) -> np.ndarray:
    return np.asarray(static_anchor_positions(timeline), dtype=float)


def static_weights(timeline: TimelineConfig, t: float) -> Tuple[int, int, float, float]:
    """Bracketing anchor indices ``(i, j)`` of ``t`` and their blend weights."""

    t = timeline.check_frame(t)
    anchors = _anchor_array(timeline)
    i = int(np.searchsorted(anchors, t, side="right")) - 1
    i = int(np.clip(i, 0, len(anchors) - 2))
    j = i + 1
    dis_i = abs(t - anchors[i])
    dis_j = abs(t - anchors[j])
    w_i = float(dis_j / (dis_i + dis_j))
    return i, j, w_i, 1.0 - w_i


def _as_positions(timeline: TimelineConfig, ts: torch.Tensor | float) -> torch.Tensor:
    positions = torch.as_tensor(ts, dtype=torch.float64).reshape(-1)
    for value in positions.tolist():
        timeline.check_frame(value)
    return positions


def sample_static_batch(codes: StaticCodes, ts: torch.Tensor | float) -> torch.Tensor:
    """Weighted sum of the two anchors around each position -> [B, h_s, w_s, dim_s]."""

    positions = _as_positions(codes.timeline, ts)
    anchors = torch.as_tensor(_anchor_array(codes.timeline), dtype=torch.float64)
    i = torch.searchsorted(anchors, positions, right=True) - 1
    i = i.clamp(0, anchors.numel() - 2)
    j = i + 1
    dis_i = (positions - anchors[i]).abs()
    dis_j = (positions - anchors[j]).abs()
    w_i = dis_j / (dis_i + dis_j)
    w_j = 1.0 - w_i
    grid = codes.grid
    w_i = w_i.to(grid.dtype).view(-1, 1, 1, 1)
    w_j = w_j.to(grid.dtype).view(-1, 1, 1, 1)
    return grid[i] * w_i + grid[j] * w_j


def sample_static(codes: StaticCodes, t: float) -> torch.Tensor:
    return sample_static_batch(codes, t)[0]


def interpolate_dynamic(codes: DynamicCodes) -> torch.Tensor:
    """Stretch the dynamic grid to one code per frame -> [T, h_d, w_d, dim_d]."""

    grid = codes.grid
    if grid.dim() != 4:
        raise ShapeMismatch(f"dynamic grid must be rank 4, got {tuple(grid.shape)}")
    length, h, w, d = grid.shape
    frames = codes.timeline.frame_count
    series = grid.permute(1, 2, 3, 0).reshape(1, h * w * d, length)
    stretched = F.interpolate(series, size=frames, mode="linear", align_corners=True)
    return stretched.reshape(h, w, d, frames).permute(3, 0, 1, 2)


def sample_dynamic_batch(codes: DynamicCodes, ts: torch.Tensor | float) -> torch.Tensor:
    """Slices of :func:`interpolate_dynamic` at each position, computed directly."""

    timeline = codes.timeline
    positions = _as_positions(timeline, ts)
    grid = codes.grid
    length = grid.shape[0]
    if length == 1:
        return grid[[0] * positions.numel()]
    source = positions * (length - 1) / (timeline.frame_count - 1)
    lo = source.floor().long().clamp(0, length - 2)
    lam = (source - lo.to(torch.float64)).to(grid.dtype).view(-1, 1, 1, 1)
    return grid[lo] * (1.0 - lam) + grid[lo + 1] * lam


def sample_dynamic(codes: DynamicCodes, t: float) -> torch.Tensor:
    return sample_dynamic_batch(codes, t)[0]


__all__ = [
    "static_weights",
    "sample_static",
    "sample_static_batch",
    "interpolate_dynamic",
    "sample_dynamic",
    "sample_dynamic_batch",
]
