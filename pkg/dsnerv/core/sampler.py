from __future__ import annotations

from typing import List, Tuple

import numpy as np
import torch

from .codes import DynamicCodes, SampledCodePair, StaticCodes
from .interpolation import sample_dynamic_batch, sample_static_batch
from .timeline import TimelineConfig


def sample_code_pair(static: StaticCodes, dynamic: DynamicCodes, t: float) -> SampledCodePair:
    static_code, dynamic_code = sample_code_batch(static, dynamic, t)
    return SampledCodePair(static_code[0], dynamic_code[0], float(t))


def sample_code_batch(
    static: StaticCodes, dynamic: DynamicCodes, ts: torch.Tensor | float
) -> Tuple[torch.Tensor, torch.Tensor]:
    return sample_static_batch(static, ts), sample_dynamic_batch(dynamic, ts)


def frame_positions(timeline: TimelineConfig, factor: int = 1) -> np.ndarray:
    """Positions covering the video with ``factor`` samples per frame interval.

    ``factor=1`` yields the integer frame indices; larger factors add evenly spaced
    fractional positions between neighbours (frame-rate up-conversion).
    """

    factor = max(1, int(factor))
    n = (timeline.frame_count - 1) * factor + 1
    ts = np.linspace(0.0, timeline.frame_count - 1, n)
    return np.clip(ts, 0.0, timeline.frame_count - 1)


def even_odd_split(frame_count: int) -> Tuple[List[int], List[int]]:
    return list(range(0, frame_count, 2)), list(range(1, frame_count, 2))


__all__ = ["sample_code_pair", "sample_code_batch", "frame_positions", "even_odd_split"]
