from __future__ import annotations

from dataclasses import dataclass
from typing import Any, List, Mapping

import numpy as np

from ..errors import ConfigMismatch, DegenerateTimeline, IndexOutOfRange


@dataclass(frozen=True)
class TimelineConfig:
    """Frame count and code lengths of one represented video.

    ``static_count`` anchors are spread over the frames at ``static_interval + 1`` spacing
    with the last one pinned on the final frame; ``dynamic_count`` codes are stretched over
    the whole video by interpolation.
    """

    frame_count: int
    static_count: int
    dynamic_count: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "frame_count", int(self.frame_count))
        object.__setattr__(self, "static_count", int(self.static_count))
        object.__setattr__(self, "dynamic_count", int(self.dynamic_count))
        if self.frame_count < 2:
            raise ConfigMismatch(f"frame_count must be >= 2 (got {self.frame_count})")
        if not 2 <= self.static_count <= self.frame_count:
            raise ConfigMismatch(
                f"static_count must lie in [2, {self.frame_count}] (got {self.static_count})"
            )
        if not 1 <= self.dynamic_count <= self.frame_count:
            raise ConfigMismatch(
                f"dynamic_count must lie in [1, {self.frame_count}] (got {self.dynamic_count})"
            )

    @classmethod
    def from_static_factor(
        cls, frame_count: int, static_factor: int, dynamic_count: int
    ) -> "TimelineConfig":
        return cls(frame_count, int(static_factor) + 1, dynamic_count)

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Any]) -> "TimelineConfig":
        return cls(
            frame_count=int(mapping["frame_count"]),
            static_count=int(mapping["static_count"]),
            dynamic_count=int(mapping["dynamic_count"]),
        )

    def to_mapping(self) -> dict:
        return {
            "frame_count": self.frame_count,
            "static_count": self.static_count,
            "dynamic_count": self.dynamic_count,
        }

    @property
    def static_interval(self) -> int:
        return self.frame_count // self.static_count

    @property
    def static_factor(self) -> int:
        return self.static_count - 1

    def anchor_positions(self) -> List[int]:
        return static_anchor_positions(self)

    def check_frame(self, t: float) -> float:
        """Validate a (possibly fractional) frame position and return it as float."""

        value = float(t)
        if not np.isfinite(value) or value < 0.0 or value > self.frame_count - 1:
            raise IndexOutOfRange(
                f"frame index {t!r} outside [0, {self.frame_count - 1}]"
            )
        return value


def static_anchor_positions(timeline: TimelineConfig) -> List[int]:
    """Frame index of every static code; the last anchor sits on the final frame."""

    last = timeline.frame_count - 1
    step = timeline.static_interval + 1
    positions = [min(i * step, last) for i in range(timeline.static_count - 1)]
    positions.append(last)
    for prev, cur in zip(positions, positions[1:]):
        if cur <= prev:
            raise DegenerateTimeline(
                f"static anchors collide at frame {cur}: {timeline.static_count} static codes "
                f"do not fit {timeline.frame_count} frames"
            )
    return positions


__all__ = ["TimelineConfig", "static_anchor_positions"]
