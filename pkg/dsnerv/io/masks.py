"""Inpainting masks: dispersed boxes or one central box."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Any, List, Mapping, Tuple

import numpy as np
import torch

from ..errors import ConfigMismatch, MaskTooLarge
from .frames import FrameSequence

Box = Tuple[int, int, int, int]  # top, left, height, width

_PLACEMENT_ATTEMPTS = 1000


class MaskKind(str, Enum):
    DISPERSE = "disperse"
    CENTRAL = "central"


@dataclass(frozen=True)
class MaskSpec:
    kind: MaskKind = MaskKind.DISPERSE
    box_count: int = 5
    box_size: int = 50
    vary_per_frame: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", MaskKind(self.kind))
        if self.box_count < 1 or self.box_size < 1:
            raise ConfigMismatch("box_count and box_size must be positive")

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Any]) -> "MaskSpec":
        return cls(
            kind=MaskKind(mapping.get("kind", MaskKind.DISPERSE.value)),
            box_count=int(mapping.get("box_count", 5)),
            box_size=int(mapping.get("box_size", 50)),
            vary_per_frame=bool(mapping.get("vary_per_frame", False)),
        )

    def to_mapping(self) -> dict:
        return {
            "kind": self.kind.value,
            "box_count": self.box_count,
            "box_size": self.box_size,
            "vary_per_frame": self.vary_per_frame,
        }


def central_box(height: int, width: int) -> Box:
    box_h, box_w = max(1, height // 4), max(1, width // 4)
    return (height - box_h) // 2, (width - box_w) // 2, box_h, box_w


def _overlaps(a: Box, b: Box) -> bool:
    return not (
        a[0] + a[2] <= b[0] or b[0] + b[2] <= a[0] or a[1] + a[3] <= b[1] or b[1] + b[3] <= a[1]
    )


def disperse_boxes(spec: MaskSpec, height: int, width: int, rng: np.random.Generator) -> List[Box]:
    size = spec.box_size
    if size > height or size > width:
        raise MaskTooLarge(f"{size}x{size} boxes do not fit a {height}x{width} frame")
    boxes: List[Box] = []
    for _ in range(_PLACEMENT_ATTEMPTS):
        if len(boxes) == spec.box_count:
            break
        box = (
            int(rng.integers(0, height - size + 1)),
            int(rng.integers(0, width - size + 1)),
            size,
            size,
        )
        if not any(_overlaps(box, other) for other in boxes):
            boxes.append(box)
    if len(boxes) < spec.box_count:
        raise MaskTooLarge(
            f"cannot place {spec.box_count} disjoint {size}x{size} boxes in {height}x{width}"
        )
    return boxes


def _jittered_central(height: int, width: int, rng: np.random.Generator) -> Box:
    top, left, box_h, box_w = central_box(height, width)
    dy = int(rng.integers(-(box_h // 2), box_h // 2 + 1))
    dx = int(rng.integers(-(box_w // 2), box_w // 2 + 1))
    top = int(np.clip(top + dy, 0, height - box_h))
    left = int(np.clip(left + dx, 0, width - box_w))
    return top, left, box_h, box_w


def mask_boxes(
    spec: MaskSpec, frame_count: int, height: int, width: int, seed: int
) -> List[List[Box]]:
    """Hidden boxes of every frame; identical across frames unless ``vary_per_frame``."""

    rng = np.random.default_rng(int(seed))
    if spec.kind is MaskKind.CENTRAL:
        if height < 4 or width < 4:
            raise MaskTooLarge(f"a {height}x{width} frame is too small for a central mask")
        if spec.vary_per_frame:
            return [[_jittered_central(height, width, rng)] for _ in range(frame_count)]
        return [[central_box(height, width)]] * frame_count
    if spec.vary_per_frame:
        return [disperse_boxes(spec, height, width, rng) for _ in range(frame_count)]
    return [disperse_boxes(spec, height, width, rng)] * frame_count


def build_masks(
    spec: MaskSpec, frame_count: int, height: int, width: int, seed: int
) -> torch.Tensor:
    masks = torch.ones((frame_count, height, width), dtype=torch.float32)
    for t, boxes in enumerate(mask_boxes(spec, frame_count, height, width, seed)):
        for top, left, box_h, box_w in boxes:
            masks[t, top : top + box_h, left : left + box_w] = 0.0
    return masks


def apply_mask(seq: FrameSequence, spec: MaskSpec, seed: int) -> FrameSequence:
    height, width = seq.resolution
    masks = build_masks(spec, seq.frame_count, height, width, seed)
    if seq.masks is not None:
        masks = masks * seq.masks
    frames = seq.reference * masks.unsqueeze(-1).to(seq.frames.dtype)
    return seq.with_masks(frames, masks)


__all__ = [
    "MaskKind",
    "MaskSpec",
    "central_box",
    "disperse_boxes",
    "mask_boxes",
    "build_masks",
    "apply_mask",
]
