from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Mapping, Optional, Tuple

from ..core.sampler import even_odd_split
from ..errors import ConfigMismatch
from ..io.masks import MaskSpec


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 300
    base_lr: float = 7e-3
    code_lr_multiplier: float = 10.0
    betas: Tuple[float, float, float] = (0.98, 0.92, 0.99)
    weight_decay: float = 0.02
    warmup_ratio: float = 0.2
    batch_size: int = 1
    seed: int = 0
    eval_every: int = 1
    epsilon: float = 1e-8
    progress: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        if self.epochs < 1:
            raise ConfigMismatch(f"epochs must be >= 1 (got {self.epochs})")
        if self.base_lr <= 0:
            raise ConfigMismatch(f"base_lr must be positive (got {self.base_lr})")
        if not 0.0 < self.warmup_ratio < 1.0:
            raise ConfigMismatch(f"warmup_ratio must lie in (0, 1) (got {self.warmup_ratio})")
        if len(self.betas) != 3 or not all(0.0 <= b < 1.0 for b in self.betas):
            raise ConfigMismatch(f"betas must be three values in [0, 1) (got {self.betas})")
        if self.batch_size < 1 or self.eval_every < 1:
            raise ConfigMismatch("batch_size and eval_every must be >= 1")
        if self.weight_decay < 0 or self.epsilon < 0 or self.code_lr_multiplier <= 0:
            raise ConfigMismatch("weight_decay/epsilon must be >= 0, code_lr_multiplier > 0")

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Any]) -> "TrainConfig":
        defaults = cls()
        values = {name: mapping[name] for name in cls.__dataclass_fields__ if name in mapping}
        return replace(defaults, **values)

    def to_mapping(self) -> dict:
        return {name: getattr(self, name) for name in self.__dataclass_fields__}


class TaskKind(str, Enum):
    RECONSTRUCTION = "reconstruction"
    INTERPOLATION = "interpolation"
    INPAINTING = "inpainting"


@dataclass(frozen=True)
class TaskSpec:
    kind: TaskKind
    train_indices: Tuple[int, ...]
    eval_indices: Tuple[int, ...]
    mask: Optional[MaskSpec] = field(default=None)

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", TaskKind(self.kind))
        if not self.train_indices or not self.eval_indices:
            raise ConfigMismatch("a task needs non-empty train and eval index sets")
        if self.kind is TaskKind.INPAINTING and self.mask is None:
            raise ConfigMismatch("inpainting needs a mask spec")

    @classmethod
    def reconstruction(cls, frame_count: int) -> "TaskSpec":
        indices = tuple(range(frame_count))
        return cls(TaskKind.RECONSTRUCTION, indices, indices)

    @classmethod
    def interpolation(cls, frame_count: int) -> "TaskSpec":
        even, odd = even_odd_split(frame_count)
        return cls(TaskKind.INTERPOLATION, tuple(even), tuple(odd))

    @classmethod
    def inpainting(cls, frame_count: int, mask: MaskSpec) -> "TaskSpec":
        indices = tuple(range(frame_count))
        return cls(TaskKind.INPAINTING, indices, indices, mask)

    @classmethod
    def for_kind(
        cls, kind: TaskKind | str, frame_count: int, mask: Optional[MaskSpec] = None
    ) -> "TaskSpec":
        kind = TaskKind(kind)
        if kind is TaskKind.INTERPOLATION:
            return cls.interpolation(frame_count)
        if kind is TaskKind.INPAINTING:
            return cls.inpainting(frame_count, mask or MaskSpec())
        return cls.reconstruction(frame_count)

    def check_frames(self, frame_count: int) -> None:
        for index in (*self.train_indices, *self.eval_indices):
            if not 0 <= index < frame_count:
                raise ConfigMismatch(f"task index {index} outside a {frame_count}-frame video")


__all__ = ["TrainConfig", "TaskKind", "TaskSpec"]
