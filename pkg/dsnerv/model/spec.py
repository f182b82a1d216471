"""Layout of the fusion decoder and of a whole representation."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, List, Mapping, Tuple

from ..core.timeline import TimelineConfig, static_anchor_positions
from ..errors import ConfigMismatch


@dataclass(frozen=True)
class NervBlockSpec:
    in_channels: int
    out_channels: int
    upscale: int = 1
    kernel_size: int = 3

    def __post_init__(self) -> None:
        if self.in_channels < 1 or self.out_channels < 1:
            raise ConfigMismatch("NeRV block channels must be positive")
        if self.upscale < 1:
            raise ConfigMismatch(f"upscale must be >= 1 (got {self.upscale})")
        if self.kernel_size < 1 or self.kernel_size % 2 == 0:
            raise ConfigMismatch(
                f"kernel_size must be a positive odd integer (got {self.kernel_size})"
            )

    @property
    def conv_channels(self) -> int:
        return self.out_channels * self.upscale**2


def _shape3(value: Any, label: str) -> Tuple[int, int, int]:
    dims = tuple(int(v) for v in value)
    if len(dims) != 3 or any(v <= 0 for v in dims):
        raise ConfigMismatch(f"{label} must be three positive dims, got {value!r}")
    return dims  # type: ignore[return-value]


@dataclass(frozen=True)
class FusionDecoderSpec:
    static_shape: Tuple[int, int, int]
    dynamic_shape: Tuple[int, int, int]
    output_size: Tuple[int, int]
    c1: int
    ch_min: int
    strides: Tuple[int, ...]
    channel_reduction: float = 1.2
    kernel_min: int = 1
    kernel_max: int = 5
    head_kernel: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "static_shape", _shape3(self.static_shape, "static_shape"))
        object.__setattr__(self, "dynamic_shape", _shape3(self.dynamic_shape, "dynamic_shape"))
        object.__setattr__(self, "output_size", tuple(int(v) for v in self.output_size))
        object.__setattr__(self, "strides", tuple(int(s) for s in self.strides))
        object.__setattr__(self, "channel_reduction", float(self.channel_reduction))
        self.validate()

    def validate(self) -> None:
        if len(self.output_size) != 2 or min(self.output_size) <= 0:
            raise ConfigMismatch(f"output_size must be (H, W), got {self.output_size!r}")
        if self.c1 < 1 or self.ch_min < 1:
            raise ConfigMismatch("c1 and ch_min must be positive")
        if not self.strides or any(s < 1 for s in self.strides):
            raise ConfigMismatch(
                f"strides must be a non-empty list of integers >= 1, got {self.strides!r}"
            )
        if self.channel_reduction <= 1.0:
            raise ConfigMismatch(f"channel_reduction must exceed 1 (got {self.channel_reduction})")
        for name in ("kernel_min", "kernel_max", "head_kernel"):
            k = getattr(self, name)
            if k < 1 or k % 2 == 0:
                raise ConfigMismatch(f"{name} must be a positive odd integer (got {k})")
        if self.kernel_max < self.kernel_min:
            raise ConfigMismatch("kernel_max must be >= kernel_min")

        h_s, w_s, _ = self.static_shape
        h_d, w_d, _ = self.dynamic_shape
        first = self.strides[0]
        if h_s * first != h_d or w_s * first != w_d:
            raise ConfigMismatch(
                f"stride chain: static {h_s}x{w_s} * strides[0]={first} "
                f"must equal dynamic {h_d}x{w_d}"
            )
        rest = math.prod(self.strides[1:])
        height, width = self.output_size
        if h_d * rest != height or w_d * rest != width:
            raise ConfigMismatch(
                f"stride chain: dynamic {h_d}x{w_d} * prod(strides[1:])={rest} "
                f"must equal output {height}x{width}"
            )

    def channel_width(self, k: int) -> int:
        """Output width of decoder layer ``k`` (0 = the two align blocks)."""

        if k == 0:
            return self.c1
        return max(self.ch_min, int(round(self.c1 / self.channel_reduction**k)))

    def kernel_size(self, k: int) -> int:
        return min(self.kernel_min + 2 * k, self.kernel_max)

    def static_align_block(self) -> NervBlockSpec:
        return NervBlockSpec(self.static_shape[2], self.c1, self.strides[0], self.kernel_size(0))

    def dynamic_align_block(self) -> NervBlockSpec:
        return NervBlockSpec(self.dynamic_shape[2], self.c1, 1, self.kernel_min)

    def upsample_blocks(self) -> List[NervBlockSpec]:
        blocks: List[NervBlockSpec] = []
        for k, stride in enumerate(self.strides[1:], start=1):
            blocks.append(
                NervBlockSpec(
                    self.channel_width(k - 1),
                    self.channel_width(k),
                    stride,
                    self.kernel_size(k),
                )
            )
        return blocks

    @property
    def head_channels(self) -> int:
        return self.channel_width(len(self.strides) - 1)

    def to_mapping(self) -> dict:
        return {
            "static_shape": list(self.static_shape),
            "dynamic_shape": list(self.dynamic_shape),
            "output_size": list(self.output_size),
            "c1": self.c1,
            "ch_min": self.ch_min,
            "strides": list(self.strides),
            "channel_reduction": self.channel_reduction,
            "kernel_min": self.kernel_min,
            "kernel_max": self.kernel_max,
            "head_kernel": self.head_kernel,
        }

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Any]) -> "FusionDecoderSpec":
        return cls(
            static_shape=tuple(mapping["static_shape"]),
            dynamic_shape=tuple(mapping["dynamic_shape"]),
            output_size=tuple(mapping["output_size"]),
            c1=int(mapping["c1"]),
            ch_min=int(mapping["ch_min"]),
            strides=tuple(mapping["strides"]),
            channel_reduction=float(mapping.get("channel_reduction", 1.2)),
            kernel_min=int(mapping.get("kernel_min", 1)),
            kernel_max=int(mapping.get("kernel_max", 5)),
            head_kernel=int(mapping.get("head_kernel", 1)),
        )


@dataclass(frozen=True)
class ModelSpec:
    """Everything needed to rebuild a representation without its training data."""

    timeline: TimelineConfig
    decoder: FusionDecoderSpec
    seed: int = field(default=0, compare=False)

    def __post_init__(self) -> None:
        static_anchor_positions(self.timeline)

    @property
    def frame_shape(self) -> Tuple[int, int, int]:
        height, width = self.decoder.output_size
        return height, width, 3

    def to_mapping(self) -> dict:
        return {
            "timeline": self.timeline.to_mapping(),
            "decoder": self.decoder.to_mapping(),
            "seed": self.seed,
        }

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Any]) -> "ModelSpec":
        return cls(
            timeline=TimelineConfig.from_mapping(mapping["timeline"]),
            decoder=FusionDecoderSpec.from_mapping(mapping["decoder"]),
            seed=int(mapping.get("seed", 0)),
        )


__all__ = ["NervBlockSpec", "FusionDecoderSpec", "ModelSpec"]
