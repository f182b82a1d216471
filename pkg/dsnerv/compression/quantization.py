"""Per-tensor affine min-max quantization."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np
import torch

from ..errors import ConfigMismatch, NonFiniteInput

MIN_BITS = 2
MAX_BITS = 16


def _f32_floor(value: float) -> float:
    lo = np.float32(value)
    if float(lo) > value:
        lo = np.nextafter(lo, np.float32(-np.inf))
    return float(lo)


def _f32_ceil(value: float) -> float:
    hi = np.float32(value)
    if float(hi) < value:
        hi = np.nextafter(hi, np.float32(np.inf))
    return float(hi)


@dataclass(frozen=True)
class QuantSpec:
    """Range and bit depth of one tensor.

    A spread range has its bounds rounded outward to float32; a constant is kept as given.
    """

    minimum: float
    maximum: float
    bits: int

    def __post_init__(self) -> None:
        if not MIN_BITS <= self.bits <= MAX_BITS:
            raise ConfigMismatch(f"bits must lie in [{MIN_BITS}, {MAX_BITS}] (got {self.bits})")
        if self.maximum < self.minimum:
            raise ConfigMismatch("quantization range is inverted")

    @property
    def levels(self) -> int:
        return 2**self.bits

    @property
    def is_constant(self) -> bool:
        return self.maximum == self.minimum

    @property
    def scale(self) -> float:
        if self.is_constant:
            return 1.0
        return (self.maximum - self.minimum) / (self.levels - 1)


def quant_spec(tensor: torch.Tensor, bits: int) -> QuantSpec:
    values = tensor.detach().to(torch.float64)
    if values.numel() == 0:
        return QuantSpec(0.0, 0.0, bits)
    if not bool(torch.isfinite(values).all()):
        raise NonFiniteInput("cannot quantize a tensor holding NaN or Inf")
    lo, hi = float(values.min()), float(values.max())
    if lo == hi:
        return QuantSpec(lo, lo, bits)
    return QuantSpec(_f32_floor(lo), _f32_ceil(hi), bits)


def quantize_with(tensor: torch.Tensor, spec: QuantSpec) -> torch.Tensor:
    if spec.is_constant:
        return torch.zeros(tensor.shape, dtype=torch.int64)
    values = tensor.detach().to(torch.float64)
    codes = torch.round((values - spec.minimum) / spec.scale)
    return codes.clamp(0, spec.levels - 1).to(torch.int64)


def quantize(tensor: torch.Tensor, bits: int) -> Tuple[torch.Tensor, QuantSpec]:
    spec = quant_spec(tensor, bits)
    return quantize_with(tensor, spec), spec


def dequantize(
    codes: torch.Tensor, spec: QuantSpec, dtype: torch.dtype = torch.float64
) -> torch.Tensor:
    """Code ``k`` becomes level ``k`` of ``torch.linspace(minimum, maximum, 2**bits)``."""

    if spec.is_constant:
        return torch.full(tuple(codes.shape), spec.minimum, dtype=dtype)
    levels = torch.linspace(spec.minimum, spec.maximum, spec.levels, dtype=dtype)
    return levels[codes.to(torch.int64)]


__all__ = [
    "MIN_BITS",
    "MAX_BITS",
    "QuantSpec",
    "quant_spec",
    "quantize_with",
    "quantize",
    "dequantize",
]
