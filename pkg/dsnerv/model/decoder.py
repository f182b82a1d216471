"""The DS-NeRV representation: code grids plus the fusion decoder."""
from __future__ import annotations

import logging
from typing import Dict, Iterable, Tuple

import numpy as np
import torch
from torch import nn

from ..core.codes import SampledCodePair
from ..core.grids import CodeGrids
from ..errors import ShapeMismatch
from .blocks import NervBlock
from .fusion import CrossChannelFusion
from .spec import ModelSpec

logger = logging.getLogger(__name__)

CODE_PREFIX = "codes."


class DSNeRV(nn.Module):
    """Maps a frame position to an RGB frame [H, W, 3] in [0, 1]."""

    def __init__(self, spec: ModelSpec) -> None:
        super().__init__()
        self.spec = spec
        dec = spec.decoder
        with torch.random.fork_rng(devices=[]):
            torch.manual_seed(spec.seed)
            self.codes = CodeGrids(spec.timeline, dec.static_shape, dec.dynamic_shape, spec.seed)
            self.static_align = NervBlock(dec.static_align_block())
            self.dynamic_align = NervBlock(dec.dynamic_align_block())
            self.fusion = CrossChannelFusion(dec.c1)
            self.blocks = nn.ModuleList(NervBlock(block) for block in dec.upsample_blocks())
            self.head = nn.Conv2d(
                dec.head_channels, 3, dec.head_kernel, padding=dec.head_kernel // 2, bias=True
            )
            # start mid-range so the output clamp does not swallow the first gradients
            nn.init.constant_(self.head.bias, 0.5)

    @property
    def timeline(self):
        return self.spec.timeline

    def align(
        self, static_code: torch.Tensor, dynamic_code: torch.Tensor
    ) -> Tuple[torch.Tensor, torch.Tensor]:
        """[B, h, w, dim] codes -> two [B, c1, h_d, w_d] features."""

        static_feat = self.static_align(static_code.permute(0, 3, 1, 2))
        dynamic_feat = self.dynamic_align(dynamic_code.permute(0, 3, 1, 2))
        if static_feat.shape != dynamic_feat.shape:
            raise ShapeMismatch(
                f"aligned features differ: {tuple(static_feat.shape)} "
                f"vs {tuple(dynamic_feat.shape)}"
            )
        return static_feat, dynamic_feat

    def decode_codes(self, static_code: torch.Tensor, dynamic_code: torch.Tensor) -> torch.Tensor:
        static_feat, dynamic_feat = self.align(static_code, dynamic_code)
        x = self.fusion(static_feat, dynamic_feat)
        for block in self.blocks:
            x = block(x)
        x = self.head(x).clamp(0.0, 1.0)
        return x.permute(0, 2, 3, 1)

    def forward(self, ts: torch.Tensor | float) -> torch.Tensor:
        static_code, dynamic_code = self.codes(ts)
        return self.decode_codes(static_code, dynamic_code)


def align_codes(pair: SampledCodePair, model: DSNeRV) -> Tuple[torch.Tensor, torch.Tensor]:
    dec = model.spec.decoder
    if tuple(pair.static_code.shape) != dec.static_shape:
        raise ShapeMismatch(f"static code {tuple(pair.static_code.shape)} != {dec.static_shape}")
    if tuple(pair.dynamic_code.shape) != dec.dynamic_shape:
        raise ShapeMismatch(f"dynamic code {tuple(pair.dynamic_code.shape)} != {dec.dynamic_shape}")
    static_feat, dynamic_feat = model.align(
        pair.static_code.unsqueeze(0), pair.dynamic_code.unsqueeze(0)
    )
    return static_feat[0], dynamic_feat[0]


def decode_frame(model: DSNeRV, t: float) -> torch.Tensor:
    return model(t)[0]


@torch.no_grad()
def render_frames(
    model: DSNeRV, times: Iterable[float] | np.ndarray, *, chunk: int = 8
) -> torch.Tensor:
    """Decode many (possibly fractional) positions -> [N, H, W, 3]."""

    positions = [float(t) for t in np.asarray(list(times), dtype=float).reshape(-1)]
    height, width, _ = model.spec.frame_shape
    if not positions:
        return torch.zeros((0, height, width, 3))
    frames = [
        model(torch.tensor(positions[start : start + chunk], dtype=torch.float64))
        for start in range(0, len(positions), max(1, int(chunk)))
    ]
    return torch.cat(frames, dim=0)


@torch.no_grad()
def decode_components(model: DSNeRV, t: float) -> Tuple[torch.Tensor, torch.Tensor]:
    """Frames decoded from the static code alone and from the dynamic code alone."""

    static_code, dynamic_code = model.codes(t)
    static_only = model.decode_codes(static_code, torch.zeros_like(dynamic_code))
    dynamic_only = model.decode_codes(torch.zeros_like(static_code), dynamic_code)
    return static_only[0], dynamic_only[0]


def param_breakdown(model: nn.Module) -> Dict[str, int]:
    counts = {"static_codes": 0, "dynamic_codes": 0, "decoder": 0}
    for name, param in model.named_parameters():
        if name == CODE_PREFIX + "static_grid":
            counts["static_codes"] += param.numel()
        elif name == CODE_PREFIX + "dynamic_grid":
            counts["dynamic_codes"] += param.numel()
        else:
            counts["decoder"] += param.numel()
    return counts


def param_count(model: nn.Module) -> int:
    return int(sum(p.numel() for p in model.parameters()))


def build_model(spec: ModelSpec) -> DSNeRV:
    model = DSNeRV(spec)
    logger.debug("built model with %d parameters", param_count(model))
    return model


__all__ = [
    "CODE_PREFIX",
    "DSNeRV",
    "align_codes",
    "decode_frame",
    "render_frames",
    "decode_components",
    "param_breakdown",
    "param_count",
    "build_model",
]
