"""PSNR, MS-SSIM and bits-per-pixel."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pytorch_msssim
import torch

from ..errors import ConfigMismatch, EmptyMask, ShapeMismatch, TooSmall

PSNR_CAP = 100.0
MSE_FLOOR = 1e-10

MS_SSIM_WEIGHTS = (0.0448, 0.2856, 0.3001, 0.2363, 0.1333)
WINDOW_SIZE = 11
WINDOW_SIGMA = 1.5
K1 = 0.01
K2 = 0.03
MIN_SIDE = 10
MIN_MULTISCALE_WINDOW = 3
PACKAGE_DOWNSAMPLINGS = 4


def _check_pair(a: torch.Tensor, b: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor]:
    if a.shape != b.shape:
        raise ShapeMismatch(f"frames differ in shape: {tuple(a.shape)} vs {tuple(b.shape)}")
    return a.detach().to(torch.float64), b.detach().to(torch.float64)


def mse_to_psnr(mse: float) -> float:
    if mse < MSE_FLOOR:
        return PSNR_CAP
    return float(10.0 * math.log10(1.0 / mse))


def psnr(a: torch.Tensor, b: torch.Tensor) -> float:
    a, b = _check_pair(a, b)
    return mse_to_psnr(float(((a - b) ** 2).mean()))


def masked_psnr(a: torch.Tensor, b: torch.Tensor, mask: torch.Tensor) -> float:
    """PSNR over pixels where ``mask`` is 1; ``mask`` is ``[..., H, W]``."""

    a, b = _check_pair(a, b)
    if tuple(mask.shape) != tuple(a.shape[:-1]):
        raise ShapeMismatch(f"mask {tuple(mask.shape)} does not cover {tuple(a.shape[:-1])}")
    weights = mask.detach().to(torch.float64).unsqueeze(-1)
    count = float(weights.sum()) * a.shape[-1]
    if count == 0.0:
        raise EmptyMask("no pixel selected for PSNR")
    return mse_to_psnr(float((((a - b) ** 2) * weights).sum()) / count)


def _to_nchw(frame: torch.Tensor) -> torch.Tensor:
    if frame.dim() == 2:
        return frame[None, None]
    if frame.dim() == 3:
        return frame.permute(2, 0, 1).unsqueeze(0)
    raise ShapeMismatch(f"expected [H, W] or [H, W, C], got {tuple(frame.shape)}")


def _odd_window(limit: int) -> int:
    size = max(1, min(WINDOW_SIZE, limit))
    return size if size % 2 else size - 1


def ms_ssim_scales(height: int, width: int) -> int:
    """Largest scale count (<= 5) the frame supports.

    pytorch_msssim sizes its multi-scale window check for four downsamplings whatever the scale
    count, so frames of 32 px or less get a single scale.
    """

    side = min(height, width)
    if side < MIN_SIDE:
        raise TooSmall(f"a {height}x{width} frame is below the {MIN_SIDE}px MS-SSIM minimum")
    if side <= (MIN_MULTISCALE_WINDOW - 1) * 2**PACKAGE_DOWNSAMPLINGS:
        return 1
    scales = 2
    while scales < len(MS_SSIM_WEIGHTS) and side >= MIN_SIDE * 2**scales:
        scales += 1
    return scales


def ms_ssim_window(height: int, width: int) -> int:
    """Gaussian window size used at every scale (11 once the frame allows it)."""

    side = min(height, width)
    if ms_ssim_scales(height, width) == 1:
        return _odd_window(side)
    return _odd_window((side - 1) // 2**PACKAGE_DOWNSAMPLINGS + 1)


def ms_ssim_weights(scales: int) -> List[float]:
    weights = np.asarray(MS_SSIM_WEIGHTS[:scales], dtype=float)
    return (weights / weights.sum()).tolist()


def ms_ssim(a: torch.Tensor, b: torch.Tensor) -> float:
    """Multi-scale SSIM of two frames in [0, 1]; fewer scales on small frames."""

    a, b = _check_pair(a, b)
    x, y = _to_nchw(a), _to_nchw(b)
    height, width = (int(n) for n in x.shape[-2:])
    scales = ms_ssim_scales(height, width)
    window = ms_ssim_window(height, width)
    if scales == 1:
        value = pytorch_msssim.ssim(
            x,
            y,
            data_range=1.0,
            win_size=window,
            win_sigma=WINDOW_SIGMA,
            K=(K1, K2),
            nonnegative_ssim=True,
        )
    else:
        value = pytorch_msssim.ms_ssim(
            x,
            y,
            data_range=1.0,
            win_size=window,
            win_sigma=WINDOW_SIGMA,
            weights=ms_ssim_weights(scales),
            K=(K1, K2),
        )
    return float(min(max(float(value), 0.0), 1.0))


def bpp(compressed_bytes: int, frame_count: int, height: int, width: int) -> float:
    if frame_count <= 0 or height <= 0 or width <= 0:
        raise ConfigMismatch("bpp needs positive video dimensions")
    return compressed_bytes * 8.0 / (frame_count * height * width)


@dataclass(frozen=True)
class QualityReport:
    indices: Tuple[int, ...]
    psnr: Tuple[float, ...]
    ms_ssim: Tuple[float, ...]
    bpp: Optional[float] = None

    def __post_init__(self) -> None:
        if not len(self.indices) == len(self.psnr) == len(self.ms_ssim):
            raise ShapeMismatch("report lists must have one entry per frame")

    @property
    def frame_count(self) -> int:
        return len(self.indices)

    @property
    def mean_psnr(self) -> float:
        return float(np.mean(self.psnr)) if self.psnr else float("nan")

    @property
    def mean_ms_ssim(self) -> float:
        return float(np.mean(self.ms_ssim)) if self.ms_ssim else float("nan")


def quality_report(
    pred: torch.Tensor,
    ref: torch.Tensor,
    *,
    indices: Optional[Sequence[int]] = None,
    bpp: Optional[float] = None,
    with_ms_ssim: bool = True,
) -> QualityReport:
    """Score ``[N, H, W, 3]`` predictions frame by frame."""

    if pred.shape != ref.shape:
        raise ShapeMismatch(f"prediction {tuple(pred.shape)} vs reference {tuple(ref.shape)}")
    labels = list(indices) if indices is not None else list(range(pred.shape[0]))
    psnrs: List[float] = []
    ssims: List[float] = []
    for p, r in zip(pred, ref):
        psnrs.append(psnr(p, r))
        ssims.append(ms_ssim(p, r) if with_ms_ssim else float("nan"))
    return QualityReport(tuple(int(i) for i in labels), tuple(psnrs), tuple(ssims), bpp)


def format_report(report: QualityReport, title: str = "quality") -> str:
    lines = [f"{title}: {report.frame_count} frames"]
    lines.append(f"  PSNR     {report.mean_psnr:8.3f} dB")
    lines.append(f"  MS-SSIM  {report.mean_ms_ssim:8.5f}")
    if report.bpp is not None:
        lines.append(f"  bpp      {report.bpp:8.5f}")
    lines.append("  frame    psnr       ms_ssim")
    for index, p, s in zip(report.indices, report.psnr, report.ms_ssim):
        lines.append(f"  {index:5d}  {p:8.3f}  {s:10.5f}")
    return "\n".join(lines)


__all__ = [
    "PSNR_CAP",
    "MS_SSIM_WEIGHTS",
    "mse_to_psnr",
    "psnr",
    "masked_psnr",
    "ms_ssim_scales",
    "ms_ssim_window",
    "ms_ssim_weights",
    "ms_ssim",
    "bpp",
    "QualityReport",
    "quality_report",
    "format_report",
]
