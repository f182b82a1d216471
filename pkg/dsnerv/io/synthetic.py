"""Deterministic desk-scale videos with a clear static/dynamic split."""
from __future__ import annotations

from enum import Enum
from typing import Any, Dict, Tuple

import numpy as np
import torch
from scipy.ndimage import gaussian_filter

from ..errors import ConfigMismatch
from .frames import FrameSequence

SQUARE_COLOR = (1.0, 0.95, 0.1)


class SynthKind(str, Enum):
    STATIC_PLUS_MOVING_SQUARE = "static_plus_moving_square"
    TEXTURED_PAN = "textured_pan"
    HIGH_MOTION_NOISE_BALL = "high_motion_noise_ball"


def smooth_texture(
    height: int, width: int, rng: np.random.Generator, sigma: float = 3.0
) -> np.ndarray:
    """Low-pass RGB noise rescaled into [0.15, 0.75] -> [H, W, 3]."""

    noise = rng.random((height, width, 3))
    smooth = gaussian_filter(noise, sigma=(sigma, sigma, 0), mode="wrap")
    lo, hi = smooth.min(), smooth.max()
    smooth = (smooth - lo) / (hi - lo) if hi > lo else np.zeros_like(smooth)
    return 0.15 + 0.6 * smooth


def square_track(
    frame_count: int, height: int, width: int, size: int, velocity: Tuple[float, float]
) -> np.ndarray:
    """Top-left corner of the square in every frame -> int array [T, 2]."""

    start = np.array([(height - size) // 2, 1], dtype=float)
    steps = np.arange(frame_count, dtype=float)[:, None] * np.asarray(velocity, dtype=float)
    corners = np.rint(start + steps).astype(int)
    corners[:, 0] = np.clip(corners[:, 0], 0, height - size)
    corners[:, 1] = np.clip(corners[:, 1], 0, width - size)
    return corners


def _moving_square(
    frame_count: int,
    height: int,
    width: int,
    rng: np.random.Generator,
    velocity: Tuple[float, float] = (0.0, 2.0),
    square_size: int | None = None,
) -> np.ndarray:
    size = int(square_size) if square_size else max(2, min(height, width) // 4)
    if size > min(height, width):
        raise ConfigMismatch(f"square_size {size} exceeds the {height}x{width} frame")
    background = smooth_texture(height, width, rng)
    frames = np.repeat(background[None], frame_count, axis=0)
    for t, (top, left) in enumerate(square_track(frame_count, height, width, size, velocity)):
        frames[t, top : top + size, left : left + size] = SQUARE_COLOR
    return frames


def _textured_pan(
    frame_count: int,
    height: int,
    width: int,
    rng: np.random.Generator,
    pan_speed: float = 1.0,
) -> np.ndarray:
    span = int(np.ceil(abs(pan_speed) * (frame_count - 1)))
    canvas = smooth_texture(height, width + span, rng, sigma=4.0)
    frames = np.empty((frame_count, height, width, 3))
    for t in range(frame_count):
        offset = int(round(abs(pan_speed) * t))
        if pan_speed < 0:
            offset = span - offset
        frames[t] = canvas[:, offset : offset + width]
    return frames


def _noise_ball(
    frame_count: int,
    height: int,
    width: int,
    rng: np.random.Generator,
    ball_radius: float | None = None,
) -> np.ndarray:
    radius = float(ball_radius) if ball_radius else max(2.0, min(height, width) / 6.0)
    background = smooth_texture(height, width, rng)
    yy, xx = np.mgrid[0:height, 0:width]
    frames = np.repeat(background[None], frame_count, axis=0)
    for t in range(frame_count):
        cy = rng.uniform(radius, max(radius, height - radius))
        cx = rng.uniform(radius, max(radius, width - radius))
        inside = (yy - cy) ** 2 + (xx - cx) ** 2 <= radius**2
        frames[t][inside] = rng.random((int(inside.sum()), 3))
    return frames


_GENERATORS = {
    SynthKind.STATIC_PLUS_MOVING_SQUARE: _moving_square,
    SynthKind.TEXTURED_PAN: _textured_pan,
    SynthKind.HIGH_MOTION_NOISE_BALL: _noise_ball,
}

_PARAMS: Dict[SynthKind, Tuple[str, ...]] = {
    SynthKind.STATIC_PLUS_MOVING_SQUARE: ("velocity", "square_size"),
    SynthKind.TEXTURED_PAN: ("pan_speed",),
    SynthKind.HIGH_MOTION_NOISE_BALL: ("ball_radius",),
}


def synth_video(
    kind: SynthKind | str,
    frame_count: int,
    height: int,
    width: int,
    seed: int,
    **params: Any,
) -> FrameSequence:
    kind = SynthKind(kind)
    unknown = set(params) - set(_PARAMS[kind])
    if unknown:
        raise ConfigMismatch(f"{kind.value} does not take {sorted(unknown)}")
    if "velocity" in params:
        params["velocity"] = tuple(float(v) for v in params["velocity"])
    rng = np.random.default_rng(int(seed))
    frames = _GENERATORS[kind](int(frame_count), int(height), int(width), rng, **params)
    tensor = torch.from_numpy(np.clip(frames, 0.0, 1.0).astype(np.float32))
    return FrameSequence(tensor, source=f"synthetic:{kind.value}")


__all__ = ["SynthKind", "SQUARE_COLOR", "smooth_texture", "square_track", "synth_video"]
