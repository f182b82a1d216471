"""Frame sequences and image-sequence directories."""
from __future__ import annotations

import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import imageio.v3 as iio
import numpy as np
import torch
from PIL import Image

from ..errors import (
    EmptyDirectory,
    InconsistentResolution,
    InvalidFrames,
    IoFailure,
    ShapeMismatch,
    UnreadableFile,
)

logger = logging.getLogger(__name__)

FRAME_EXTENSIONS = (".png", ".bmp", ".tif", ".tiff", ".ppm", ".jpg", ".jpeg")
FRAME_NAME_FORMAT = "{:05d}"


@dataclass(frozen=True)
class FrameSequence:
    """Video frames ``[T, H, W, 3]`` in [0, 1].

    ``masks`` (``[T, H, W]`` of {0, 1}, 1 = visible) and ``clean_frames`` (the unmasked
    originals) are set once a mask has been applied.
    """

    frames: torch.Tensor
    source: str = ""
    masks: Optional[torch.Tensor] = None
    clean_frames: Optional[torch.Tensor] = None

    def __post_init__(self) -> None:
        frames = self.frames
        if frames.dim() != 4 or frames.shape[-1] != 3:
            raise ShapeMismatch(f"frames must be [T, H, W, 3], got {tuple(frames.shape)}")
        if frames.shape[0] < 2:
            raise InvalidFrames(f"a video needs at least 2 frames (got {frames.shape[0]})")
        if not bool(torch.isfinite(frames).all()):
            raise InvalidFrames("frames contain non-finite values")
        if float(frames.min()) < 0.0 or float(frames.max()) > 1.0:
            raise InvalidFrames("frame values must lie in [0, 1]")
        if self.masks is not None and tuple(self.masks.shape) != tuple(frames.shape[:3]):
            raise ShapeMismatch(
                f"masks must be {tuple(frames.shape[:3])}, got {tuple(self.masks.shape)}"
            )
        if self.clean_frames is not None and self.clean_frames.shape != frames.shape:
            raise ShapeMismatch("clean_frames must match frames")

    @property
    def frame_count(self) -> int:
        return int(self.frames.shape[0])

    @property
    def resolution(self) -> Tuple[int, int]:
        return int(self.frames.shape[1]), int(self.frames.shape[2])

    @property
    def reference(self) -> torch.Tensor:
        """Frames to score against: the clean originals when masked."""

        return self.clean_frames if self.clean_frames is not None else self.frames

    def with_masks(self, frames: torch.Tensor, masks: torch.Tensor) -> "FrameSequence":
        return replace(self, frames=frames, masks=masks, clean_frames=self.reference)


def _frame_number(path: Path) -> Tuple[int, str]:
    digits = re.findall(r"\d+", path.stem)
    return (int(digits[-1]) if digits else -1, path.name)


def list_frame_files(directory: str | Path, extension: Optional[str] = None) -> List[Path]:
    root = Path(directory)
    if not root.is_dir():
        raise EmptyDirectory(f"frame directory not found: {root}")
    if extension:
        suffixes: Tuple[str, ...] = ("." + extension.lower().lstrip("."),)
    else:
        suffixes = FRAME_EXTENSIONS
    files = [p for p in root.iterdir() if p.is_file() and p.suffix.lower() in suffixes]
    if not files:
        raise EmptyDirectory(f"no frame files in {root}")
    return sorted(files, key=_frame_number)


def _read_rgb(path: Path) -> np.ndarray:
    try:
        image = np.asarray(iio.imread(path))
    except Exception as exc:
        raise UnreadableFile(f"cannot read {path}: {exc}") from exc
    if image.ndim == 2:
        image = np.stack([image] * 3, axis=-1)
    if image.ndim != 3 or image.shape[-1] not in (3, 4):
        raise UnreadableFile(f"{path} is not an RGB image (shape {image.shape})")
    return image[..., :3]


def _center_crop_resize(image: np.ndarray, resolution: Tuple[int, int]) -> np.ndarray:
    """Crop to the target aspect ratio around the center, then scale."""

    height, width = resolution
    src_h, src_w = image.shape[:2]
    if src_h * width > src_w * height:
        crop_h, crop_w = max(1, round(src_w * height / width)), src_w
    else:
        crop_h, crop_w = src_h, max(1, round(src_h * width / height))
    top = (src_h - crop_h) // 2
    left = (src_w - crop_w) // 2
    cropped = image[top : top + crop_h, left : left + crop_w]
    if cropped.shape[:2] == (height, width):
        return cropped
    if cropped.dtype == np.uint8:
        pil = Image.fromarray(np.ascontiguousarray(cropped))
        return np.asarray(pil.resize((width, height), Image.Resampling.LANCZOS))
    # Pillow has no 16-bit RGB mode; scale each channel as a float image
    planes = [
        Image.fromarray(np.ascontiguousarray(cropped[..., c], dtype=np.float32)).resize(
            (width, height), Image.Resampling.LANCZOS
        )
        for c in range(cropped.shape[-1])
    ]
    return np.stack([np.asarray(plane) for plane in planes], axis=-1)


def full_scale(dtype: np.dtype) -> float:
    """Value of a white sample for images decoded as ``dtype``."""

    if dtype == np.uint8:
        return 255.0
    if np.issubdtype(dtype, np.floating):
        return 1.0
    return 65535.0


def load_frames(
    directory: str | Path,
    resolution: Optional[Sequence[int]] = None,
    *,
    extension: Optional[str] = None,
    threads: int = 4,
) -> FrameSequence:
    files = list_frame_files(directory, extension)
    with ThreadPoolExecutor(max_workers=max(1, int(threads))) as pool:
        images = list(pool.map(_read_rgb, files))
    sizes = {img.shape[:2] for img in images}
    scale = full_scale(images[0].dtype)
    if len(sizes) != 1:
        raise InconsistentResolution(f"frames in {directory} differ in size: {sorted(sizes)}")
    if resolution is not None:
        target = (int(resolution[0]), int(resolution[1]))
        images = [_center_crop_resize(img, target) for img in images]
    stack = np.stack(images).astype(np.float32)
    frames = torch.from_numpy(stack / scale)
    logger.info("loaded %d frames %s from %s", len(files), tuple(frames.shape[1:3]), directory)
    return FrameSequence(frames.clamp(0.0, 1.0), source=str(directory))


def to_uint8(frames: torch.Tensor) -> np.ndarray:
    array = frames.detach().cpu().to(torch.float64).clamp(0.0, 1.0).numpy()
    return np.rint(array * 255.0).astype(np.uint8)


def save_frames(
    frames: torch.Tensor,
    directory: str | Path,
    *,
    extension: str = "png",
    indices: Optional[Sequence[int]] = None,
) -> List[Path]:
    """Write 8-bit frames named ``%05d.<extension>``; ``indices`` overrides the numbering."""

    root = Path(directory)
    pixels = to_uint8(frames)
    numbers = list(indices) if indices is not None else list(range(len(pixels)))
    if len(numbers) != len(pixels):
        raise ShapeMismatch(f"{len(numbers)} indices for {len(pixels)} frames")
    suffix = extension.lower().lstrip(".")
    written: List[Path] = []
    try:
        root.mkdir(parents=True, exist_ok=True)
        for number, image in zip(numbers, pixels):
            path = root / f"{FRAME_NAME_FORMAT.format(int(number))}.{suffix}"
            iio.imwrite(path, image)
            written.append(path)
    except OSError as exc:
        raise IoFailure(f"cannot write frames to {root}: {exc}") from exc
    return written


__all__ = [
    "FRAME_EXTENSIONS",
    "FrameSequence",
    "full_scale",
    "list_frame_files",
    "load_frames",
    "save_frames",
    "to_uint8",
]
