"""Exception hierarchy shared by every dsnerv module."""
from __future__ import annotations


class DSNeRVError(Exception):
    """Base class for all errors raised by dsnerv."""


class DegenerateTimeline(DSNeRVError, ValueError):
    """Two static anchors coincide; the static count is too large for the video length."""


class IndexOutOfRange(DSNeRVError, IndexError):
    pass


class ShapeMismatch(DSNeRVError, ValueError):
    pass


class ConfigMismatch(DSNeRVError, ValueError):
    """A model spec or training setup violates one of its shape invariants."""


class SpecMismatch(DSNeRVError, ValueError):
    """A checkpoint does not fit the dataset it is evaluated against."""


class EmptyMask(DSNeRVError, ValueError):
    pass


class NonFiniteGradient(DSNeRVError, FloatingPointError):
    pass


class NonFiniteInput(DSNeRVError, ValueError):
    pass


class TooSmall(DSNeRVError, ValueError):
    pass


class CorruptStream(DSNeRVError, ValueError):
    pass


class VersionMismatch(DSNeRVError, ValueError):
    pass


class Corrupt(DSNeRVError, ValueError):
    pass


class EmptyDirectory(DSNeRVError, FileNotFoundError):
    pass


class InconsistentResolution(DSNeRVError, ValueError):
    pass


class UnreadableFile(DSNeRVError, OSError):
    pass


class IoFailure(DSNeRVError, OSError):
    pass


class MaskTooLarge(DSNeRVError, ValueError):
    pass


class InvalidFrames(DSNeRVError, ValueError):
    """Fewer than two frames, non-finite values or values outside [0, 1]."""


class ConfigError(DSNeRVError, ValueError):
    """Invalid run configuration; ``path`` names the offending field."""

    def __init__(self, path: str, message: str) -> None:
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


__all__ = [
    "DSNeRVError",
    "DegenerateTimeline",
    "IndexOutOfRange",
    "ShapeMismatch",
    "ConfigMismatch",
    "SpecMismatch",
    "EmptyMask",
    "NonFiniteGradient",
    "NonFiniteInput",
    "TooSmall",
    "CorruptStream",
    "VersionMismatch",
    "Corrupt",
    "EmptyDirectory",
    "InconsistentResolution",
    "UnreadableFile",
    "IoFailure",
    "MaskTooLarge",
    "InvalidFrames",
    "ConfigError",
]
