"""Static/dynamic code video representation toolkit."""

from .version import APP_VERSION

__all__ = ["APP_VERSION"]
