"""Files written by one command, removed again if the command fails."""
from __future__ import annotations

import logging
import shutil
from pathlib import Path
from types import TracebackType
from typing import List, Optional, Type

logger = logging.getLogger(__name__)


class OutputSet:
    def __init__(self, root: str | Path) -> None:
        self.root = Path(root)
        self._created_root = not self.root.exists()
        self._files: List[Path] = []
        self._dirs: List[Path] = []
        self.committed = False

    def path(self, name: str) -> Path:
        """Register ``root/name`` as an output and return it."""

        target = self.root / name
        self.root.mkdir(parents=True, exist_ok=True)
        self._files.append(target)
        return target

    def directory(self, name: str) -> Path:
        target = self.root / name
        if not target.exists():
            self._dirs.append(target)
        target.mkdir(parents=True, exist_ok=True)
        return target

    def add(self, paths: List[Path]) -> None:
        self._files.extend(Path(p) for p in paths)

    @property
    def files(self) -> List[Path]:
        return list(self._files)

    def discard(self) -> None:
        for file in self._files:
            if file.is_file():
                file.unlink()
        for directory in reversed(self._dirs):
            shutil.rmtree(directory, ignore_errors=True)
        if self._created_root and self.root.is_dir() and not any(self.root.iterdir()):
            self.root.rmdir()
        logger.info("removed partial outputs under %s", self.root)

    def __enter__(self) -> "OutputSet":
        return self

    def __exit__(
        self,
        exc_type: Optional[Type[BaseException]],
        exc: Optional[BaseException],
        tb: Optional[TracebackType],
    ) -> bool:
        if exc_type is not None:
            self.discard()
        else:
            self.committed = True
        return False


__all__ = ["OutputSet"]
