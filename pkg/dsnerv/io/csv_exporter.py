from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence, Tuple

from ..errors import IoFailure

TRAIN_LOG_HEADER = ("epoch", "loss", "train_psnr", "eval_psnr", "lr", "seconds")
QUALITY_HEADER = ("frame", "psnr", "ms_ssim")
RATE_DISTORTION_HEADER = ("bits", "sparsity", "bytes", "bpp", "psnr", "ms_ssim")


@dataclass(frozen=True)
class CsvTable:
    """Header plus pre-formatted string rows, ready for :func:`write_csv`."""

    header: Tuple[str, ...]
    rows: Tuple[Tuple[str, ...], ...]

    @property
    def column_count(self) -> int:
        return len(self.header)

    @property
    def row_count(self) -> int:
        return len(self.rows)


def _fmt(value: float, digits: int = 6) -> str:
    if isinstance(value, float) and math.isnan(value):
        return "nan"
    return f"{float(value):.{digits}f}"


def build_train_log_table(log) -> CsvTable:
    """One row per epoch of a :class:`~dsnerv.training.trainer.TrainLog`."""

    rows = tuple(
        (
            str(r.epoch),
            _fmt(r.loss, 8),
            _fmt(r.train_psnr, 4),
            _fmt(r.eval_psnr, 4),
            f"{r.lr:.6e}",
            _fmt(r.seconds, 3),
        )
        for r in log.records
    )
    return CsvTable(TRAIN_LOG_HEADER, rows)


def build_quality_table(report) -> CsvTable:
    rows: List[Tuple[str, ...]] = [
        (str(index), _fmt(p, 4), _fmt(s, 6))
        for index, p, s in zip(report.indices, report.psnr, report.ms_ssim)
    ]
    rows.append(("mean", _fmt(report.mean_psnr, 4), _fmt(report.mean_ms_ssim, 6)))
    return CsvTable(QUALITY_HEADER, tuple(rows))


def build_rate_distortion_table(rows: Sequence) -> CsvTable:
    return CsvTable(
        RATE_DISTORTION_HEADER,
        tuple(
            (
                str(row.bits),
                _fmt(row.sparsity, 4),
                str(row.bytes),
                _fmt(row.bpp, 6),
                _fmt(row.psnr, 4),
                _fmt(row.ms_ssim, 6),
            )
            for row in rows
        ),
    )


def build_matrix_table(
    row_label: str,
    row_keys: Sequence[int],
    column_keys: Sequence[int],
    values: Sequence[Sequence[float]],
) -> CsvTable:
    """A labelled matrix, e.g. PSNR over static (rows) by dynamic (columns) code lengths."""

    header = (row_label, *(str(key) for key in column_keys))
    rows = tuple(
        (str(key), *(_fmt(v, 4) for v in row)) for key, row in zip(row_keys, values)
    )
    return CsvTable(header, rows)


def write_csv(path: str | Path, table: CsvTable) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(table.header)
            writer.writerows(table.rows)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


__all__ = [
    "TRAIN_LOG_HEADER",
    "QUALITY_HEADER",
    "RATE_DISTORTION_HEADER",
    "CsvTable",
    "build_train_log_table",
    "build_quality_table",
    "build_rate_distortion_table",
    "build_matrix_table",
    "write_csv",
]
