import csv

from dsnerv.compression.container import RateDistortionRow
from dsnerv.io.csv_exporter import (
    QUALITY_HEADER,
    TRAIN_LOG_HEADER,
    build_matrix_table,
    build_quality_table,
    build_rate_distortion_table,
    build_train_log_table,
    write_csv,
)
from dsnerv.metrics.quality import QualityReport
from dsnerv.training.trainer import EpochRecord, TrainLog


def _read(path):
    with path.open("r", encoding="utf-8", newline="") as fh:
        return list(csv.reader(fh))


def test_train_log_table(tmp_path):
    log = TrainLog(
        records=[
            EpochRecord(1, 0.01, 20.0, float("nan"), 1e-3, 0.5),
            EpochRecord(2, 0.005, 23.0, 24.5, 5e-4, 0.5),
        ]
    )
    table = build_train_log_table(log)
    assert table.header == TRAIN_LOG_HEADER
    assert table.row_count == 2
    out_path = tmp_path / "train_log.csv"
    write_csv(out_path, table)
    rows = _read(out_path)
    assert rows[0] == list(TRAIN_LOG_HEADER)
    assert rows[1][3] == "nan"
    assert rows[2][3] == "24.5000"


def test_quality_table_appends_mean(tmp_path):
    report = QualityReport((0, 2), (30.0, 40.0), (0.9, 0.95))
    table = build_quality_table(report)
    assert table.header == QUALITY_HEADER
    assert table.rows[-1] == ("mean", "35.0000", "0.925000")
    for row in table.rows:
        assert len(row) == table.column_count


def test_rate_distortion_and_matrix_tables(tmp_path):
    rows = [RateDistortionRow(8, 0.1, 1234, 0.05, 31.5, 0.97)]
    table = build_rate_distortion_table(rows)
    assert table.rows[0][:3] == ("8", "0.1000", "1234")

    matrix = build_matrix_table("static", [2, 4], [8, 16], [[30.0, 31.0], [32.0, 33.0]])
    assert matrix.header == ("static", "8", "16")
    out_path = tmp_path / "grid.csv"
    write_csv(out_path, matrix)
    assert _read(out_path)[2] == ["4", "32.0000", "33.0000"]
