import csv
import json

import pytest

from dsnerv.app import main
from dsnerv.cli import COMMANDS, build_parser

TASK_DIRS = {
    "reconstruct": "reconstruction",
    "interpolate": "interpolation",
    "inpaint": "inpainting",
}


def _write_config(tmp_path, **train) -> str:
    config = {
        "seed": 0,
        "output_dir": str(tmp_path / "default_out"),
        "dataset": {
            "synthetic": {
                "kind": "static_plus_moving_square",
                "frames": 8,
                "height": 16,
                "width": 32,
            }
        },
        "model": {
            "static_count": 3,
            "dynamic_count": 4,
            "static_shape": [2, 4, 8],
            "dynamic_shape": [4, 8, 2],
            "c1": 8,
            "ch_min": 4,
            "strides": [2, 2, 2],
            "kernel_max": 3,
        },
        "train": {"epochs": 2, "base_lr": 0.005, **train},
        "task": {"kind": "reconstruction", "mask": {"kind": "central"}},
        "compression": {"bits": [8]},
    }
    path = tmp_path / "run.json"
    path.write_text(json.dumps(config), encoding="utf-8")
    return str(path)


@pytest.fixture
def trained(tmp_path):
    config = _write_config(tmp_path)
    out = tmp_path / "run"
    assert main(["train", "--config", config, "--out", str(out)]) == 0
    return config, out


def test_parser_knows_every_command():
    parser = build_parser()
    extra = {"compress": ["--checkpoint", "m.dsnc"], "decompress": ["--bitstream", "m.dsnv"]}
    for name in COMMANDS:
        args = parser.parse_args([name, "--config", "c.json", *extra.get(name, [])])
        assert args.command == name


def test_train_writes_checkpoint_and_log(capsys, trained):
    _, out = trained
    assert (out / "model.dsnc").is_file()
    with (out / "train_log.csv").open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    assert rows[0][0] == "epoch"
    assert len(rows) == 3
    assert "final eval PSNR" in capsys.readouterr().out


def test_task_commands_write_frames_and_reports(trained):
    config, out = trained
    checkpoint = str(out / "model.dsnc")
    for command, count in (("reconstruct", 8), ("interpolate", 4), ("inpaint", 8)):
        code = main([command, "--config", config, "--checkpoint", checkpoint, "--out", str(out)])
        assert code == 0
        assert len(list((out / f"{TASK_DIRS[command]}_frames").glob("*.png"))) == count
        assert (out / f"{TASK_DIRS[command]}_report.csv").is_file()


def test_compress_decompress_and_eval(trained, capsys):
    config, out = trained
    checkpoint = str(out / "model.dsnc")
    args = ["compress", "--config", config, "--checkpoint", checkpoint, "--out", str(out)]
    assert main(args + ["--bits", "6", "8", "--sparsity", "0.2"]) == 0
    assert (out / "model_b6.dsnv").is_file()
    assert (out / "model_b8.dsnv").is_file()
    with (out / "rate_distortion.csv").open(newline="", encoding="utf-8") as fh:
        assert len(list(csv.reader(fh))) == 3

    bitstream = str(out / "model_b8.dsnv")
    assert main(["decompress", "--bitstream", bitstream, "--out", str(out)]) == 0
    assert (out / "decompressed.dsnc").is_file()
    assert main(["eval", "--config", config, "--bitstream", bitstream, "--out", str(out)]) == 0
    assert "eval: 8 frames" in capsys.readouterr().out


def test_info_decompose_render(trained, capsys):
    _, out = trained
    checkpoint = str(out / "model.dsnc")
    assert main(["info", "--checkpoint", checkpoint, "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "anchors [0, 3, 7]" in text
    assert "static_codes" in text
    args = ["decompose", "--checkpoint", checkpoint, "--out", str(out), "--frames", "0", "3.5"]
    assert main(args) == 0
    assert len(list((out / "static").glob("*.png"))) == 2
    assert len(list((out / "dynamic").glob("*.png"))) == 2
    assert main(["render", "--checkpoint", checkpoint, "--out", str(out), "--factor", "2"]) == 0
    assert len(list((out / "render").glob("*.png"))) == 15


def test_ablate_writes_matrix(tmp_path):
    config = _write_config(tmp_path, epochs=1)
    out = tmp_path / "ablate"
    args = ["ablate", "--config", config, "--out", str(out)]
    assert main(args + ["--static-counts", "2", "3", "--dynamic-counts", "2"]) == 0
    with (out / "code_length_ablation.csv").open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["static\\dynamic", "2"]
    assert [row[0] for row in rows[1:]] == ["2", "3"]


def test_errors_exit_one_and_leave_no_outputs(tmp_path, capsys):
    config = _write_config(tmp_path)
    out = tmp_path / "failed"
    missing = str(tmp_path / "missing.dsnc")
    assert main(["eval", "--config", config, "--checkpoint", missing, "--out", str(out)]) == 1
    assert capsys.readouterr().err.startswith("error:")
    assert not out.exists()
    assert main(["train", "--out", str(out)]) == 1


def test_corrupt_bitstream_is_reported(tmp_path, capsys):
    bad = tmp_path / "bad.dsnv"
    bad.write_bytes(b"DSNV\x01\x00garbage")
    assert main(["info", "--bitstream", str(bad), "--out", str(tmp_path)]) == 1
    assert "error:" in capsys.readouterr().err


def test_usage_errors_exit_two():
    with pytest.raises(SystemExit) as info:
        main(["compress"])
    assert info.value.code == 2


def test_compress_rejects_bad_flags_with_a_diagnostic(trained, capsys):
    _, out = trained
    checkpoint = str(out / "model.dsnc")
    target = out / "bad_flags"
    base = ["compress", "--checkpoint", checkpoint, "--out", str(target)]
    assert main(base + ["--bits", "20"]) == 1
    assert capsys.readouterr().err.startswith("error: --bits:")
    assert main(base + ["--sparsity", "1.5"]) == 1
    assert capsys.readouterr().err.startswith("error: --sparsity:")
    assert not target.exists()


def _log_rows(path):
    with path.open(newline="", encoding="utf-8") as fh:
        return [row[:-1] for row in csv.reader(fh)]


def test_training_rerun_with_same_seed_is_identical(tmp_path, capsys):
    config = _write_config(tmp_path)
    summaries = []
    for name in ("first", "second"):
        assert main(["train", "--config", config, "--out", str(tmp_path / name)]) == 0
        line = capsys.readouterr().out.strip().splitlines()[-1]
        summaries.append(line.rsplit(" | ", 1)[0])
    assert summaries[0] == summaries[1]
    first, second = tmp_path / "first", tmp_path / "second"
    assert (first / "model.dsnc").read_bytes() == (second / "model.dsnc").read_bytes()
    # the last column holds wall-clock seconds
    assert _log_rows(first / "train_log.csv") == _log_rows(second / "train_log.csv")


def test_reconstruct_reports_the_final_training_psnr(trained):
    config, out = trained
    checkpoint = str(out / "model.dsnc")
    args = ["reconstruct", "--config", config, "--checkpoint", checkpoint, "--out", str(out)]
    assert main(args) == 0
    with (out / "train_log.csv").open(newline="", encoding="utf-8") as fh:
        final_eval = list(csv.reader(fh))[-1][3]
    with (out / "reconstruction_report.csv").open(newline="", encoding="utf-8") as fh:
        mean_row = list(csv.reader(fh))[-1]
    assert mean_row[0] == "mean"
    assert mean_row[1] == final_eval
