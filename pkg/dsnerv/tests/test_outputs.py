import pytest

from dsnerv.services.outputs import OutputSet


def test_outputs_kept_on_success(tmp_path):
    root = tmp_path / "run"
    with OutputSet(root) as outputs:
        outputs.path("a.txt").write_text("a")
        frames = outputs.directory("frames")
        (frames / "0.png").write_bytes(b"x")
    assert outputs.committed
    assert (root / "a.txt").exists()
    assert (root / "frames" / "0.png").exists()


def test_partial_outputs_removed_on_failure(tmp_path):
    root = tmp_path / "run"
    with pytest.raises(RuntimeError):
        with OutputSet(root) as outputs:
            outputs.path("a.txt").write_text("a")
            outputs.directory("frames")
            raise RuntimeError("boom")
    assert not root.exists()


def test_existing_files_survive_failure(tmp_path):
    (tmp_path / "keep.txt").write_text("keep")
    with pytest.raises(ValueError):
        with OutputSet(tmp_path) as outputs:
            outputs.path("new.txt").write_text("new")
            raise ValueError("nope")
    assert (tmp_path / "keep.txt").exists()
    assert not (tmp_path / "new.txt").exists()
