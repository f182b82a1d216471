from pathlib import Path

import pytest
import torch

from dsnerv.core.timeline import TimelineConfig
from dsnerv.io.synthetic import SynthKind, synth_video
from dsnerv.model.decoder import build_model
from dsnerv.model.spec import FusionDecoderSpec, ModelSpec


def _toy_spec(seed: int = 0) -> ModelSpec:
    """8 frames of 16x32 from 2x4x8 static and 4x8x2 dynamic codes."""

    decoder = FusionDecoderSpec(
        static_shape=(2, 4, 8),
        dynamic_shape=(4, 8, 2),
        output_size=(16, 32),
        c1=8,
        ch_min=4,
        strides=(2, 2, 2),
        kernel_max=3,
    )
    return ModelSpec(TimelineConfig(8, 3, 4), decoder, seed=seed)


def _tiny_spec(frame_count: int = 8, seed: int = 0) -> ModelSpec:
    decoder = FusionDecoderSpec(
        static_shape=(2, 4, 16),
        dynamic_shape=(4, 8, 4),
        output_size=(32, 64),
        c1=24,
        ch_min=8,
        strides=(2, 2, 2, 2),
        kernel_max=3,
    )
    return ModelSpec(TimelineConfig(frame_count, 3, 4), decoder, seed=seed)


@pytest.fixture
def toy_spec() -> ModelSpec:
    return _toy_spec()


@pytest.fixture
def make_spec():
    """Factory for specs: ``make_spec("toy", seed=1)`` or ``make_spec("tiny", frame_count=10)``."""

    def make(size: str = "toy", **kwargs) -> ModelSpec:
        return _toy_spec(**kwargs) if size == "toy" else _tiny_spec(**kwargs)

    return make


@pytest.fixture
def toy_model():
    return build_model(_toy_spec())


@pytest.fixture
def tiny_video():
    return synth_video(SynthKind.STATIC_PLUS_MOVING_SQUARE, 8, 32, 64, seed=0)


@pytest.fixture
def toy_video():
    return synth_video(SynthKind.STATIC_PLUS_MOVING_SQUARE, 8, 16, 32, seed=0)


@pytest.fixture
def configs_dir() -> Path:
    return Path(__file__).parent / "configs"


@pytest.fixture(autouse=True)
def _single_thread():
    threads = torch.get_num_threads()
    torch.set_num_threads(1)
    yield
    torch.set_num_threads(threads)
