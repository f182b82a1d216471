"""Task protocols and experiment harnesses shared by the CLI and the acceptance runs."""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import torch

from ..core.timeline import TimelineConfig
from ..errors import ConfigMismatch, SpecMismatch
from ..io.config_io import RunConfig
from ..io.frames import FrameSequence, load_frames
from ..io.masks import MaskSpec, apply_mask
from ..io.synthetic import synth_video
from ..metrics.quality import QualityReport, quality_report
from ..model.decoder import DSNeRV, build_model, param_count, render_frames
from ..model.spec import ModelSpec
from ..training.config import TaskKind, TaskSpec, TrainConfig
from ..training.trainer import check_compatible, train

logger = logging.getLogger(__name__)


def load_dataset(config: RunConfig, threads: int = 4) -> FrameSequence:
    dataset = config.dataset
    if dataset.synthetic is not None:
        synth = dataset.synthetic
        return synth_video(
            synth.kind, synth.frames, synth.height, synth.width, config.seed, **synth.params
        )
    assert dataset.path is not None
    return load_frames(
        dataset.path, dataset.resolution, extension=dataset.extension, threads=threads
    )


def prepare_task(
    sequence: FrameSequence,
    kind: TaskKind,
    mask: Optional[MaskSpec] = None,
    seed: int = 0,
) -> Tuple[FrameSequence, TaskSpec]:
    """Index split of the task, with the mask applied for inpainting."""

    task = TaskSpec.for_kind(kind, sequence.frame_count, mask)
    if task.kind is TaskKind.INPAINTING:
        assert task.mask is not None
        sequence = apply_mask(sequence, task.mask, seed)
    return sequence, task


def run_task(
    model: DSNeRV, sequence: FrameSequence, task: TaskSpec, *, with_ms_ssim: bool = True
) -> Tuple[torch.Tensor, QualityReport]:
    """Decode the task's evaluation frames and score them against the clean video."""

    try:
        check_compatible(model, sequence)
        task.check_frames(sequence.frame_count)
    except ConfigMismatch as exc:
        raise SpecMismatch(str(exc)) from exc
    indices = list(task.eval_indices)
    frames = render_frames(model, indices)
    report = quality_report(
        frames, sequence.reference[indices], indices=indices, with_ms_ssim=with_ms_ssim
    )
    return frames, report


def with_code_lengths(spec: ModelSpec, static_count: int, dynamic_count: int) -> ModelSpec:
    timeline = TimelineConfig(spec.timeline.frame_count, static_count, dynamic_count)
    return replace(spec, timeline=timeline)


@dataclass(frozen=True)
class AblationResult:
    static_counts: Tuple[int, ...]
    dynamic_counts: Tuple[int, ...]
    psnr: Tuple[Tuple[float, ...], ...]

    def column(self, dynamic_count: int) -> Tuple[float, ...]:
        j = self.dynamic_counts.index(dynamic_count)
        return tuple(row[j] for row in self.psnr)


def code_length_ablation(
    sequence: FrameSequence,
    base_spec: ModelSpec,
    static_counts: Sequence[int],
    dynamic_counts: Sequence[int],
    config: TrainConfig,
    task: Optional[TaskSpec] = None,
) -> AblationResult:
    """Train one model per (static, dynamic) code length pair; rows follow ``static_counts``."""

    task = task or TaskSpec.reconstruction(sequence.frame_count)
    rows: List[Tuple[float, ...]] = []
    for static_count in static_counts:
        row: List[float] = []
        for dynamic_count in dynamic_counts:
            spec = with_code_lengths(base_spec, int(static_count), int(dynamic_count))
            _, log = train(sequence, build_model(spec), task, config)
            row.append(log.final_eval_psnr)
            logger.info(
                "code lengths static=%d dynamic=%d: %.2f dB",
                static_count,
                dynamic_count,
                log.final_eval_psnr,
            )
        rows.append(tuple(row))
    return AblationResult(
        tuple(int(s) for s in static_counts), tuple(int(d) for d in dynamic_counts), tuple(rows)
    )


def capacity_sweep(
    sequence: FrameSequence,
    specs: Sequence[ModelSpec],
    config: TrainConfig,
    task: Optional[TaskSpec] = None,
) -> List[Tuple[int, float]]:
    """``(param_count, final eval PSNR)`` for each model size."""

    task = task or TaskSpec.reconstruction(sequence.frame_count)
    results: List[Tuple[int, float]] = []
    for spec in specs:
        model = build_model(spec)
        count = param_count(model)
        _, log = train(sequence, model, task, config)
        results.append((count, log.final_eval_psnr))
        logger.info("capacity %d params: %.2f dB", count, log.final_eval_psnr)
    return results


__all__ = [
    "load_dataset",
    "prepare_task",
    "run_task",
    "with_code_lengths",
    "AblationResult",
    "code_length_ablation",
    "capacity_sweep",
]
