"""Joint optimisation of the code grids and the decoder."""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import torch
from tqdm import tqdm

from ..errors import ConfigMismatch
from ..io.frames import FrameSequence
from ..metrics.quality import QualityReport, mse_to_psnr, quality_report
from ..model.decoder import DSNeRV, render_frames
from .config import TaskSpec, TrainConfig
from .loss import l2_loss
from .optimizer import build_optimizer
from .schedule import build_scheduler

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    loss: float
    train_psnr: float
    eval_psnr: float
    lr: float
    seconds: float


@dataclass
class TrainLog:
    records: List[EpochRecord] = field(default_factory=list)
    step_losses: List[float] = field(default_factory=list)
    initial_eval_psnr: float = float("nan")

    @property
    def final_eval_psnr(self) -> float:
        for record in reversed(self.records):
            if not math.isnan(record.eval_psnr):
                return record.eval_psnr
        return float("nan")

    @property
    def total_seconds(self) -> float:
        return sum(record.seconds for record in self.records)


def check_compatible(model: DSNeRV, sequence: FrameSequence) -> None:
    height, width, _ = model.spec.frame_shape
    if sequence.resolution != (height, width):
        raise ConfigMismatch(
            f"model decodes {height}x{width} frames, video is "
            f"{sequence.resolution[0]}x{sequence.resolution[1]}"
        )
    if sequence.frame_count != model.timeline.frame_count:
        raise ConfigMismatch(
            f"model timeline has {model.timeline.frame_count} frames, video has "
            f"{sequence.frame_count}"
        )


def evaluate(
    model: DSNeRV,
    sequence: FrameSequence,
    indices: Sequence[int],
    *,
    with_ms_ssim: bool = True,
    chunk: int = 8,
) -> QualityReport:
    """Score decoded frames against the (clean) reference frames; no gradients flow."""

    labels = [int(i) for i in indices]
    pred = render_frames(model, labels, chunk=chunk)
    ref = sequence.reference[labels]
    return quality_report(pred, ref, indices=labels, with_ms_ssim=with_ms_ssim)


def _batches(
    indices: Tuple[int, ...], batch_size: int, gen: torch.Generator
) -> List[List[int]]:
    order = torch.randperm(len(indices), generator=gen).tolist()
    shuffled = [indices[k] for k in order]
    return [shuffled[s : s + batch_size] for s in range(0, len(shuffled), batch_size)]


def train(
    sequence: FrameSequence,
    model: DSNeRV,
    task: TaskSpec,
    config: TrainConfig,
) -> Tuple[DSNeRV, TrainLog]:
    check_compatible(model, sequence)
    task.check_frames(sequence.frame_count)
    optimizer = build_optimizer(model, config)
    gen = torch.Generator().manual_seed(int(config.seed))

    steps_per_epoch = math.ceil(len(task.train_indices) / config.batch_size)
    total_steps = config.epochs * steps_per_epoch
    scheduler = build_scheduler(optimizer, total_steps, config)
    log = TrainLog()
    log.initial_eval_psnr = evaluate(
        model, sequence, task.eval_indices, with_ms_ssim=False
    ).mean_psnr
    logger.info(
        "training %s: %d epochs x %d steps, initial eval PSNR %.2f dB",
        task.kind.value,
        config.epochs,
        steps_per_epoch,
        log.initial_eval_psnr,
    )

    epochs = range(1, config.epochs + 1)
    for epoch in tqdm(epochs, desc="train", disable=not config.progress):
        started = time.perf_counter()
        losses: List[float] = []
        psnrs: List[float] = []
        lr = 0.0
        for batch in _batches(task.train_indices, config.batch_size, gen):
            lr = optimizer.param_groups[0]["lr"]
            pred = model(torch.tensor(batch, dtype=torch.float64))
            target = sequence.frames[batch]
            mask = sequence.masks[batch] if sequence.masks is not None else None
            loss = l2_loss(pred, target, mask)
            optimizer.zero_grad(set_to_none=True)
            loss.backward()
            optimizer.step()
            scheduler.step()
            value = float(loss.detach())
            losses.append(value)
            psnrs.append(mse_to_psnr(value))
            log.step_losses.append(value)

        eval_psnr = float("nan")
        if epoch % config.eval_every == 0 or epoch == config.epochs:
            eval_psnr = evaluate(model, sequence, task.eval_indices, with_ms_ssim=False).mean_psnr
        record = EpochRecord(
            epoch=epoch,
            loss=sum(losses) / len(losses),
            train_psnr=sum(psnrs) / len(psnrs),
            eval_psnr=eval_psnr,
            lr=lr,
            seconds=time.perf_counter() - started,
        )
        log.records.append(record)
        if not math.isnan(eval_psnr):
            logger.info(
                "epoch %d loss %.6f train %.2f dB eval %.2f dB lr %.2e",
                epoch,
                record.loss,
                record.train_psnr,
                eval_psnr,
                lr,
            )
    return model, log


def smoothed(values: Sequence[float], window: int = 20) -> List[float]:
    """Means of consecutive non-overlapping windows."""

    return [
        sum(values[s : s + window]) / len(values[s : s + window])
        for s in range(0, len(values) - window + 1, window)
    ]


__all__ = [
    "EpochRecord",
    "TrainLog",
    "check_compatible",
    "evaluate",
    "train",
    "smoothed",
]
