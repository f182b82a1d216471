"""Command-line surface: one subcommand per operation."""
from __future__ import annotations

import argparse
import logging
import sys
import time
from dataclasses import replace
from pathlib import Path
from typing import Callable, Dict, List, Optional

import torch

from .compression.container import (
    CompressedModel,
    compress_model,
    decompress_model,
    rate_distortion_sweep,
    read_bitstream,
    write_bitstream,
)
from .compression.quantization import MAX_BITS, MIN_BITS
from .core.sampler import frame_positions
from .errors import ConfigError, DSNeRVError
from .io.checkpoint import load_checkpoint, save_checkpoint
from .io.config_io import (
    CompressionConfig,
    RunConfig,
    apply_overrides,
    load_run_config,
    resolve_threads,
)
from .io.csv_exporter import (
    build_matrix_table,
    build_quality_table,
    build_rate_distortion_table,
    build_train_log_table,
    write_csv,
)
from .io.frames import save_frames
from .metrics.quality import format_report
from .model.decoder import (
    DSNeRV,
    build_model,
    decode_components,
    param_breakdown,
    param_count,
    render_frames,
)
from .services.outputs import OutputSet
from .services.tasks import code_length_ablation, load_dataset, prepare_task, run_task
from .training.config import TaskKind
from .training.trainer import train
from .version import APP_VERSION

logger = logging.getLogger(__name__)

CHECKPOINT_NAME = "model.dsnc"
TRAIN_LOG_NAME = "train_log.csv"


def _load_config(args: argparse.Namespace) -> RunConfig:
    if not args.config:
        raise ConfigError("--config", "this command needs a run configuration")
    config = load_run_config(args.config)
    return apply_overrides(config, seed=args.seed, output_dir=args.out, threads=args.threads)


def _apply_threads(config_threads: Optional[int]) -> int:
    threads = resolve_threads(config_threads)
    if threads is not None:
        torch.set_num_threads(threads)
    return threads or 4


def _output_root(args: argparse.Namespace, config: Optional[RunConfig]) -> Path:
    if args.out:
        return Path(args.out)
    if config is not None:
        return Path(config.output_dir)
    return Path(".")


def _load_model(args: argparse.Namespace) -> DSNeRV:
    if getattr(args, "bitstream", None):
        return decompress_model(read_bitstream(args.bitstream))
    if not args.checkpoint:
        raise ConfigError("--checkpoint", "this command needs a checkpoint or bitstream")
    return load_checkpoint(args.checkpoint)


def cmd_train(args: argparse.Namespace, outputs: OutputSet, config: RunConfig) -> int:
    threads = _apply_threads(config.threads)
    started = time.perf_counter()
    sequence = load_dataset(config, threads)
    spec = config.model.resolve(sequence.frame_count, sequence.resolution, config.seed)
    sequence, task = prepare_task(sequence, config.task, config.mask, config.seed)
    model = build_model(spec)
    train_config = config.train
    if args.progress:
        train_config = replace(train_config, progress=True)
    model, log = train(sequence, model, task, train_config)
    save_checkpoint(model, outputs.path(CHECKPOINT_NAME))
    write_csv(outputs.path(TRAIN_LOG_NAME), build_train_log_table(log))
    print(
        f"final eval PSNR {log.final_eval_psnr:.4f} dB | params {param_count(model)} | "
        f"{time.perf_counter() - started:.1f} s"
    )
    return 0


def _task_command(kind: TaskKind) -> Callable[[argparse.Namespace, OutputSet, RunConfig], int]:
    def command(args: argparse.Namespace, outputs: OutputSet, config: RunConfig) -> int:
        threads = _apply_threads(config.threads)
        model = _load_model(args)
        sequence = load_dataset(config, threads)
        mask = config.mask if kind is TaskKind.INPAINTING else None
        sequence, task = prepare_task(sequence, kind, mask, config.seed)
        frames, report = run_task(model, sequence, task)
        frame_dir = outputs.directory(f"{kind.value}_frames")
        outputs.add(save_frames(frames, frame_dir, indices=task.eval_indices))
        write_csv(outputs.path(f"{kind.value}_report.csv"), build_quality_table(report))
        print(format_report(report, title=kind.value))
        return 0

    return command


def cmd_eval(args: argparse.Namespace, outputs: OutputSet, config: RunConfig) -> int:
    threads = _apply_threads(config.threads)
    model = _load_model(args)
    sequence = load_dataset(config, threads)
    sequence, task = prepare_task(sequence, config.task, config.mask, config.seed)
    _, report = run_task(model, sequence, task)
    write_csv(outputs.path("eval_report.csv"), build_quality_table(report))
    print(format_report(report, title="eval"))
    return 0


def _check_compression_flags(sparsity: float, bits_list: List[int]) -> None:
    if not 0.0 <= sparsity < 1.0:
        raise ConfigError("--sparsity", f"must lie in [0, 1) (got {sparsity})")
    for bits in bits_list:
        if not MIN_BITS <= bits <= MAX_BITS:
            raise ConfigError("--bits", f"must lie in [{MIN_BITS}, {MAX_BITS}] (got {bits})")


def cmd_compress(
    args: argparse.Namespace, outputs: OutputSet, config: Optional[RunConfig]
) -> int:
    settings = config.compression if config is not None else CompressionConfig()
    sparsity = args.sparsity if args.sparsity is not None else settings.sparsity
    bits_list: List[int] = list(args.bits or settings.bits)
    _check_compression_flags(sparsity, bits_list)
    model = load_checkpoint(args.checkpoint)
    for bits in bits_list:
        compressed = compress_model(model, sparsity, bits)
        size = write_bitstream(compressed, outputs.path(f"model_b{bits}.dsnv"))
        print(f"bits {bits}: {size} bytes, bpp {compressed.bpp():.6f}")
    if config is not None:
        sequence = load_dataset(config, _apply_threads(config.threads))
        rows = rate_distortion_sweep(model, sequence, sparsity, bits_list)
        write_csv(outputs.path("rate_distortion.csv"), build_rate_distortion_table(rows))
        for row in rows:
            print(f"bits {row.bits}: bpp {row.bpp:.6f} PSNR {row.psnr:.4f} dB")
    return 0


def cmd_decompress(
    args: argparse.Namespace, outputs: OutputSet, config: Optional[RunConfig]
) -> int:
    compressed: CompressedModel = read_bitstream(args.bitstream)
    model = decompress_model(compressed)
    save_checkpoint(model, outputs.path(args.name))
    print(f"bpp {compressed.bpp():.6f} ({compressed.byte_length} bytes)")
    return 0


def cmd_info(
    args: argparse.Namespace, outputs: OutputSet, config: Optional[RunConfig]
) -> int:
    model = _load_model(args)
    spec = model.spec
    total = param_count(model)
    breakdown = param_breakdown(model)
    timeline = spec.timeline
    decoder = spec.decoder
    print(
        f"frames {timeline.frame_count}, static codes {timeline.static_count}, "
        f"dynamic codes {timeline.dynamic_count}"
    )
    print(f"anchors {timeline.anchor_positions()}")
    print(f"static code {decoder.static_shape}, dynamic code {decoder.dynamic_shape}")
    print(
        f"output {decoder.output_size}, c1 {decoder.c1}, ch_min {decoder.ch_min}, "
        f"strides {decoder.strides}"
    )
    print(f"parameters {total}")
    for name, count in breakdown.items():
        print(f"  {name:14s} {count:10d}  {100.0 * count / total:6.2f}%")
    return 0


def cmd_decompose(
    args: argparse.Namespace, outputs: OutputSet, config: Optional[RunConfig]
) -> int:
    model = _load_model(args)
    frame_count = model.timeline.frame_count
    positions = list(args.frames) if args.frames else list(range(frame_count))
    statics, dynamics = [], []
    for t in positions:
        static_only, dynamic_only = decode_components(model, float(t))
        statics.append(static_only)
        dynamics.append(dynamic_only)
    indices = list(range(len(positions)))
    outputs.add(save_frames(torch.stack(statics), outputs.directory("static"), indices=indices))
    outputs.add(save_frames(torch.stack(dynamics), outputs.directory("dynamic"), indices=indices))
    print(f"wrote {len(positions)} static and dynamic component frames")
    return 0


def cmd_render(
    args: argparse.Namespace, outputs: OutputSet, config: Optional[RunConfig]
) -> int:
    model = _load_model(args)
    positions = frame_positions(model.timeline, args.factor)
    frames = render_frames(model, positions)
    outputs.add(save_frames(frames, outputs.directory("render")))
    print(f"rendered {len(positions)} frames at {args.factor}x the source frame rate")
    return 0


def cmd_ablate(args: argparse.Namespace, outputs: OutputSet, config: RunConfig) -> int:
    threads = _apply_threads(config.threads)
    sequence = load_dataset(config, threads)
    spec = config.model.resolve(sequence.frame_count, sequence.resolution, config.seed)
    sequence, task = prepare_task(sequence, config.task, config.mask, config.seed)
    result = code_length_ablation(
        sequence, spec, args.static_counts, args.dynamic_counts, config.train, task
    )
    table = build_matrix_table(
        "static\\dynamic", result.static_counts, result.dynamic_counts, result.psnr
    )
    write_csv(outputs.path("code_length_ablation.csv"), table)
    for key, row in zip(result.static_counts, result.psnr):
        print(f"static {key:3d}: " + "  ".join(f"{value:7.3f}" for value in row))
    return 0


# name -> (handler, needs a run configuration)
COMMANDS: Dict[str, tuple] = {
    "train": (cmd_train, True),
    "reconstruct": (_task_command(TaskKind.RECONSTRUCTION), True),
    "interpolate": (_task_command(TaskKind.INTERPOLATION), True),
    "inpaint": (_task_command(TaskKind.INPAINTING), True),
    "eval": (cmd_eval, True),
    "compress": (cmd_compress, False),
    "decompress": (cmd_decompress, False),
    "info": (cmd_info, False),
    "decompose": (cmd_decompose, False),
    "render": (cmd_render, False),
    "ablate": (cmd_ablate, True),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="run configuration (JSON)")
    common.add_argument("--seed", type=int, help="override the configured seed")
    common.add_argument("--out", help="output directory")
    common.add_argument("--threads", type=int, help="torch intra-op threads (env DSNERV_THREADS)")

    parser = argparse.ArgumentParser(prog="dsnerv", description="DS-NeRV video representations")
    parser.add_argument("--version", action="version", version=f"%(prog)s {APP_VERSION}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", parents=[common], help="fit a model to a video")
    p.add_argument("--progress", action="store_true", help="show a progress bar")

    for name in ("reconstruct", "interpolate", "inpaint", "eval"):
        p = sub.add_parser(name, parents=[common], help=f"{name} from a trained model")
        p.add_argument("--checkpoint", help="model checkpoint (.dsnc)")
        p.add_argument("--bitstream", help="compressed model (.dsnv) instead of a checkpoint")

    p = sub.add_parser("compress", parents=[common], help="prune, quantize and entropy-code")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--bits", type=int, nargs="+", help="one bitstream per bit depth")
    p.add_argument("--sparsity", type=float, help="fraction of pruned weights")

    p = sub.add_parser("decompress", parents=[common], help="bitstream -> checkpoint")
    p.add_argument("--bitstream", required=True)
    p.add_argument("--name", default="decompressed.dsnc", help="checkpoint file name")

    for name, text in (
        ("info", "describe a model"),
        ("decompose", "decode the static and dynamic components"),
        ("render", "decode fractional positions (frame-rate up-conversion)"),
    ):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--checkpoint")
        p.add_argument("--bitstream")
        if name == "decompose":
            p.add_argument("--frames", type=float, nargs="*", help="positions (default: all)")
        if name == "render":
            p.add_argument("--factor", type=int, default=2, help="samples per frame interval")

    p = sub.add_parser("ablate", parents=[common], help="code-length grid")
    p.add_argument("--static-counts", type=int, nargs="+", default=[2, 4])
    p.add_argument("--dynamic-counts", type=int, nargs="+", default=[2, 8])
    return parser


def dispatch(args: argparse.Namespace) -> int:
    handler, needs_config = COMMANDS[args.command]
    try:
        config = _load_config(args) if needs_config or args.config else None
        with OutputSet(_output_root(args, config)) as outputs:
            return handler(args, outputs, config)
    except DSNeRVError as exc:
        logger.debug("command failed", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return 1


__all__ = ["COMMANDS", "build_parser", "dispatch"]
