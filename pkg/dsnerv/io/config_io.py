"""Run configuration files (JSON) with field-path error messages."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple

from ..core.timeline import TimelineConfig
from ..errors import ConfigError, ConfigMismatch, DegenerateTimeline
from ..model.spec import FusionDecoderSpec, ModelSpec
from ..training.config import TaskKind, TrainConfig
from .masks import MaskKind, MaskSpec
from .synthetic import SynthKind

THREADS_ENV = "DSNERV_THREADS"


def _join(path: str, key: str | int) -> str:
    if isinstance(key, int):
        return f"{path}[{key}]"
    return f"{path}.{key}" if path else key


def _section(mapping: Mapping[str, Any], key: str, path: str) -> Mapping[str, Any]:
    value = mapping.get(key, {})
    if not isinstance(value, Mapping):
        raise ConfigError(_join(path, key), "expected an object")
    return value


def _as_int(value: Any, path: str, minimum: Optional[int] = None) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
        raise ConfigError(path, f"expected an integer, got {value!r}")
    result = int(value)
    if minimum is not None and result < minimum:
        raise ConfigError(path, f"must be >= {minimum} (got {result})")
    return result


def _as_float(value: Any, path: str, minimum: Optional[float] = None) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    result = float(value)
    if minimum is not None and result < minimum:
        raise ConfigError(path, f"must be >= {minimum} (got {result})")
    return result


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _as_bool(value: Any, path: str) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, str) and value.lower() in _TRUE | _FALSE:
        return value.lower() in _TRUE
    raise ConfigError(path, f"expected a boolean, got {value!r}")


def _as_int_list(
    value: Any, path: str, length: Optional[int] = None, minimum: int = 1
) -> Tuple[int, ...]:
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigError(path, f"expected a non-empty list, got {value!r}")
    if length is not None and len(value) != length:
        raise ConfigError(path, f"expected {length} entries, got {len(value)}")
    return tuple(_as_int(item, _join(path, i), minimum) for i, item in enumerate(value))


def _as_choice(value: Any, path: str, enum: Any) -> Any:
    try:
        return enum(value)
    except ValueError:
        choices = ", ".join(member.value for member in enum)
        raise ConfigError(path, f"expected one of {choices}, got {value!r}") from None


@dataclass(frozen=True)
class SyntheticConfig:
    kind: SynthKind
    frames: int
    height: int
    width: int
    params: Dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class DatasetConfig:
    path: Optional[str] = None
    resolution: Optional[Tuple[int, int]] = None
    extension: Optional[str] = None
    synthetic: Optional[SyntheticConfig] = None


@dataclass(frozen=True)
class ModelConfig:
    dynamic_count: int
    static_shape: Tuple[int, int, int]
    dynamic_shape: Tuple[int, int, int]
    c1: int
    ch_min: int
    strides: Tuple[int, ...]
    static_count: Optional[int] = None
    static_factor: Optional[int] = None
    channel_reduction: float = 1.2
    kernel_min: int = 1
    kernel_max: int = 5
    head_kernel: int = 1

    def resolve(self, frame_count: int, resolution: Tuple[int, int], seed: int) -> ModelSpec:
        """Bind the layout to a video; every invariant failure names its field."""

        try:
            if self.static_count is not None:
                timeline = TimelineConfig(frame_count, self.static_count, self.dynamic_count)
            else:
                factor = self.static_factor if self.static_factor is not None else 1
                timeline = TimelineConfig.from_static_factor(
                    frame_count, factor, self.dynamic_count
                )
        except ConfigMismatch as exc:
            raise ConfigError("model.static_count", str(exc)) from exc
        try:
            decoder = FusionDecoderSpec(
                static_shape=self.static_shape,
                dynamic_shape=self.dynamic_shape,
                output_size=resolution,
                c1=self.c1,
                ch_min=self.ch_min,
                strides=self.strides,
                channel_reduction=self.channel_reduction,
                kernel_min=self.kernel_min,
                kernel_max=self.kernel_max,
                head_kernel=self.head_kernel,
            )
        except ConfigMismatch as exc:
            where = "model.strides" if "stride chain" in str(exc) else "model"
            raise ConfigError(where, str(exc)) from exc
        try:
            return ModelSpec(timeline, decoder, seed)
        except DegenerateTimeline as exc:
            raise ConfigError("model.static_count", str(exc)) from exc


@dataclass(frozen=True)
class CompressionConfig:
    sparsity: float = 0.0
    bits: Tuple[int, ...] = (8,)


@dataclass(frozen=True)
class RunConfig:
    model: ModelConfig
    dataset: DatasetConfig = field(default_factory=DatasetConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    task: TaskKind = TaskKind.RECONSTRUCTION
    mask: Optional[MaskSpec] = None
    compression: CompressionConfig = field(default_factory=CompressionConfig)
    seed: int = 0
    output_dir: str = "runs"
    threads: Optional[int] = None


def parse_dataset(mapping: Mapping[str, Any]) -> DatasetConfig:
    path = "dataset"
    synthetic = mapping.get("synthetic")
    if synthetic is not None:
        if not isinstance(synthetic, Mapping):
            raise ConfigError(_join(path, "synthetic"), "expected an object")
        base = _join(path, "synthetic")
        params = synthetic.get("params", {})
        if not isinstance(params, Mapping):
            raise ConfigError(_join(base, "params"), "expected an object")
        return DatasetConfig(
            synthetic=SyntheticConfig(
                kind=_as_choice(synthetic.get("kind"), _join(base, "kind"), SynthKind),
                frames=_as_int(synthetic.get("frames"), _join(base, "frames"), 2),
                height=_as_int(synthetic.get("height"), _join(base, "height"), 1),
                width=_as_int(synthetic.get("width"), _join(base, "width"), 1),
                params=dict(params),
            )
        )
    if "path" not in mapping:
        raise ConfigError(path, "needs either 'path' or 'synthetic'")
    if not isinstance(mapping["path"], str):
        raise ConfigError(_join(path, "path"), "expected a string")
    resolution = None
    if mapping.get("resolution") is not None:
        res = _as_int_list(mapping["resolution"], _join(path, "resolution"), 2)
        resolution = (res[0], res[1])
    extension = mapping.get("extension")
    if extension is not None and not isinstance(extension, str):
        raise ConfigError(_join(path, "extension"), "expected a string")
    return DatasetConfig(path=mapping["path"], resolution=resolution, extension=extension)


def parse_model(mapping: Mapping[str, Any]) -> ModelConfig:
    path = "model"
    for key in ("dynamic_count", "static_shape", "dynamic_shape", "c1", "ch_min", "strides"):
        if key not in mapping:
            raise ConfigError(_join(path, key), "missing")
    static_count = static_factor = None
    if "static_count" in mapping:
        static_count = _as_int(mapping["static_count"], _join(path, "static_count"), 2)
    elif "static_factor" in mapping:
        static_factor = _as_int(mapping["static_factor"], _join(path, "static_factor"), 1)
    else:
        raise ConfigError(_join(path, "static_count"), "missing (or give static_factor)")
    static_shape = _as_int_list(mapping["static_shape"], _join(path, "static_shape"), 3)
    dynamic_shape = _as_int_list(mapping["dynamic_shape"], _join(path, "dynamic_shape"), 3)
    return ModelConfig(
        dynamic_count=_as_int(mapping["dynamic_count"], _join(path, "dynamic_count"), 1),
        static_shape=(static_shape[0], static_shape[1], static_shape[2]),
        dynamic_shape=(dynamic_shape[0], dynamic_shape[1], dynamic_shape[2]),
        c1=_as_int(mapping["c1"], _join(path, "c1"), 1),
        ch_min=_as_int(mapping["ch_min"], _join(path, "ch_min"), 1),
        strides=_as_int_list(mapping["strides"], _join(path, "strides")),
        static_count=static_count,
        static_factor=static_factor,
        channel_reduction=_as_float(
            mapping.get("channel_reduction", 1.2), _join(path, "channel_reduction")
        ),
        kernel_min=_as_int(mapping.get("kernel_min", 1), _join(path, "kernel_min"), 1),
        kernel_max=_as_int(mapping.get("kernel_max", 5), _join(path, "kernel_max"), 1),
        head_kernel=_as_int(mapping.get("head_kernel", 1), _join(path, "head_kernel"), 1),
    )


def parse_train(mapping: Mapping[str, Any], seed: int) -> TrainConfig:
    path = "train"
    values: Dict[str, Any] = {"seed": seed}
    int_fields = {"epochs": 1, "batch_size": 1, "eval_every": 1}
    float_fields = ("base_lr", "code_lr_multiplier", "weight_decay", "warmup_ratio", "epsilon")
    for key, value in mapping.items():
        where = _join(path, key)
        if key in int_fields:
            values[key] = _as_int(value, where, int_fields[key])
        elif key in float_fields:
            values[key] = _as_float(value, where, 0.0)
        elif key == "betas":
            if not isinstance(value, (list, tuple)) or len(value) != 3:
                raise ConfigError(where, "expected three numbers")
            values[key] = tuple(_as_float(b, _join(where, i), 0.0) for i, b in enumerate(value))
        elif key == "progress":
            values[key] = _as_bool(value, where)
        elif key == "seed":
            values[key] = _as_int(value, where, 0)
        else:
            raise ConfigError(where, "unknown field")
    try:
        return TrainConfig(**values)
    except ConfigMismatch as exc:
        raise ConfigError(path, str(exc)) from exc


def parse_task(mapping: Mapping[str, Any]) -> Tuple[TaskKind, Optional[MaskSpec]]:
    kind = _as_choice(mapping.get("kind", TaskKind.RECONSTRUCTION.value), "task.kind", TaskKind)
    mask_map = mapping.get("mask")
    if mask_map is None:
        return kind, MaskSpec() if kind is TaskKind.INPAINTING else None
    if not isinstance(mask_map, Mapping):
        raise ConfigError("task.mask", "expected an object")
    mask = MaskSpec(
        kind=_as_choice(mask_map.get("kind", MaskKind.DISPERSE.value), "task.mask.kind", MaskKind),
        box_count=_as_int(mask_map.get("box_count", 5), "task.mask.box_count", 1),
        box_size=_as_int(mask_map.get("box_size", 50), "task.mask.box_size", 1),
        vary_per_frame=_as_bool(mask_map.get("vary_per_frame", False), "task.mask.vary_per_frame"),
    )
    return kind, mask


def parse_compression(mapping: Mapping[str, Any]) -> CompressionConfig:
    sparsity = _as_float(mapping.get("sparsity", 0.0), "compression.sparsity", 0.0)
    if sparsity >= 1.0:
        raise ConfigError("compression.sparsity", f"must be < 1 (got {sparsity})")
    bits = _as_int_list(mapping.get("bits", [8]), "compression.bits", minimum=2)
    for i, b in enumerate(bits):
        if b > 16:
            raise ConfigError(f"compression.bits[{i}]", f"must be <= 16 (got {b})")
    return CompressionConfig(sparsity, bits)


def parse_run_config(mapping: Mapping[str, Any]) -> RunConfig:
    if not isinstance(mapping, Mapping):
        raise ConfigError("", "the configuration must be a JSON object")
    seed = _as_int(mapping.get("seed", 0), "seed", 0)
    threads = mapping.get("threads")
    kind, mask = parse_task(_section(mapping, "task", ""))
    output_dir = mapping.get("output_dir", "runs")
    if not isinstance(output_dir, str):
        raise ConfigError("output_dir", "expected a string")
    if "model" not in mapping:
        raise ConfigError("model", "missing")
    return RunConfig(
        model=parse_model(_section(mapping, "model", "")),
        dataset=parse_dataset(_section(mapping, "dataset", "")),
        train=parse_train(_section(mapping, "train", ""), seed),
        task=kind,
        mask=mask,
        compression=parse_compression(_section(mapping, "compression", "")),
        seed=seed,
        output_dir=output_dir,
        threads=_as_int(threads, "threads", 1) if threads is not None else None,
    )


def load_run_config(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("", f"cannot read {path}: {exc}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"{path} is not valid JSON (line {exc.lineno}): {exc.msg}") from exc
    return parse_run_config(obj)


def apply_overrides(
    config: RunConfig,
    *,
    seed: Optional[int] = None,
    output_dir: Optional[str] = None,
    threads: Optional[int] = None,
) -> RunConfig:
    """Command-line flags win over file values; the seed reaches training too."""

    if seed is not None:
        config = replace(config, seed=int(seed), train=replace(config.train, seed=int(seed)))
    if output_dir is not None:
        config = replace(config, output_dir=str(output_dir))
    if threads is not None:
        config = replace(config, threads=int(threads))
    return config


def resolve_threads(
    configured: Optional[int], environ: Mapping[str, str] = os.environ
) -> Optional[int]:
    if configured is not None:
        return max(1, int(configured))
    raw = environ.get(THREADS_ENV)
    if raw is None or not raw.strip():
        return None
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(THREADS_ENV, f"expected an integer, got {raw!r}") from None


__all__ = [
    "THREADS_ENV",
    "SyntheticConfig",
    "DatasetConfig",
    "ModelConfig",
    "CompressionConfig",
    "RunConfig",
    "parse_dataset",
    "parse_model",
    "parse_train",
    "parse_task",
    "parse_compression",
    "parse_run_config",
    "load_run_config",
    "apply_overrides",
    "resolve_threads",
]
