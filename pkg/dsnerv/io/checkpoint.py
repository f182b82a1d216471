"""Float32 model checkpoints that decode without the training data.

Layout (little-endian)::

    b"DSNC" | version u16 | spec length u32 | spec JSON | tensor count u32
    per tensor: name length u16 | name | rank u8 | dims u32 * rank | float32 payload
"""
from __future__ import annotations

import json
import math
import struct
from pathlib import Path
from typing import Dict, Tuple

import numpy as np
import torch

from ..errors import Corrupt, IoFailure, VersionMismatch
from ..model.decoder import DSNeRV, build_model
from ..model.spec import ModelSpec

MAGIC = b"DSNC"
VERSION = 1


def checkpoint_bytes(model: DSNeRV) -> bytes:
    blob = json.dumps(model.spec.to_mapping(), sort_keys=True).encode("utf-8")
    params = list(model.named_parameters())
    out = bytearray(MAGIC)
    out += struct.pack("<HI", VERSION, len(blob)) + blob
    out += struct.pack("<I", len(params))
    for name, param in params:
        encoded = name.encode("utf-8")
        out += struct.pack("<H", len(encoded)) + encoded
        out += struct.pack("<B", param.dim()) + struct.pack(f"<{param.dim()}I", *param.shape)
        out += param.detach().cpu().numpy().astype("<f4").tobytes()
    return bytes(out)


def save_checkpoint(model: DSNeRV, path: str | Path) -> Path:
    target = Path(path)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_bytes(checkpoint_bytes(model))
    except OSError as exc:
        raise IoFailure(f"cannot write checkpoint {target}: {exc}") from exc
    return target


def _take(data: bytes, offset: int, size: int) -> Tuple[bytes, int]:
    if offset + size > len(data):
        raise Corrupt("checkpoint truncated")
    return data[offset : offset + size], offset + size


def _unpack(fmt: str, data: bytes, offset: int) -> Tuple[Tuple, int]:
    raw, offset = _take(data, offset, struct.calcsize(fmt))
    return struct.unpack(fmt, raw), offset


def parse_checkpoint(data: bytes) -> Tuple[ModelSpec, Dict[str, torch.Tensor]]:
    if data[:4] != MAGIC:
        raise Corrupt("not a DSNC checkpoint")
    (version, blob_length), offset = _unpack("<HI", data, 4)
    if version != VERSION:
        raise VersionMismatch(f"checkpoint version {version}, expected {VERSION}")
    blob, offset = _take(data, offset, blob_length)
    try:
        spec = ModelSpec.from_mapping(json.loads(blob))
    except (ValueError, KeyError, TypeError) as exc:
        raise Corrupt(f"unreadable model spec: {exc}") from exc
    (count,), offset = _unpack("<I", data, offset)
    tensors: Dict[str, torch.Tensor] = {}
    for _ in range(count):
        (name_length,), offset = _unpack("<H", data, offset)
        name_bytes, offset = _take(data, offset, name_length)
        (rank,), offset = _unpack("<B", data, offset)
        shape, offset = _unpack(f"<{rank}I", data, offset)
        raw, offset = _take(data, offset, 4 * math.prod(shape))
        array = np.frombuffer(raw, dtype="<f4").astype(np.float32).reshape(shape)
        tensors[name_bytes.decode("utf-8", errors="replace")] = torch.from_numpy(array.copy())
    if offset != len(data):
        raise Corrupt(f"{len(data) - offset} trailing bytes in checkpoint")
    return spec, tensors


@torch.no_grad()
def load_checkpoint(path: str | Path) -> DSNeRV:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise IoFailure(f"cannot read checkpoint {path}: {exc}") from exc
    spec, tensors = parse_checkpoint(data)
    model = build_model(spec)
    params = dict(model.named_parameters())
    if set(params) != set(tensors):
        raise Corrupt("checkpoint tensors do not match the model layout")
    for name, value in tensors.items():
        if params[name].shape != value.shape:
            raise Corrupt(f"{name}: shape {tuple(value.shape)} != {tuple(params[name].shape)}")
        params[name].copy_(value)
    return model


__all__ = [
    "MAGIC",
    "VERSION",
    "checkpoint_bytes",
    "save_checkpoint",
    "parse_checkpoint",
    "load_checkpoint",
]
