"""The compressed-model bitstream: prune, quantize, entropy-code.

Layout (little-endian)::

    b"DSNV" | version u16 | spec length u32 | spec JSON | tensor count u32
    per tensor: name length u16 | name | rank u8 | dims u32 * rank
                min f32 | max f32 | bits u8 | flags u8 | Huffman stream

With the ``FLAG_PRUNED`` flag, symbol 0 marks a pruned (exactly zero) entry and every other
symbol is its quantization code plus one.

Each tensor stores its float32 ``(min, max)`` rather than ``(min, scale)``. The scale is derived
from the bounds on read, so decompressing and compressing again reproduces the same bytes. Each
Huffman stream is self-delimiting through its own header, so the container records no separate
tensor length. DESIGN.md records this layout under "Container quantization".
"""
from __future__ import annotations

import json
import logging
import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import torch

from ..errors import CorruptStream, IoFailure, VersionMismatch
from ..io.frames import FrameSequence
from ..metrics.quality import bpp
from ..model.decoder import DSNeRV, build_model
from ..model.spec import ModelSpec
from ..training.trainer import evaluate
from .huffman import decode_stream, entropy_encode
from .pruning import parameter_store, prune
from .quantization import QuantSpec, dequantize, quantize

logger = logging.getLogger(__name__)

MAGIC = b"DSNV"
VERSION = 1
FLAG_PRUNED = 0x01


@dataclass(frozen=True)
class CompressedTensor:
    name: str
    shape: Tuple[int, ...]
    quant: QuantSpec
    pruned: bool
    stream: bytes


@dataclass(frozen=True)
class CompressedModel:
    spec: ModelSpec
    tensors: Tuple[CompressedTensor, ...]

    def to_bytes(self) -> bytes:
        blob = json.dumps(self.spec.to_mapping(), sort_keys=True, separators=(",", ":"))
        spec_bytes = blob.encode("utf-8")
        out = bytearray(MAGIC)
        out += struct.pack("<HI", VERSION, len(spec_bytes))
        out += spec_bytes
        out += struct.pack("<I", len(self.tensors))
        for tensor in self.tensors:
            name = tensor.name.encode("utf-8")
            out += struct.pack("<H", len(name)) + name
            out += struct.pack("<B", len(tensor.shape))
            out += struct.pack(f"<{len(tensor.shape)}I", *tensor.shape)
            flags = FLAG_PRUNED if tensor.pruned else 0
            out += struct.pack(
                "<ffBB", tensor.quant.minimum, tensor.quant.maximum, tensor.quant.bits, flags
            )
            out += tensor.stream
        return bytes(out)

    @classmethod
    def from_bytes(cls, data: bytes) -> "CompressedModel":
        if data[:4] != MAGIC:
            raise CorruptStream("not a DSNV bitstream")
        offset = 4
        (version, spec_length), offset = _read("<HI", data, offset)
        if version != VERSION:
            raise VersionMismatch(f"bitstream version {version}, expected {VERSION}")
        if offset + spec_length > len(data):
            raise CorruptStream("spec blob runs past the end of the stream")
        try:
            spec = ModelSpec.from_mapping(json.loads(data[offset : offset + spec_length]))
        except (ValueError, KeyError, TypeError) as exc:
            raise CorruptStream(f"unreadable model spec: {exc}") from exc
        offset += spec_length
        (count,), offset = _read("<I", data, offset)
        tensors: List[CompressedTensor] = []
        for _ in range(count):
            (name_length,), offset = _read("<H", data, offset)
            if offset + name_length > len(data):
                raise CorruptStream("tensor name runs past the end of the stream")
            name = data[offset : offset + name_length].decode("utf-8", errors="replace")
            offset += name_length
            (rank,), offset = _read("<B", data, offset)
            shape, offset = _read(f"<{rank}I", data, offset)
            (minimum, maximum, bits, flags), offset = _read("<ffBB", data, offset)
            start = offset
            _, offset = decode_stream(data, offset)
            try:
                quant = QuantSpec(float(minimum), float(maximum), int(bits))
            except ValueError as exc:
                raise CorruptStream(f"{name}: {exc}") from exc
            tensors.append(
                CompressedTensor(
                    name, tuple(shape), quant, bool(flags & FLAG_PRUNED), data[start:offset]
                )
            )
        if offset != len(data):
            raise CorruptStream(f"{len(data) - offset} trailing bytes after the last tensor")
        return cls(spec, tuple(tensors))

    @property
    def byte_length(self) -> int:
        return len(self.to_bytes())

    def bpp(self) -> float:
        height, width = self.spec.decoder.output_size
        return bpp(self.byte_length, self.spec.timeline.frame_count, height, width)


def _read(fmt: str, data: bytes, offset: int) -> Tuple[Tuple, int]:
    size = struct.calcsize(fmt)
    if offset + size > len(data):
        raise CorruptStream("bitstream truncated")
    return struct.unpack_from(fmt, data, offset), offset + size


def compress_model(model: DSNeRV, sparsity: float = 0.0, bits: int = 8) -> CompressedModel:
    store = parameter_store(model)
    result = prune(store, sparsity)
    tensors: List[CompressedTensor] = []
    for name, values in result.store.items():
        codes, quant = quantize(values, bits)
        mask = result.masks.get(name)
        pruned = mask is not None and not bool(mask.all())
        symbols = torch.where(mask, codes + 1, torch.zeros_like(codes)) if pruned else codes
        tensors.append(
            CompressedTensor(
                name, tuple(values.shape), quant, pruned, entropy_encode(symbols.numpy())
            )
        )
    compressed = CompressedModel(model.spec, tuple(tensors))
    logger.info(
        "compressed %d tensors at %d bits, sparsity %.3f: %d bytes",
        len(tensors),
        bits,
        result.sparsity,
        compressed.byte_length,
    )
    return compressed


def _restore_tensor(tensor: CompressedTensor) -> torch.Tensor:
    symbols, end = decode_stream(tensor.stream, 0)
    if end != len(tensor.stream) or symbols.size != math.prod(tensor.shape):
        raise CorruptStream(f"{tensor.name}: stream does not match shape {tensor.shape}")
    codes = torch.from_numpy(symbols)
    limit = tensor.quant.levels if tensor.pruned else tensor.quant.levels - 1
    if codes.numel() and int(codes.max()) > limit:
        raise CorruptStream(f"{tensor.name}: symbol outside the {tensor.quant.bits}-bit range")
    if tensor.pruned:
        values = torch.where(
            codes == 0,
            torch.zeros(codes.shape, dtype=torch.float64),
            dequantize((codes - 1).clamp(min=0), tensor.quant),
        )
    else:
        values = dequantize(codes, tensor.quant)
    return values.reshape(tensor.shape)


@torch.no_grad()
def decompress_model(compressed: CompressedModel) -> DSNeRV:
    model = build_model(compressed.spec)
    params = dict(model.named_parameters())
    names = [tensor.name for tensor in compressed.tensors]
    if sorted(names) != sorted(params):
        raise CorruptStream("bitstream tensors do not match the model layout")
    for tensor in compressed.tensors:
        target = params[tensor.name]
        if tuple(target.shape) != tensor.shape:
            raise CorruptStream(f"{tensor.name}: shape {tensor.shape} != {tuple(target.shape)}")
        target.copy_(_restore_tensor(tensor).to(target.dtype))
    return model


def write_bitstream(compressed: CompressedModel, path: str | Path) -> int:
    data = compressed.to_bytes()
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
    return len(data)


def read_bitstream(path: str | Path) -> CompressedModel:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    return CompressedModel.from_bytes(data)


@dataclass(frozen=True)
class RateDistortionRow:
    bits: int
    sparsity: float
    bytes: int
    bpp: float
    psnr: float
    ms_ssim: float


def rate_distortion_sweep(
    model: DSNeRV,
    sequence: FrameSequence,
    sparsity: float,
    bits_list: Sequence[int],
    indices: Optional[Sequence[int]] = None,
) -> List[RateDistortionRow]:
    """Compress at every bit depth, decode the bitstream again and score it."""

    labels = list(indices) if indices is not None else list(range(sequence.frame_count))
    rows: List[RateDistortionRow] = []
    for bits in bits_list:
        data = compress_model(model, sparsity, int(bits)).to_bytes()
        restored = decompress_model(CompressedModel.from_bytes(data))
        report = evaluate(restored, sequence, labels)
        height, width = sequence.resolution
        rows.append(
            RateDistortionRow(
                bits=int(bits),
                sparsity=float(sparsity),
                bytes=len(data),
                bpp=bpp(len(data), sequence.frame_count, height, width),
                psnr=report.mean_psnr,
                ms_ssim=report.mean_ms_ssim,
            )
        )
    return rows


__all__ = [
    "MAGIC",
    "VERSION",
    "CompressedTensor",
    "CompressedModel",
    "compress_model",
    "decompress_model",
    "write_bitstream",
    "read_bitstream",
    "RateDistortionRow",
    "rate_distortion_sweep",
]
