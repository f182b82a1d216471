import math
import struct
from collections import Counter

import numpy as np
import pytest
import torch

from dsnerv.compression.container import (
    MAGIC,
    CompressedModel,
    compress_model,
    decompress_model,
    rate_distortion_sweep,
    read_bitstream,
    write_bitstream,
)
from dsnerv.compression.huffman import (
    canonical_codes,
    code_lengths,
    decode_stream,
    entropy_decode,
    entropy_encode,
)
from dsnerv.compression.pruning import parameter_store, prunable_names, prune
from dsnerv.compression.quantization import dequantize, quant_spec, quantize
from dsnerv.errors import ConfigMismatch, CorruptStream, NonFiniteInput, VersionMismatch
from dsnerv.model.decoder import param_count
from dsnerv.training.trainer import evaluate


def test_code_lengths_follow_frequencies():
    lengths = code_lengths({7: 50, 3: 25, 9: 15, 1: 10})
    assert lengths[7] == 1
    assert lengths[7] <= lengths[3] <= lengths[9]
    assert sum(2.0 ** -n for n in lengths.values()) == pytest.approx(1.0)


def test_single_symbol_gets_one_bit():
    assert code_lengths({5: 100}) == {5: 1}
    stream = entropy_encode([5] * 100)
    np.testing.assert_array_equal(entropy_decode(stream), [5] * 100)


def test_canonical_codes_are_prefix_free():
    codes = canonical_codes({0: 2, 1: 2, 2: 3, 3: 3, 4: 2})
    strings = [format(code, f"0{length}b") for code, length in codes.values()]
    for a in strings:
        for b in strings:
            assert a == b or not b.startswith(a)


def test_encoded_length_close_to_entropy():
    rng = np.random.default_rng(0)
    symbols = rng.geometric(0.3, size=5000)
    stream = entropy_encode(symbols)
    np.testing.assert_array_equal(entropy_decode(stream), symbols)
    counts = Counter(symbols.tolist())
    probs = np.array(list(counts.values())) / len(symbols)
    entropy_bits = float(-(probs * np.log2(probs)).sum()) * len(symbols)
    lengths = code_lengths(dict(counts))
    coded_bits = sum(lengths[s] * n for s, n in counts.items())
    assert entropy_bits <= coded_bits < entropy_bits + len(symbols)


def test_empty_stream():
    stream = entropy_encode([])
    assert entropy_decode(stream).size == 0


def test_decode_stream_reports_end_offset():
    first = entropy_encode([1, 2, 2, 3])
    second = entropy_encode([9, 9])
    symbols, end = decode_stream(first + second, 0)
    assert end == len(first)
    np.testing.assert_array_equal(decode_stream(first + second, end)[0], [9, 9])


def test_corrupt_streams_are_rejected():
    stream = entropy_encode([1, 2, 2, 3, 3, 3])
    with pytest.raises(CorruptStream):
        entropy_decode(stream[:-1])
    with pytest.raises(CorruptStream):
        entropy_decode(stream + b"\x00")
    # a table whose lengths break the Kraft inequality
    bad = struct.pack("<II", 3, 3) + b"".join(struct.pack("<IB", s, 1) for s in (0, 1, 2))
    bad += struct.pack("<I", 1) + b"\x00"
    with pytest.raises(CorruptStream):
        entropy_decode(bad)


def test_quantization_error_is_bounded():
    values = torch.linspace(-1.3, 2.7, 1001)
    for bits in (2, 4, 8, 16):
        codes, spec = quantize(values, bits)
        assert int(codes.min()) >= 0 and int(codes.max()) <= 2**bits - 1
        restored = dequantize(codes, spec)
        assert float((restored - values.double()).abs().max()) <= spec.scale / 2 + 1e-6


def test_quantization_of_constant_tensor():
    for value, dtype in ((0.25, torch.float32), (0.1, torch.float64)):
        constant = torch.full((5,), value, dtype=dtype)
        codes, spec = quantize(constant, 8)
        assert spec.is_constant
        assert int(codes.abs().sum()) == 0
        assert torch.equal(dequantize(codes, spec, dtype), constant)


def test_quantization_reconstructs_grid_values_exactly():
    for dtype in (torch.float64, torch.float32):
        values = torch.linspace(0.0, 1.0, 256, dtype=dtype)
        codes, spec = quantize(values, 8)
        assert torch.equal(codes, torch.arange(256))
        assert torch.equal(dequantize(codes, spec, dtype), values)


def test_quantization_bounds_are_float32():
    spec = quant_spec(torch.tensor([0.1, 0.7], dtype=torch.float64), 8)
    assert float(np.float32(spec.minimum)) == spec.minimum <= 0.1
    assert float(np.float32(spec.maximum)) == spec.maximum >= 0.7


def test_quantization_rejects_bad_input():
    with pytest.raises(NonFiniteInput):
        quantize(torch.tensor([0.0, float("inf")]), 8)
    with pytest.raises(ConfigMismatch):
        quantize(torch.zeros(3), 1)


def test_prune_removes_smallest_weights(toy_model):
    store = parameter_store(toy_model)
    names = prunable_names(store)
    assert names and not any(name.startswith("codes.") for name in names)
    assert all(name.endswith("weight") for name in names)
    result = prune(store, 0.4)
    total = sum(store[name].numel() for name in names)
    assert result.pruned_count == round(0.4 * total)
    kept = torch.cat([store[n][result.masks[n]].abs().reshape(-1) for n in names])
    dropped = torch.cat([store[n][~result.masks[n]].abs().reshape(-1) for n in names])
    assert float(dropped.max()) <= float(kept.min())
    for name in names:
        assert bool((result.store[name][~result.masks[name]] == 0).all())
    torch.testing.assert_close(result.store["codes.static_grid"], store["codes.static_grid"])


def test_prune_zero_sparsity_is_identity(toy_model):
    store = parameter_store(toy_model)
    result = prune(store, 0.0)
    assert result.pruned_count == 0
    with pytest.raises(ConfigMismatch):
        prune(store, 1.0)


def test_container_layout_and_restore(toy_model):
    compressed = compress_model(toy_model, sparsity=0.0, bits=8)
    data = compressed.to_bytes()
    assert data[:4] == MAGIC
    assert compressed.byte_length == len(data)
    restored = decompress_model(CompressedModel.from_bytes(data))
    assert param_count(restored) == param_count(toy_model)
    for (name, a), (_, b) in zip(toy_model.named_parameters(), restored.named_parameters()):
        span = float(a.max() - a.min())
        assert float((a - b).abs().max()) <= span / 255 / 2 + 1e-6, name


def test_compression_is_a_fixed_point(toy_model):
    for sparsity in (0.0, 0.3):
        first = compress_model(toy_model, sparsity=sparsity, bits=8).to_bytes()
        again = decompress_model(CompressedModel.from_bytes(first))
        second = compress_model(again, sparsity=sparsity, bits=8).to_bytes()
        assert first == second


def test_pruning_shrinks_the_bitstream(toy_model):
    dense = compress_model(toy_model, sparsity=0.0, bits=8).byte_length
    sparse = compress_model(toy_model, sparsity=0.5, bits=8).byte_length
    assert sparse < dense
    assert compress_model(toy_model, bits=4).byte_length < dense


def test_bpp_uses_the_represented_video(toy_model):
    compressed = compress_model(toy_model, bits=8)
    expected = compressed.byte_length * 8 / (8 * 16 * 32)
    assert compressed.bpp() == pytest.approx(expected)


def test_bitstream_header_errors(toy_model):
    data = compress_model(toy_model, bits=6).to_bytes()
    with pytest.raises(CorruptStream):
        CompressedModel.from_bytes(b"XXXX" + data[4:])
    with pytest.raises(VersionMismatch):
        CompressedModel.from_bytes(data[:4] + struct.pack("<H", 99) + data[6:])
    with pytest.raises(CorruptStream):
        CompressedModel.from_bytes(data[: len(data) // 2])


def test_bitstream_file_round_trip(tmp_path, toy_model):
    compressed = compress_model(toy_model, bits=8)
    path = tmp_path / "model.dsnv"
    assert write_bitstream(compressed, path) == path.stat().st_size
    assert read_bitstream(path).to_bytes() == compressed.to_bytes()


def test_rate_distortion_sweep(toy_model, toy_video):
    rows = rate_distortion_sweep(toy_model, toy_video, 0.0, [4, 8], indices=[0, 3])
    assert [row.bits for row in rows] == [4, 8]
    assert rows[0].bytes < rows[1].bytes
    assert rows[0].bpp < rows[1].bpp
    assert all(math.isfinite(row.psnr) for row in rows)


def test_uniform_bytes_are_incompressible():
    rng = np.random.default_rng(1)
    symbols = rng.integers(0, 256, size=10_000)
    stream = entropy_encode(symbols)
    np.testing.assert_array_equal(entropy_decode(stream), symbols)
    assert len(stream) >= 0.98 * len(symbols)


def test_random_streams_round_trip():
    rng = np.random.default_rng(2)
    for _ in range(25):
        size = int(rng.integers(1, 400))
        alphabet = int(rng.integers(1, 70_000))
        symbols = rng.integers(0, alphabet, size=size)
        np.testing.assert_array_equal(entropy_decode(entropy_encode(symbols)), symbols)


def test_sixteen_bit_model_keeps_quality(toy_model, toy_video):
    indices = list(range(toy_video.frame_count))
    before = evaluate(toy_model, toy_video, indices, with_ms_ssim=False).mean_psnr
    restored = decompress_model(compress_model(toy_model, bits=16))
    after = evaluate(restored, toy_video, indices, with_ms_ssim=False).mean_psnr
    assert abs(before - after) < 0.1
