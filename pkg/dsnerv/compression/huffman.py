"""Canonical Huffman coding of integer symbol streams.

Stream layout (little-endian)::

    count u32 | table size u32 | (symbol u32, length u8) * size | payload length u32 | payload

The table is stored in canonical order, so the decoder rebuilds the exact codes.
"""
from __future__ import annotations

import heapq
import struct
from collections import Counter
from typing import Dict, List, Sequence, Tuple

import numpy as np

from ..errors import CorruptStream

MAX_CODE_LENGTH = 255


def code_lengths(frequencies: Dict[int, int]) -> Dict[int, int]:
    """Huffman code length of every symbol; a lone symbol gets length 1."""

    if not frequencies:
        return {}
    if len(frequencies) == 1:
        return {next(iter(frequencies)): 1}
    symbols = sorted(frequencies)
    # leaves are nodes 0..n-1; every merge appends a parent with a larger id
    heap: List[Tuple[int, int]] = [(frequencies[s], node) for node, s in enumerate(symbols)]
    heapq.heapify(heap)
    parent: List[int] = [-1] * len(symbols)
    while len(heap) > 1:
        w1, a = heapq.heappop(heap)
        w2, b = heapq.heappop(heap)
        node = len(parent)
        parent.append(-1)
        parent[a] = node
        parent[b] = node
        heapq.heappush(heap, (w1 + w2, node))
    depth = [0] * len(parent)
    for node in range(len(parent) - 2, -1, -1):
        depth[node] = depth[parent[node]] + 1
    return {s: depth[node] for node, s in enumerate(symbols)}


def canonical_codes(lengths: Dict[int, int]) -> Dict[int, Tuple[int, int]]:
    """``{symbol: (code, length)}`` assigned in (length, symbol) order."""

    codes: Dict[int, Tuple[int, int]] = {}
    code = 0
    prev_length = 0
    for symbol, length in sorted(lengths.items(), key=lambda item: (item[1], item[0])):
        code <<= length - prev_length
        codes[symbol] = (code, length)
        code += 1
        prev_length = length
    return codes


def _check_table(lengths: Dict[int, int]) -> None:
    if any(not 1 <= n <= MAX_CODE_LENGTH for n in lengths.values()):
        raise CorruptStream("code length outside [1, 255]")
    kraft = sum(2.0 ** -n for n in lengths.values())
    if kraft > 1.0 + 1e-12:
        raise CorruptStream("code table violates the prefix condition")


def entropy_encode(symbols: Sequence[int] | np.ndarray) -> bytes:
    values = [int(s) for s in np.asarray(symbols).reshape(-1)]
    if any(s < 0 or s > 0xFFFFFFFF for s in values):
        raise ValueError("symbols must fit an unsigned 32-bit integer")
    lengths = code_lengths(dict(Counter(values)))
    codes = canonical_codes(lengths)
    strings = {symbol: format(code, f"0{length}b") for symbol, (code, length) in codes.items()}

    bits = "".join(strings[s] for s in values)
    pad = (-len(bits)) % 8
    bits += "0" * pad
    payload = int(bits, 2).to_bytes(len(bits) // 8, "big") if bits else b""

    out = bytearray(struct.pack("<II", len(values), len(codes)))
    for symbol, (_, length) in sorted(codes.items(), key=lambda item: (item[1][1], item[0])):
        out += struct.pack("<IB", symbol, length)
    out += struct.pack("<I", len(payload))
    out += payload
    return bytes(out)


def _unpack(fmt: str, data: bytes, offset: int) -> Tuple[Tuple, int]:
    size = struct.calcsize(fmt)
    if offset + size > len(data):
        raise CorruptStream("stream ends inside a header field")
    return struct.unpack_from(fmt, data, offset), offset + size


def decode_stream(data: bytes, offset: int = 0) -> Tuple[np.ndarray, int]:
    """Decode one stream starting at ``offset``; returns the symbols and the next offset."""

    (count, table_size), offset = _unpack("<II", data, offset)
    lengths: Dict[int, int] = {}
    for _ in range(table_size):
        (symbol, length), offset = _unpack("<IB", data, offset)
        if symbol in lengths:
            raise CorruptStream(f"symbol {symbol} listed twice in the code table")
        lengths[symbol] = length
    (payload_length,), offset = _unpack("<I", data, offset)
    end = offset + payload_length
    if end > len(data):
        raise CorruptStream("payload length exceeds the stream")
    payload = data[offset:end]
    if count == 0:
        if table_size or payload_length:
            raise CorruptStream("empty stream carries a table or payload")
        return np.zeros(0, dtype=np.int64), end
    if not lengths:
        raise CorruptStream("non-empty stream without a code table")
    _check_table(lengths)
    if count > payload_length * 8:
        raise CorruptStream(f"{count} symbols cannot fit {payload_length} payload bytes")

    lookup: Dict[Tuple[int, int], int] = {
        (length, code): symbol for symbol, (code, length) in canonical_codes(lengths).items()
    }
    longest = max(lengths.values())
    bits = bin(int.from_bytes(payload, "big"))[2:].zfill(len(payload) * 8) if payload else ""
    out = np.empty(count, dtype=np.int64)
    produced = 0
    code = 0
    length = 0
    for bit in bits:
        code = (code << 1) | (bit == "1")
        length += 1
        symbol = lookup.get((length, code))
        if symbol is not None:
            out[produced] = symbol
            produced += 1
            code = 0
            length = 0
            if produced == count:
                break
        elif length >= longest:
            raise CorruptStream("bit pattern matches no code")
    if produced != count:
        raise CorruptStream(f"payload holds {produced} of {count} symbols")
    return out, end


def entropy_decode(data: bytes) -> np.ndarray:
    symbols, end = decode_stream(data, 0)
    if end != len(data):
        raise CorruptStream(f"{len(data) - end} trailing bytes after the stream")
    return symbols


__all__ = [
    "code_lengths",
    "canonical_codes",
    "entropy_encode",
    "decode_stream",
    "entropy_decode",
]
