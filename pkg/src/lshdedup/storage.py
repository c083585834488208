"""Binary index file format.

Layout, every integer little-endian 64-bit::

    magic        8 bytes  b"LSHDIDX\\0"
    header       version, family_seed, k, n, threshold (float64), bands, rows,
                 verify_mode (0 exact, 1 estimate), N
    doc ids      N x (byte length, UTF-8 bytes)
    signatures   N x k values, then N empty flags
    band maps    per band: bucket count, then per bucket: key, size, doc indices
    shingles     exact mode only; per doc: count, then sorted hashes
    checksum     xxh3-64 of every preceding byte
"""

from __future__ import annotations

import struct
from collections import defaultdict
from pathlib import Path

import numpy as np
import xxhash

from .lsh import LshIndex, LshParams
from .minhash import MinHashSignature
from .text import ShingleSet

MAGIC = b"LSHDIDX\x00"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<QQQQdQQQQ")
_U64 = struct.Struct("<Q")
_MODES = {"exact": 0, "estimate": 1}


class IndexFormatError(ValueError):
    pass


class ChecksumError(IndexFormatError):
    pass


class VersionMismatchError(IndexFormatError):
    pass


def dumps_index(index: LshIndex) -> bytes:
    p = index.params
    ids = index.ids()
    position = {doc_id: i for i, doc_id in enumerate(ids)}
    parts = [
        MAGIC,
        _HEADER.pack(
            FORMAT_VERSION, index.family_seed, p.k, p.n, p.threshold, p.bands, p.rows,
            _MODES[p.verify_mode], len(ids),
        ),
    ]
    for doc_id in ids:
        raw = doc_id.encode("utf-8")
        parts += [_U64.pack(len(raw)), raw]
    sigs = [index.signatures[i] for i in ids]
    if sigs:
        parts.append(np.stack([s.values for s in sigs]).astype("<u8").tobytes())
    parts.append(np.array([s.empty_flag for s in sigs], dtype="<u8").tobytes())
    for band in index.buckets:
        parts.append(_U64.pack(len(band)))
        for key, members in band.items():
            parts += [_U64.pack(key), _U64.pack(len(members))]
            parts.append(np.array([position[m] for m in members], dtype="<u8").tobytes())
    if index.shingle_store is not None:
        for doc_id in ids:
            hashes = index.shingle_store[doc_id].shingles
            parts += [_U64.pack(hashes.size), hashes.astype("<u8").tobytes()]
    body = b"".join(parts)
    return body + _U64.pack(xxhash.xxh3_64_intdigest(body))


class _Reader:
    def __init__(self, data: bytes, offset: int):
        self.data = data
        self.offset = offset

    def take(self, size: int) -> bytes:
        end = self.offset + size
        if end > len(self.data):
            raise IndexFormatError("index file ends early")
        chunk = self.data[self.offset : end]
        self.offset = end
        return chunk

    def u64(self) -> int:
        return _U64.unpack(self.take(8))[0]

    def u64_array(self, count: int) -> np.ndarray:
        return np.frombuffer(self.take(8 * count), dtype="<u8").astype(np.uint64)


def loads_index(data: bytes) -> LshIndex:
    """Rebuild an index; nothing is returned unless the whole file checks out."""
    minimum = len(MAGIC) + _HEADER.size + 8
    if data[: len(MAGIC)] != MAGIC:
        raise IndexFormatError("not an LSH index file (bad magic)")
    if len(data) < minimum:
        raise ChecksumError(f"index file truncated ({len(data)} bytes)")
    body, stored = data[:-8], _U64.unpack(data[-8:])[0]
    if xxhash.xxh3_64_intdigest(body) != stored:
        raise ChecksumError("index checksum mismatch (file truncated or corrupted)")

    reader = _Reader(body, len(MAGIC))
    version, seed, k, n, threshold, bands, rows, mode, count = _HEADER.unpack(reader.take(_HEADER.size))
    if version != FORMAT_VERSION:
        raise VersionMismatchError(f"index format version {version}, this build reads {FORMAT_VERSION}")
    verify_mode = {v: name for name, v in _MODES.items()}.get(mode)
    if verify_mode is None:
        raise IndexFormatError(f"unknown verify mode code {mode}")
    params = LshParams(k, n, threshold, bands, rows, verify_mode)

    ids = [reader.take(reader.u64()).decode("utf-8") for _ in range(count)]
    values = reader.u64_array(count * k).reshape(count, k)
    empty = reader.u64_array(count)

    index = LshIndex(params, seed)
    for i, doc_id in enumerate(ids):
        index.signatures[doc_id] = MinHashSignature(doc_id, values[i].copy(), bool(empty[i]), index.family_seed)
    buckets = []
    for _ in range(bands):
        band: dict[int, list[str]] = defaultdict(list)
        for _ in range(reader.u64()):
            key = reader.u64()
            band[key] = [ids[j] for j in reader.u64_array(reader.u64()).tolist()]
        buckets.append(band)
    index.buckets = buckets
    for doc_id in ids:
        index._keys[doc_id] = []
    for band in buckets:
        for key, members in band.items():
            for doc_id in members:
                index._keys[doc_id].append(key)
    if index.shingle_store is not None:
        for doc_id in ids:
            index.shingle_store[doc_id] = ShingleSet(doc_id, n, reader.u64_array(reader.u64()))
    if reader.offset != len(body):
        raise IndexFormatError(f"{len(body) - reader.offset} unexpected trailing bytes")
    return index


def save_index(index: LshIndex, path: str | Path) -> None:
    Path(path).write_bytes(dumps_index(index))


def load_index(path: str | Path) -> LshIndex:
    return loads_index(Path(path).read_bytes())
