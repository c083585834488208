"""Text normalization, sentence splitting and character n-gram shingling."""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field

import numpy as np
import xxhash

# Published seed for shingle hashing; changing it invalidates every stored index.
SHINGLE_SEED = 0x5D1C_E5A1_7B0F_2C49

_WS_RE = re.compile(r"\s+")
_SENTENCE_BREAK_RE = re.compile(r"(?<=[.!?])\s+")


@dataclass(frozen=True)
class Document:
    id: str
    text: str

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("document id must be non-empty")


@dataclass(frozen=True, eq=False)
class ShingleSet:
    """Distinct hashed character n-grams of one document.

    ``shingles`` is a sorted ``uint64`` array without repeats, which keeps
    memory at 8 bytes per shingle and makes set intersection a merge.
    """

    doc_id: str
    n: int
    shingles: np.ndarray = field(repr=False)

    @property
    def cardinality(self) -> int:
        return int(self.shingles.size)

    def __len__(self) -> int:
        return self.cardinality

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ShingleSet):
            return NotImplemented
        return (
            self.doc_id == other.doc_id
            and self.n == other.n
            and np.array_equal(self.shingles, other.shingles)
        )

    @classmethod
    def from_hashes(cls, doc_id: str, n: int, hashes) -> ShingleSet:
        """Build from any iterable of 64-bit ints (used for raw-set tests and loading)."""
        return cls(doc_id, n, np.unique(np.fromiter(hashes, dtype=np.uint64)))


@dataclass(frozen=True)
class SentenceList:
    doc_id: str
    sentences: list[str]


def normalize(text: str) -> str:
    """Lowercase, NFC-compose, collapse whitespace runs to one space and strip."""
    text = unicodedata.normalize("NFC", text.lower())
    return _WS_RE.sub(" ", text).strip()


def shingle_hash(window: str) -> int:
    return xxhash.xxh3_64_intdigest(window.encode("utf-8"), seed=SHINGLE_SEED)


def shingle(doc: Document, n: int) -> ShingleSet:
    """Hash every length-``n`` character window of the normalized text (stride 1)."""
    if n < 1:
        raise ValueError(f"n-gram size must be >= 1, got {n}")
    text = normalize(doc.text)
    windows = {text[i : i + n] for i in range(len(text) - n + 1)}
    hashes = np.fromiter(
        (xxhash.xxh3_64_intdigest(w.encode("utf-8"), seed=SHINGLE_SEED) for w in windows),
        dtype=np.uint64,
        count=len(windows),
    )
    # distinct windows can still collide after hashing
    return ShingleSet(doc.id, n, np.unique(hashes))


def split_sentences(doc: Document) -> SentenceList:
    """Split at '.', '!' or '?' followed by whitespace; terminators stay attached."""
    parts = (p.strip() for p in _SENTENCE_BREAK_RE.split(doc.text))
    return SentenceList(doc.id, [p for p in parts if p])
