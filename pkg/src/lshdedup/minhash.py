"""MinHash signatures over hashed shingle sets.

Each of the ``k`` hash functions is an affine map ``x -> a*x + b (mod 2**64)``
with ``a`` odd, so every map is a bijection on 64-bit words. Arithmetic is done
in numpy ``uint64``, which wraps modulo 2**64 for free.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .text import ShingleSet

MAX_HASH = np.uint64(0xFFFF_FFFF_FFFF_FFFF)
_SEED_MASK = (1 << 64) - 1
# bounds the (k x chunk) temporary in sign()
_CHUNK = 4096


class FamilyMismatchError(ValueError):
    """Raised when comparing signatures produced by different hash families."""


@dataclass(frozen=True, eq=False)
class HashFamily:
    k: int
    seed: int
    a: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, HashFamily):
            return NotImplemented
        return (
            self.k == other.k
            and self.seed == other.seed
            and np.array_equal(self.a, other.a)
            and np.array_equal(self.b, other.b)
        )

    def params(self) -> list[tuple[int, int]]:
        return [(int(a), int(b)) for a, b in zip(self.a, self.b)]


@dataclass(frozen=True, eq=False)
class MinHashSignature:
    doc_id: str
    values: np.ndarray = field(repr=False)
    empty_flag: bool
    seed: int

    @property
    def k(self) -> int:
        return int(self.values.size)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MinHashSignature):
            return NotImplemented
        return (
            self.doc_id == other.doc_id
            and self.empty_flag == other.empty_flag
            and self.seed == other.seed
            and np.array_equal(self.values, other.values)
        )


def make_family(k: int, seed: int) -> HashFamily:
    """Derive ``k`` (a, b) pairs from a PCG64 stream seeded with ``seed``."""
    if k < 1:
        raise ValueError(f"number of hash functions must be >= 1, got {k}")
    seed = int(seed) & _SEED_MASK
    rng = np.random.Generator(np.random.PCG64(seed))
    a = rng.integers(0, 2**64, size=k, dtype=np.uint64, endpoint=False) | np.uint64(1)
    b = rng.integers(0, 2**64, size=k, dtype=np.uint64, endpoint=False)
    a.setflags(write=False)
    b.setflags(write=False)
    return HashFamily(k, seed, a, b)


def sign(s: ShingleSet, family: HashFamily) -> MinHashSignature:
    if s.cardinality == 0:
        values = np.full(family.k, MAX_HASH, dtype=np.uint64)
        return MinHashSignature(s.doc_id, values, True, family.seed)
    a = family.a[:, None]
    b = family.b[:, None]
    values = np.full(family.k, MAX_HASH, dtype=np.uint64)
    x = s.shingles
    for start in range(0, x.size, _CHUNK):
        block = np.multiply(a, x[None, start : start + _CHUNK])
        block += b
        np.minimum(values, block.min(axis=1), out=values)
    return MinHashSignature(s.doc_id, values, False, family.seed)


def estimate_jaccard(sig1: MinHashSignature, sig2: MinHashSignature) -> float:
    """Fraction of agreeing signature positions.

    Two empty signatures count as identical; an empty signature never
    matches a non-empty one.
    """
    if sig1.k != sig2.k or sig1.seed != sig2.seed:
        raise FamilyMismatchError(
            f"signatures come from different families (k={sig1.k}/{sig2.k}, seed={sig1.seed}/{sig2.seed})"
        )
    if sig1.empty_flag or sig2.empty_flag:
        return 1.0 if sig1.empty_flag and sig2.empty_flag else 0.0
    return float(np.count_nonzero(sig1.values == sig2.values)) / sig1.k


def intersection_size(x: np.ndarray, y: np.ndarray) -> int:
    """Size of the intersection of two sorted, repeat-free uint64 arrays."""
    if x.size > y.size:
        x, y = y, x
    if x.size == 0:
        return 0
    pos = np.searchsorted(y, x)
    pos[pos == y.size] = 0
    return int(np.count_nonzero(y[pos] == x))


def exact_jaccard(s1: ShingleSet, s2: ShingleSet) -> float:
    if s1.n != s2.n:
        raise ValueError(f"shingle sets use different n-gram sizes ({s1.n} vs {s2.n})")
    c1, c2 = s1.cardinality, s2.cardinality
    if c1 == 0 or c2 == 0:
        return 1.0 if c1 == c2 else 0.0
    inter = intersection_size(s1.shingles, s2.shingles)
    return inter / (c1 + c2 - inter)
