"""Banded LSH index over MinHash signatures, candidate retrieval and dedup scan."""

from __future__ import annotations

import logging
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np
import xxhash

from .minhash import HashFamily, MinHashSignature, estimate_jaccard, exact_jaccard, make_family, sign
from .text import Document, ShingleSet, shingle

logger = logging.getLogger(__name__)

DEFAULT_SEED = 1
DEFAULT_BUCKET_CAP = 10_000
VERIFY_MODES = ("exact", "estimate")
_INTEGRATION_POINTS = 1000


class UnknownDocumentError(KeyError):
    pass


class DuplicateDocumentError(ValueError):
    pass


def _false_positive_mass(t: float, b: np.ndarray, r: np.ndarray) -> np.ndarray:
    s = t * (np.arange(_INTEGRATION_POINTS) + 0.5) / _INTEGRATION_POINTS
    prob = 1.0 - (1.0 - s[None, :] ** r[:, None]) ** b[:, None]
    return prob.sum(axis=1) * (t / _INTEGRATION_POINTS)


def _false_negative_mass(t: float, b: np.ndarray, r: np.ndarray) -> np.ndarray:
    s = t + (1.0 - t) * (np.arange(_INTEGRATION_POINTS) + 0.5) / _INTEGRATION_POINTS
    miss = (1.0 - s[None, :] ** r[:, None]) ** b[:, None]
    return miss.sum(axis=1) * ((1.0 - t) / _INTEGRATION_POINTS)


def banding_error(k: int, t: float) -> dict[tuple[int, int], float]:
    """False-positive plus false-negative mass for every (b, r) with b*r <= k."""
    pairs = [(b, r) for b in range(1, k + 1) for r in range(1, k // b + 1)]
    b = np.array([p[0] for p in pairs], dtype=np.float64)
    r = np.array([p[1] for p in pairs], dtype=np.float64)
    err = _false_positive_mass(t, b, r) + _false_negative_mass(t, b, r)
    return dict(zip(pairs, err.tolist()))


def choose_bands(k: int, t: float) -> tuple[int, int]:
    """Pick the (bands, rows) split of a k-signature that best separates at ``t``.

    Ties go to the split using more signature positions, then to more bands.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not 0.0 < t < 1.0:
        raise ValueError(f"threshold must lie in (0, 1), got {t}")
    errors = banding_error(k, t)
    return min(errors, key=lambda br: (errors[br], -br[0] * br[1], -br[0]))


def candidate_probability(s: float, b: int, r: int) -> float:
    return 1.0 - (1.0 - s**r) ** b


@dataclass(frozen=True)
class LshParams:
    k: int
    n: int
    threshold: float
    bands: int
    rows: int
    verify_mode: str = "exact"

    def __post_init__(self) -> None:
        if self.k < 1 or self.n < 1 or self.bands < 1 or self.rows < 1:
            raise ValueError(f"k, n, bands and rows must be positive: {self}")
        if self.bands * self.rows > self.k:
            raise ValueError(f"bands*rows = {self.bands * self.rows} exceeds k = {self.k}")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError(f"threshold must lie in (0, 1), got {self.threshold}")
        if self.verify_mode not in VERIFY_MODES:
            raise ValueError(f"verify_mode must be one of {VERIFY_MODES}, got {self.verify_mode!r}")

    @classmethod
    def for_threshold(cls, k: int, n: int, threshold: float, verify_mode: str = "exact") -> LshParams:
        bands, rows = choose_bands(k, threshold)
        return cls(k, n, threshold, bands, rows, verify_mode)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, order=True)
class DuplicatePair:
    id_a: str
    id_b: str
    similarity: float


@dataclass(frozen=True)
class Cluster:
    representative: str
    removable: list[str]

    @property
    def members(self) -> list[str]:
        return [self.representative, *self.removable]

    @property
    def size(self) -> int:
        return 1 + len(self.removable)


@dataclass
class DedupResult:
    pairs: list[DuplicatePair]
    clusters: list[Cluster]

    @property
    def removable_ids(self) -> set[str]:
        return {doc_id for c in self.clusters for doc_id in c.removable}


def canonical(id_a: str, id_b: str) -> tuple[str, str]:
    return (id_a, id_b) if id_a < id_b else (id_b, id_a)


def _encode(doc: Document, n: int, family: HashFamily) -> tuple[ShingleSet, MinHashSignature]:
    shingles = shingle(doc, n)
    return shingles, sign(shingles, family)


def _encode_chunk(docs: list[Document], n: int, family: HashFamily) -> list[tuple[ShingleSet, MinHashSignature]]:
    return [_encode(doc, n, family) for doc in docs]


def band_keys(values: np.ndarray, bands: int, rows: int) -> list[int]:
    """64-bit key per band; the band index seeds the hash so bands never collide."""
    raw = np.ascontiguousarray(values[: bands * rows], dtype="<u8")
    return [
        xxhash.xxh3_64_intdigest(raw[i * rows : (i + 1) * rows].tobytes(), seed=i)
        for i in range(bands)
    ]


@dataclass
class LshIndex:
    params: LshParams
    family_seed: int = DEFAULT_SEED
    family: HashFamily = field(init=False, repr=False)
    buckets: list[dict[int, list[str]]] = field(init=False, repr=False)
    signatures: dict[str, MinHashSignature] = field(init=False, repr=False)
    shingle_store: dict[str, ShingleSet] | None = field(init=False, repr=False)
    _keys: dict[str, list[int]] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.family = make_family(self.params.k, self.family_seed)
        self.family_seed = self.family.seed
        self.buckets = [defaultdict(list) for _ in range(self.params.bands)]
        self.signatures = {}
        self.shingle_store = {} if self.params.verify_mode == "exact" else None
        self._keys = {}

    @property
    def doc_count(self) -> int:
        return len(self.signatures)

    def __len__(self) -> int:
        return len(self.signatures)

    def __contains__(self, doc_id: object) -> bool:
        return doc_id in self.signatures

    def ids(self) -> list[str]:
        return list(self.signatures)

    def insert(self, doc: Document) -> None:
        if doc.id in self.signatures:
            raise DuplicateDocumentError(f"document id already indexed: {doc.id!r}")
        self._add(*_encode(doc, self.params.n, self.family))

    def insert_shingles(self, shingles: ShingleSet) -> None:
        """Index a precomputed shingle set (its n must match the index)."""
        if shingles.n != self.params.n:
            raise ValueError(f"shingle set has n={shingles.n}, index expects n={self.params.n}")
        if shingles.doc_id in self.signatures:
            raise DuplicateDocumentError(f"document id already indexed: {shingles.doc_id!r}")
        self._add(shingles, sign(shingles, self.family))

    def insert_many(self, docs: Sequence[Document], workers: int = 1, chunk_size: int = 256) -> None:
        """Bulk insert; signatures may be computed in worker processes.

        Insertion into the band maps stays sequential in input order, so the
        resulting index does not depend on ``workers``.
        """
        seen = set(self.signatures)
        for doc in docs:
            if doc.id in seen:
                raise DuplicateDocumentError(f"document id already indexed: {doc.id!r}")
            seen.add(doc.id)
        if workers <= 1 or len(docs) <= chunk_size:
            encoded = (_encode(doc, self.params.n, self.family) for doc in docs)
            for shingles, sig in encoded:
                self._add(shingles, sig)
            return
        chunks = [list(docs[i : i + chunk_size]) for i in range(0, len(docs), chunk_size)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = pool.map(_encode_chunk, chunks, [self.params.n] * len(chunks), [self.family] * len(chunks))
            for chunk in results:
                for shingles, sig in chunk:
                    self._add(shingles, sig)

    def _add(self, shingles: ShingleSet, sig: MinHashSignature) -> None:
        doc_id = sig.doc_id
        keys = band_keys(sig.values, self.params.bands, self.params.rows)
        for band, key in zip(self.buckets, keys):
            band[key].append(doc_id)
        self.signatures[doc_id] = sig
        self._keys[doc_id] = keys
        if self.shingle_store is not None:
            self.shingle_store[doc_id] = shingles

    def _require(self, doc_id: str) -> None:
        if doc_id not in self.signatures:
            raise UnknownDocumentError(doc_id)

    def candidates(self, doc_id: str) -> set[str]:
        self._require(doc_id)
        found: set[str] = set()
        for band, key in zip(self.buckets, self._keys[doc_id]):
            found.update(band[key])
        found.discard(doc_id)
        return found

    def similarity(self, id_a: str, id_b: str) -> float:
        self._require(id_a)
        self._require(id_b)
        if self.shingle_store is not None:
            return exact_jaccard(self.shingle_store[id_a], self.shingle_store[id_b])
        return estimate_jaccard(self.signatures[id_a], self.signatures[id_b])

    def verify(self, id_a: str, id_b: str) -> DuplicatePair | None:
        sim = self.similarity(id_a, id_b)
        if sim >= self.params.threshold:
            return DuplicatePair(*canonical(id_a, id_b), sim)
        return None

    def candidate_pairs(self, bucket_cap: int = DEFAULT_BUCKET_CAP) -> list[tuple[str, str]]:
        """Every co-bucketed pair once, canonically ordered and sorted.

        Buckets above ``bucket_cap`` are still expanded in full; they are only
        reported, since dropping them would hide duplicates.
        """
        pairs: set[tuple[str, str]] = set()
        for band_no, band in enumerate(self.buckets):
            for key, members in band.items():
                if len(members) < 2:
                    continue
                if len(members) > bucket_cap:
                    logger.warning(
                        "band %d bucket %016x holds %d documents (cap %d); verifying all %d pairs",
                        band_no, key, len(members), bucket_cap, len(members) * (len(members) - 1) // 2,
                    )
                pairs.update(canonical(a, b) for a, b in combinations(members, 2))
        return sorted(pairs)

    def scored_pairs(self, bucket_cap: int = DEFAULT_BUCKET_CAP) -> list[tuple[str, str, float]]:
        """Similarity of every candidate pair, regardless of threshold."""
        return [(a, b, self.similarity(a, b)) for a, b in self.candidate_pairs(bucket_cap)]


class _UnionFind:
    def __init__(self) -> None:
        self.parent: dict[str, str] = {}

    def find(self, x: str) -> str:
        parent = self.parent
        root = x
        while parent.setdefault(root, root) != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, x: str, y: str) -> None:
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            # smaller id becomes root, so the root is also the representative
            if ry < rx:
                rx, ry = ry, rx
            self.parent[ry] = rx


def cluster_pairs(pairs: Iterable[DuplicatePair]) -> list[Cluster]:
    """Connected components of the pair graph; smallest id is kept."""
    uf = _UnionFind()
    for p in pairs:
        uf.union(p.id_a, p.id_b)
    groups: dict[str, list[str]] = defaultdict(list)
    for node in uf.parent:
        groups[uf.find(node)].append(node)
    clusters = []
    for members in groups.values():
        members.sort()
        clusters.append(Cluster(members[0], members[1:]))
    clusters.sort(key=lambda c: c.representative)
    return clusters


def pairs_from_scored(scored: Iterable[tuple[str, str, float]], threshold: float) -> list[DuplicatePair]:
    return [DuplicatePair(a, b, sim) for a, b, sim in scored if sim >= threshold]


def dedup_scan(index: LshIndex, bucket_cap: int = DEFAULT_BUCKET_CAP) -> DedupResult:
    pairs = pairs_from_scored(index.scored_pairs(bucket_cap), index.params.threshold)
    return DedupResult(pairs, cluster_pairs(pairs))


def build_index(
    docs: Sequence[Document],
    params: LshParams,
    seed: int = DEFAULT_SEED,
    workers: int = 1,
) -> LshIndex:
    index = LshIndex(params, seed)
    index.insert_many(docs, workers=workers)
    return index
