"""Labeled near-duplicate benchmark construction.

A clean corpus is split into donor articles and originals. A seeded sample of
originals is turned into near-duplicates by deleting some of their sentences
and splicing in sentences taken from the donor articles, until the
resemblance between source and copy lands inside a target band.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
import xxhash

from .text import Document, normalize, split_sentences

logger = logging.getLogger(__name__)

ORIGINAL = "original"
DUPLICATE = "duplicate"
DUP_SUFFIX = "~dup"
MIN_SOURCE_SENTENCES = 10
_SEED_MASK = (1 << 64) - 1


class SynthesisError(ValueError):
    pass


class PerturbationError(SynthesisError):
    pass


def word_jaccard(text_a: str, text_b: str) -> float:
    """Jaccard similarity of the word sets of two normalized texts."""
    a = set(normalize(text_a).split())
    b = set(normalize(text_b).split())
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


RESEMBLANCE_METRICS: dict[str, Callable[[str, str], float]] = {"word-jaccard": word_jaccard}


@dataclass(frozen=True)
class SynthConfig:
    duplicate_fraction: float = 0.25
    resemblance_low: float = 0.87
    resemblance_high: float = 0.94
    donor_pool_size: int = 2000
    donor_article_count: int = 300
    donor_len_min: int = 8
    donor_len_max: int = 20
    rng_seed: int = 0
    max_attempts: int = 50
    resemblance_metric: str = "word-jaccard"

    def __post_init__(self) -> None:
        if not 0.0 <= self.duplicate_fraction < 1.0:
            raise ValueError(f"duplicate_fraction must lie in [0, 1), got {self.duplicate_fraction}")
        if not 0.0 < self.resemblance_low < self.resemblance_high < 1.0:
            raise ValueError(
                f"need 0 < resemblance_low < resemblance_high < 1, got {self.resemblance_low}, {self.resemblance_high}"
            )
        if self.donor_pool_size < 1 or self.donor_article_count < 1:
            raise ValueError("donor_pool_size and donor_article_count must be positive")
        if not 1 <= self.donor_len_min <= self.donor_len_max:
            raise ValueError(f"bad donor length range [{self.donor_len_min}, {self.donor_len_max}]")
        if self.resemblance_metric not in RESEMBLANCE_METRICS:
            raise ValueError(f"unknown resemblance metric {self.resemblance_metric!r}")

    @property
    def metric(self) -> Callable[[str, str], float]:
        return RESEMBLANCE_METRICS[self.resemblance_metric]

    def in_band(self, value: float) -> bool:
        return self.resemblance_low <= value <= self.resemblance_high

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class DonorPool:
    sentences: list[str]
    article_ids: list[str]


@dataclass
class LabeledCorpus:
    documents: list[Document]
    labels: dict[str, str]
    provenance: dict[str, str]
    donor_ids: list[str] = field(default_factory=list)
    skipped_sources: list[str] = field(default_factory=list)

    @property
    def originals(self) -> list[Document]:
        return [d for d in self.documents if self.labels[d.id] == ORIGINAL]

    @property
    def duplicates(self) -> list[Document]:
        return [d for d in self.documents if self.labels[d.id] == DUPLICATE]

    def by_id(self) -> dict[str, Document]:
        return {d.id: d for d in self.documents}


def _rng(seed: int, *keys: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed) & _SEED_MASK, *keys])))


def doc_rng(seed: int, doc_id: str) -> np.random.Generator:
    """Per-document stream, so results do not depend on processing order."""
    return _rng(seed, 1, xxhash.xxh64_intdigest(doc_id.encode("utf-8")))


def build_donor_pool(corpus: Sequence[Document], cfg: SynthConfig) -> tuple[DonorPool, list[Document]]:
    if len(corpus) <= cfg.donor_article_count:
        raise SynthesisError(
            f"corpus has {len(corpus)} documents; need more than donor_article_count={cfg.donor_article_count}"
        )
    rng = _rng(cfg.rng_seed, 0)
    picked = np.sort(rng.choice(len(corpus), size=cfg.donor_article_count, replace=False))
    picked_set = set(picked.tolist())
    donors = [corpus[i] for i in picked]

    qualifying: dict[str, None] = {}
    for doc in donors:
        for sentence in split_sentences(doc).sentences:
            if cfg.donor_len_min <= len(sentence.split()) <= cfg.donor_len_max:
                qualifying.setdefault(sentence)
    if len(qualifying) < cfg.donor_pool_size:
        raise SynthesisError(
            f"only {len(qualifying)} donor sentences of {cfg.donor_len_min}-{cfg.donor_len_max} words; "
            f"need {cfg.donor_pool_size}"
        )
    pool = list(qualifying)
    chosen = np.sort(rng.choice(len(pool), size=cfg.donor_pool_size, replace=False))
    remaining = [doc for i, doc in enumerate(corpus) if i not in picked_set]
    return DonorPool([pool[i] for i in chosen], [d.id for d in donors]), remaining


def edit_sentences(
    sentences: Sequence[str],
    remove: int,
    insert: int,
    donors: Sequence[str],
    rng: np.random.Generator,
) -> list[str]:
    """Drop ``remove`` sentences and splice ``insert`` donor sentences at random positions."""
    drop = set(rng.choice(len(sentences), size=remove, replace=False).tolist()) if remove else set()
    kept = [s for i, s in enumerate(sentences) if i not in drop]
    if insert:
        present = set(sentences)
        for idx in rng.permutation(len(donors)):
            if insert == 0:
                break
            donor = donors[idx]
            if donor in present:
                continue
            kept.insert(int(rng.integers(0, len(kept) + 1)), donor)
            present.add(donor)
            insert -= 1
    return kept


def perturb(
    doc: Document,
    donors: Sequence[str],
    cfg: SynthConfig,
    rng: np.random.Generator,
    new_id: str | None = None,
) -> Document:
    """Near-duplicate of ``doc`` whose resemblance to it falls in the configured band.

    The number of edited sentences is adjusted after each attempt: up when
    the copy is still too similar, down when it drifted too far. Each edit
    budget is split at random between removals and insertions, so either
    count may be zero.
    """
    sentences = split_sentences(doc).sentences
    m = len(sentences)
    if m < MIN_SOURCE_SENTENCES:
        raise PerturbationError(f"{doc.id}: {m} sentences, need at least {MIN_SOURCE_SENTENCES}")
    metric = cfg.metric
    target = (cfg.resemblance_low + cfg.resemblance_high) / 2
    edits = max(1, round(m * (1.0 - target)))
    for _ in range(cfg.max_attempts):
        remove = min(int(rng.binomial(edits, 0.5)), m - 1)
        insert = min(edits - remove, len(donors))
        text = " ".join(edit_sentences(sentences, remove, insert, donors, rng))
        value = metric(doc.text, text)
        if cfg.in_band(value):
            return Document(new_id or doc.id + DUP_SUFFIX, text)
        if value > cfg.resemblance_high:
            edits = min(edits + 1, 2 * m)
        else:
            edits = max(1, edits - 1)
    raise PerturbationError(
        f"{doc.id}: resemblance band [{cfg.resemblance_low}, {cfg.resemblance_high}] "
        f"not reached in {cfg.max_attempts} attempts"
    )


def duplicate_count(fraction: float, originals: int) -> int:
    # fractions such as 1258/5028 must not round up past the intended count
    return max(0, math.ceil(fraction * originals - 1e-9))


def _perturb_task(doc: Document, donors: Sequence[str], cfg: SynthConfig) -> Document | str:
    try:
        return perturb(doc, donors, cfg, doc_rng(cfg.rng_seed, doc.id))
    except PerturbationError as exc:
        return str(exc)


def synthesize(corpus: Sequence[Document], cfg: SynthConfig, workers: int = 1) -> LabeledCorpus:
    ids = [d.id for d in corpus]
    if len(set(ids)) != len(ids):
        raise SynthesisError("corpus ids are not unique")
    pool, remaining = build_donor_pool(corpus, cfg)
    wanted = duplicate_count(cfg.duplicate_fraction, len(remaining))
    taken_ids = {d.id for d in corpus}

    eligible = [
        d for d in remaining
        if len(split_sentences(d).sentences) >= MIN_SOURCE_SENTENCES and d.id + DUP_SUFFIX not in taken_ids
    ]
    if wanted > len(eligible):
        raise SynthesisError(f"{wanted} duplicates requested but only {len(eligible)} articles are long enough")
    order = _rng(cfg.rng_seed, 2).permutation(len(eligible))

    made: dict[str, Document] = {}
    skipped: list[str] = []
    cursor = 0
    executor = ProcessPoolExecutor(max_workers=workers) if workers > 1 and wanted > 64 else None
    try:
        while len(made) < wanted:
            if cursor >= len(order):
                raise SynthesisError(
                    f"only {len(made)} of {wanted} duplicates reached the resemblance band "
                    f"({len(skipped)} sources skipped)"
                )
            batch = [eligible[i] for i in order[cursor : cursor + (wanted - len(made))]]
            cursor += len(batch)
            if executor is None:
                results = [_perturb_task(d, pool.sentences, cfg) for d in batch]
            else:
                results = list(executor.map(_perturb_task, batch, [pool.sentences] * len(batch), [cfg] * len(batch)))
            for source, result in zip(batch, results):
                if isinstance(result, Document):
                    made[source.id] = result
                else:
                    logger.info("skipping source: %s", result)
                    skipped.append(source.id)
    finally:
        if executor is not None:
            executor.shutdown()

    duplicates = [made[d.id] for d in remaining if d.id in made]
    labels = {d.id: ORIGINAL for d in remaining}
    labels.update({d.id: DUPLICATE for d in duplicates})
    provenance = {dup.id: src for src, dup in made.items()}
    provenance = {dup.id: provenance[dup.id] for dup in duplicates}
    return LabeledCorpus(list(remaining) + duplicates, labels, provenance, pool.article_ids, sorted(skipped))
