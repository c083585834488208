"""ROC/AUC and timing evaluation of detector configurations on labeled corpora."""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Mapping, Sequence

from .lsh import DEFAULT_SEED, LshIndex, LshParams, cluster_pairs, dedup_scan, build_index, pairs_from_scored
from .synth import DUPLICATE, LabeledCorpus
from .text import Document

SCORE_MODES = ("removable", "symmetric")


class EvaluationError(ValueError):
    pass


def score_documents(
    index: LshIndex,
    corpus: LabeledCorpus,
    mode: str = "removable",
    scored_pairs: Iterable[tuple[str, str, float]] | None = None,
) -> dict[str, float]:
    """Continuous duplicate score per document.

    In ``removable`` mode a document scores the highest similarity to any
    candidate with a smaller id, i.e. to a copy the dedup scan would keep in
    its place. ``symmetric`` scores against every candidate. Documents with no
    qualifying candidate score 0.
    """
    if mode not in SCORE_MODES:
        raise ValueError(f"score mode must be one of {SCORE_MODES}, got {mode!r}")
    ids = [d.id for d in corpus.documents]
    if len(ids) != len(index) or any(i not in index for i in ids):
        raise EvaluationError("index and corpus hold different documents")
    scores = dict.fromkeys(ids, 0.0)
    pairs = index.scored_pairs() if scored_pairs is None else scored_pairs
    for a, b, sim in pairs:
        if sim > scores[b]:
            scores[b] = sim
        if mode == "symmetric" and sim > scores[a]:
            scores[a] = sim
    return scores


def compute_roc_auc(
    scores: Mapping[str, float],
    labels: Mapping[str, str | bool],
    positive: str = DUPLICATE,
) -> tuple[list[tuple[float, float]], float]:
    """ROC points (fpr, tpr) from high to low score, and the trapezoidal AUC.

    Equal scores are one block, so ties contribute a diagonal segment.
    """
    if set(scores) != set(labels):
        raise EvaluationError("scores and labels have different keys")
    is_pos = {k: (v is True or v == positive) for k, v in labels.items()}
    n_pos = sum(is_pos.values())
    n_neg = len(is_pos) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise EvaluationError(f"AUC needs both classes (positives={n_pos}, negatives={n_neg})")

    ordered = sorted(scores.items(), key=lambda kv: -kv[1])
    roc = [(0.0, 0.0)]
    tp = fp = 0
    auc = 0.0
    i = 0
    while i < len(ordered):
        value = ordered[i][1]
        block_tp = block_fp = 0
        while i < len(ordered) and ordered[i][1] == value:
            if is_pos[ordered[i][0]]:
                block_tp += 1
            else:
                block_fp += 1
            i += 1
        # integrate in counts to keep the trapezoid sum exact for small cases
        auc += block_fp * (2 * tp + block_tp)
        tp += block_tp
        fp += block_fp
        roc.append((fp / n_neg, tp / n_pos))
    return roc, auc / (2.0 * n_pos * n_neg)


def trapezoid_auc(roc: Sequence[tuple[float, float]]) -> float:
    return sum((x1 - x0) * (y0 + y1) / 2 for (x0, y0), (x1, y1) in zip(roc, roc[1:]))


@dataclass
class EvalReport:
    params: LshParams
    auc: float
    roc: list[tuple[float, float]]
    build_seconds: float
    scan_seconds: float
    doc_count: int
    duplicate_pairs_found: int
    seed: int = DEFAULT_SEED
    score_mode: str = "removable"

    @property
    def total_seconds(self) -> float:
        return self.build_seconds + self.scan_seconds

    def to_dict(self, include_roc: bool = True) -> dict:
        out = {
            "params": self.params.to_dict(),
            "seed": self.seed,
            "score_mode": self.score_mode,
            "auc": self.auc,
            "doc_count": self.doc_count,
            "duplicate_pairs_found": self.duplicate_pairs_found,
            "build_seconds": self.build_seconds,
            "scan_seconds": self.scan_seconds,
        }
        if include_roc:
            out["roc"] = [list(p) for p in self.roc]
        return out

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), indent=2, **kwargs)

    def roc_csv(self) -> str:
        return "fpr,tpr\n" + "".join(f"{x!r},{y!r}\n" for x, y in self.roc)


def evaluate(
    corpus: LabeledCorpus,
    params: LshParams,
    seed: int = DEFAULT_SEED,
    workers: int = 1,
    score_mode: str = "removable",
) -> EvalReport:
    start = time.perf_counter()
    index = build_index(corpus.documents, params, seed=seed, workers=workers)
    built = time.perf_counter()
    scored = index.scored_pairs()
    scores = score_documents(index, corpus, score_mode, scored)
    pairs = pairs_from_scored(scored, params.threshold)
    cluster_pairs(pairs)
    scanned = time.perf_counter()
    roc, auc = compute_roc_auc(scores, corpus.labels)
    return EvalReport(
        params=params,
        auc=auc,
        roc=roc,
        build_seconds=built - start,
        scan_seconds=scanned - built,
        doc_count=len(index),
        duplicate_pairs_found=len(pairs),
        seed=index.family_seed,
        score_mode=score_mode,
    )


@dataclass(frozen=True)
class SweepGrid:
    permutation_values: tuple[int, ...]
    ngram_values: tuple[int, ...]
    threshold_values: tuple[float, ...]

    def __post_init__(self) -> None:
        for name in ("permutation_values", "ngram_values", "threshold_values"):
            values = tuple(getattr(self, name))
            object.__setattr__(self, name, values)
            if not values:
                raise ValueError(f"{name} must be non-empty")
            if len(set(values)) != len(values):
                raise ValueError(f"{name} contains duplicates: {values}")
        if any(k < 1 for k in self.permutation_values) or any(n < 1 for n in self.ngram_values):
            raise ValueError("permutation and n-gram values must be positive")
        if any(not 0 < t < 1 for t in self.threshold_values):
            raise ValueError("thresholds must lie in (0, 1)")

    def cells(self) -> list[tuple[int, int, float]]:
        """(k, n, t) in deterministic grid order."""
        return list(product(self.permutation_values, self.ngram_values, self.threshold_values))

    def to_dict(self) -> dict:
        return {
            "permutation_values": list(self.permutation_values),
            "ngram_values": list(self.ngram_values),
            "threshold_values": list(self.threshold_values),
        }


@dataclass
class SweepCell:
    k: int
    n: int
    threshold: float
    report: EvalReport | None = None
    error: str | None = None
    highlighted: bool = False

    @property
    def auc(self) -> float | None:
        return None if self.report is None else self.report.auc

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "n": self.n,
            "threshold": self.threshold,
            "auc": self.auc,
            "highlighted": self.highlighted,
            "error": self.error,
            "report": None if self.report is None else self.report.to_dict(include_roc=False),
        }


def _run_cell(
    corpus: LabeledCorpus, cell: tuple[int, int, float], seed: int, verify_mode: str, score_mode: str
) -> SweepCell:
    k, n, t = cell
    try:
        params = LshParams.for_threshold(k, n, t, verify_mode)
        return SweepCell(k, n, t, report=evaluate(corpus, params, seed=seed, score_mode=score_mode))
    except Exception as exc:  # noqa: BLE001 - a failing cell is reported, not fatal
        return SweepCell(k, n, t, error=f"{type(exc).__name__}: {exc}")


def sweep(
    corpus: LabeledCorpus,
    grid: SweepGrid,
    seed: int = DEFAULT_SEED,
    verify_mode: str = "exact",
    workers: int = 1,
    top: int = 3,
    score_mode: str = "removable",
) -> list[SweepCell]:
    """Evaluate every grid cell; best AUC first, the ``top`` best flagged."""
    cells = grid.cells()
    if workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(cells))) as pool:
            n_cells = len(cells)
            results = list(
                pool.map(
                    _run_cell, [corpus] * n_cells, cells, [seed] * n_cells,
                    [verify_mode] * n_cells, [score_mode] * n_cells,
                )
            )
    else:
        results = [_run_cell(corpus, cell, seed, verify_mode, score_mode) for cell in cells]
    # sort is stable, so equal AUCs keep grid order; failed cells go last
    results.sort(key=lambda c: (c.report is None, -(c.auc or 0.0)))
    for cell in results[:top]:
        if cell.report is not None:
            cell.highlighted = True
    return results


def summary_table(cells: Sequence[SweepCell]) -> str:
    """Tab-separated table in the shape of the usual results table."""
    lines = ["permutations\tthreshold\tngram\tauc\tseconds\thighlighted"]
    for c in cells:
        if c.report is None:
            lines.append(f"{c.k}\t{c.threshold}\t{c.n}\tERROR\t\t{c.error}")
        else:
            lines.append(
                f"{c.k}\t{c.threshold}\t{c.n}\t{c.report.auc:.4f}\t{c.report.total_seconds:.3f}\t"
                f"{'*' if c.highlighted else ''}"
            )
    return "\n".join(lines) + "\n"


def duplication_percentage(
    corpus: Sequence[Document], params: LshParams, seed: int = DEFAULT_SEED, workers: int = 1
) -> float:
    """Share of documents a dedup pass would remove (non-representative cluster members)."""
    if not corpus:
        return 0.0
    index = build_index(corpus, params, seed=seed, workers=workers)
    result = dedup_scan(index)
    return len(result.removable_ids) / len(index)
