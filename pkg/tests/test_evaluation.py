import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lshdedup import evaluation
from lshdedup.corpusgen import random_strings
from lshdedup.evaluation import (
    EvaluationError,
    SweepGrid,
    compute_roc_auc,
    duplication_percentage,
    evaluate,
    score_documents,
    summary_table,
    sweep,
    trapezoid_auc,
)
from lshdedup.lsh import LshParams, build_index
from lshdedup.synth import DUPLICATE, ORIGINAL, LabeledCorpus
from lshdedup.text import Document

from conftest import all_pairs_jaccard


def labels_of(pos, neg):
    return {**{f"p{i}": DUPLICATE for i in range(pos)}, **{f"n{i}": ORIGINAL for i in range(neg)}}


def verbatim_corpus(n_orig=40, n_dup=10, seed=0):
    docs = random_strings(n_orig, 300, seed=seed)
    dups = [Document(d.id + "~dup", d.text) for d in docs[:n_dup]]
    labels = {d.id: ORIGINAL for d in docs} | {d.id: DUPLICATE for d in dups}
    return LabeledCorpus(docs + dups, labels, {d.id: d.id[:-4] for d in dups})


def test_roc_hand_case():
    scores = {"d1": 0.9, "d2": 0.8, "o1": 0.85, "o2": 0.1}
    labels = {"d1": DUPLICATE, "d2": DUPLICATE, "o1": ORIGINAL, "o2": ORIGINAL}
    roc, auc = compute_roc_auc(scores, labels)
    assert auc == 0.75
    assert roc == [(0.0, 0.0), (0.0, 0.5), (0.5, 0.5), (0.5, 1.0), (1.0, 1.0)]


def test_roc_perfect_and_reversed():
    labels = labels_of(5, 7)
    perfect = {k: 1.0 if k.startswith("p") else 0.0 for k in labels}
    assert compute_roc_auc(perfect, labels)[1] == 1.0
    reversed_ = {k: 1.0 - v for k, v in perfect.items()}
    assert compute_roc_auc(reversed_, labels)[1] == 0.0


def test_roc_ties_count_half():
    labels = labels_of(3, 3)
    roc, auc = compute_roc_auc(dict.fromkeys(labels, 0.4), labels)
    assert auc == 0.5
    assert roc == [(0.0, 0.0), (1.0, 1.0)]


def test_roc_random_labels_null():
    rng = np.random.default_rng(7)
    n = 10_000
    scores = {str(i): float(s) for i, s in enumerate(rng.random(n))}
    labels = {str(i): DUPLICATE if c else ORIGINAL for i, c in enumerate(rng.random(n) < 0.5)}
    assert abs(compute_roc_auc(scores, labels)[1] - 0.5) <= 0.02


def test_roc_errors():
    with pytest.raises(EvaluationError):
        compute_roc_auc({"a": 0.1, "b": 0.2}, {"a": ORIGINAL, "b": ORIGINAL})
    with pytest.raises(EvaluationError):
        compute_roc_auc({"a": 0.1}, {"a": ORIGINAL, "b": DUPLICATE})


def test_roc_accepts_boolean_labels():
    assert compute_roc_auc({"a": 0.9, "b": 0.1}, {"a": True, "b": False})[1] == 1.0


scored_items = st.lists(st.tuples(st.floats(0, 1), st.booleans()), min_size=2, max_size=60).filter(
    lambda xs: any(x[1] for x in xs) and not all(x[1] for x in xs)
)


@settings(max_examples=200)
@given(scored_items)
def test_roc_curve_invariants(items):
    scores = {str(i): s for i, (s, _) in enumerate(items)}
    labels = {str(i): DUPLICATE if y else ORIGINAL for i, (_, y) in enumerate(items)}
    roc, auc = compute_roc_auc(scores, labels)
    assert roc[0] == (0.0, 0.0) and roc[-1] == (1.0, 1.0)
    assert all(x1 >= x0 and y1 >= y0 for (x0, y0), (x1, y1) in zip(roc, roc[1:]))
    assert auc == pytest.approx(trapezoid_auc(roc), abs=1e-12)
    pos = [s for s, y in items if y]
    neg = [s for s, y in items if not y]
    pairwise = sum((p > q) + 0.5 * (p == q) for p in pos for q in neg) / (len(pos) * len(neg))
    assert auc == pytest.approx(pairwise, abs=1e-12)


grid_scored_items = st.lists(
    st.tuples(st.integers(0, 1000).map(lambda i: i / 1000), st.booleans()), min_size=2, max_size=60
).filter(lambda xs: any(x[1] for x in xs) and not all(x[1] for x in xs))


@settings(max_examples=100)
@given(grid_scored_items)
def test_auc_invariant_under_monotone_transform(items):
    scores = {str(i): s for i, (s, _) in enumerate(items)}
    labels = {str(i): DUPLICATE if y else ORIGINAL for i, (_, y) in enumerate(items)}
    warped = {k: np.exp(3 * v) - 7 for k, v in scores.items()}
    assert compute_roc_auc(scores, labels)[1] == pytest.approx(compute_roc_auc(warped, labels)[1], abs=1e-12)


def test_score_isolated_and_copy():
    corpus = verbatim_corpus(6, 1)
    index = build_index(corpus.documents, LshParams.for_threshold(64, 8, 0.6))
    scores = score_documents(index, corpus)
    copy_id = corpus.documents[-1].id
    assert scores[copy_id] == 1.0
    assert scores[copy_id[:-4]] == 0.0
    assert all(v == 0.0 for k, v in scores.items() if k not in (copy_id, copy_id[:-4]))
    symmetric = score_documents(index, corpus, mode="symmetric")
    assert symmetric[copy_id] == symmetric[copy_id[:-4]] == 1.0


def test_score_corpus_index_mismatch():
    corpus = verbatim_corpus(6, 1)
    index = build_index(corpus.documents[:-1], LshParams.for_threshold(64, 8, 0.6))
    with pytest.raises(EvaluationError):
        score_documents(index, corpus)


def test_scores_match_naive_double_loop(labeled):
    docs = labeled.documents[:200]
    sub = LabeledCorpus(docs, {d.id: labeled.labels[d.id] for d in docs}, {})
    n = 12
    index = build_index(docs, LshParams.for_threshold(128, n, 0.65))
    oracle = all_pairs_jaccard(docs, n)
    slots = {d.id: set() for d in docs}
    for band_no, band in enumerate(index.buckets):
        for key, members in band.items():
            for m in members:
                slots[m].add((band_no, key))
    expected = dict.fromkeys((d.id for d in docs), 0.0)
    for a in docs:
        for b in docs:
            if a.id >= b.id:
                continue
            if slots[a.id] & slots[b.id]:
                expected[b.id] = max(expected[b.id], oracle[(a.id, b.id)])
    got = score_documents(index, sub)
    assert got.keys() == expected.keys()
    for key in got:
        assert got[key] == pytest.approx(expected[key], abs=1e-12)


def test_evaluate_verbatim_duplicates():
    report = evaluate(verbatim_corpus(), LshParams.for_threshold(128, 12, 0.65))
    assert report.auc == 1.0
    assert report.duplicate_pairs_found == 10
    assert report.doc_count == 50


def test_evaluate_timing_sanity():
    start = time.perf_counter()
    report = evaluate(verbatim_corpus(), LshParams.for_threshold(64, 12, 0.65))
    wall = time.perf_counter() - start
    assert report.build_seconds > 0 and report.scan_seconds > 0
    assert report.total_seconds <= wall


def test_evaluate_on_benchmark(labeled):
    report = evaluate(labeled, LshParams.for_threshold(128, 12, 0.65))
    assert report.auc >= 0.93
    roc = report.roc
    assert roc[0] == (0.0, 0.0) and roc[-1] == (1.0, 1.0)
    assert report.auc == pytest.approx(trapezoid_auc(roc))


def test_evaluate_deterministic_apart_from_timing(labeled):
    p = LshParams.for_threshold(64, 12, 0.75)
    a, b = evaluate(labeled, p, seed=5), evaluate(labeled, p, seed=5)
    strip = lambda r: {k: v for k, v in r.to_dict().items() if not k.endswith("_seconds")}  # noqa: E731
    assert strip(a) == strip(b)
    assert a.roc_csv() == b.roc_csv()


def test_report_serialization(labeled):
    report = evaluate(verbatim_corpus(), LshParams.for_threshold(64, 12, 0.65))
    data = report.to_dict()
    assert data["params"]["k"] == 64
    assert report.roc_csv().splitlines()[0] == "fpr,tpr"
    assert len(report.roc_csv().splitlines()) == len(report.roc) + 1


def test_grid_validation():
    with pytest.raises(ValueError):
        SweepGrid((), (12,), (0.5,))
    with pytest.raises(ValueError):
        SweepGrid((64, 64), (12,), (0.5,))
    with pytest.raises(ValueError):
        SweepGrid((64,), (12,), (1.5,))
    assert SweepGrid((64, 128), (12,), (0.5, 0.6)).cells() == [(64, 12, 0.5), (64, 12, 0.6), (128, 12, 0.5), (128, 12, 0.6)]


def test_singleton_sweep_equals_evaluate(labeled):
    cells = sweep(labeled, SweepGrid((64,), (12,), (0.75,)), seed=2)
    assert len(cells) == 1
    direct = evaluate(labeled, LshParams.for_threshold(64, 12, 0.75), seed=2)
    assert cells[0].report.auc == direct.auc
    assert cells[0].report.roc == direct.roc
    assert cells[0].highlighted


def test_sweep_sorted_highlighted_and_replayable(labeled):
    grid = SweepGrid((32, 64), (8, 12), (0.6, 0.8))
    cells = sweep(labeled, grid)
    aucs = [c.auc for c in cells]
    assert aucs == sorted(aucs, reverse=True)
    assert [c.highlighted for c in cells] == [True] * 3 + [False] * 5
    again = sweep(labeled, grid)
    assert {(c.k, c.n, c.threshold): c.auc for c in again} == {(c.k, c.n, c.threshold): c.auc for c in cells}
    parallel = sweep(labeled, grid, workers=2)
    assert [(c.k, c.n, c.threshold, c.auc) for c in parallel] == [(c.k, c.n, c.threshold, c.auc) for c in cells]
    table = summary_table(cells).splitlines()
    assert table[0].split("\t")[:4] == ["permutations", "threshold", "ngram", "auc"]
    assert len(table) == 9


def test_sweep_records_failing_cell(labeled, monkeypatch):
    real = evaluation.evaluate

    def flaky(corpus, params, **kwargs):
        if params.n == 8:
            raise RuntimeError("boom")
        return real(corpus, params, **kwargs)

    monkeypatch.setattr(evaluation, "evaluate", flaky)
    cells = sweep(labeled, SweepGrid((32,), (8, 12), (0.7,)))
    assert len(cells) == 2
    assert cells[0].report is not None and cells[0].n == 12
    assert cells[1].report is None and "boom" in cells[1].error
    assert not cells[1].highlighted
    assert "ERROR" in summary_table(cells)


def test_duplication_percentage_distinct():
    docs = random_strings(30, 300, seed=3)
    assert duplication_percentage(docs, LshParams.for_threshold(128, 12, 0.65)) == 0.0


def test_duplication_percentage_triple():
    docs = random_strings(8, 300, seed=4)
    docs += [Document("t1", docs[0].text), Document("t2", docs[0].text)]
    assert duplication_percentage(docs, LshParams.for_threshold(128, 12, 0.65)) == pytest.approx(0.2)


def test_duplication_percentage_bounds():
    docs = [Document(f"d{i}", "same text everywhere") for i in range(7)]
    assert duplication_percentage(docs, LshParams.for_threshold(64, 5, 0.5)) == pytest.approx(1 - 1 / 7)
    assert duplication_percentage([], LshParams.for_threshold(64, 5, 0.5)) == 0.0


def test_duplication_percentage_on_benchmark(labeled):
    truth = len(labeled.duplicates) / len(labeled.documents)
    got = duplication_percentage(labeled.documents, LshParams.for_threshold(128, 12, 0.65))
    assert abs(got - truth) <= 0.05
