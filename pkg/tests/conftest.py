import numpy as np
import pytest

from lshdedup.corpusgen import ArticleGenerator, generate_articles
from lshdedup.synth import SynthConfig, synthesize
from lshdedup.text import ShingleSet


@pytest.fixture(scope="session")
def article_generator():
    return ArticleGenerator()


@pytest.fixture(scope="session")
def articles(article_generator):
    return generate_articles(260, seed=21, generator=article_generator)


@pytest.fixture(scope="session")
def small_cfg():
    return SynthConfig(duplicate_fraction=0.25, donor_pool_size=300, donor_article_count=40, rng_seed=5)


@pytest.fixture(scope="session")
def labeled(articles, small_cfg):
    return synthesize(articles, small_cfg)


def overlap_pair(rng, size_a, size_b, common, n=5):
    """Two raw shingle sets with exactly ``common`` shared hashes."""
    total = size_a + size_b - common
    pool = np.unique(rng.integers(0, 2**64, size=total + 16, dtype=np.uint64))
    pool = rng.permutation(pool)[:total]
    a = pool[:size_a]
    b = np.concatenate([pool[:common], pool[size_a:]])
    return ShingleSet.from_hashes("a", n, a), ShingleSet.from_hashes("b", n, b)


def pair_with_jaccard(rng, s, union=200, n=5):
    """Raw shingle sets over ``union`` elements whose Jaccard is round(s*union)/union."""
    common = round(s * union)
    only = union - common
    return overlap_pair(rng, common + only // 2, common + only - only // 2, common, n)


def planted_corpus(bases, variants, seed=0, words_per_doc=70, max_mutation=0.35):
    """Random word documents plus mutated copies spanning a range of similarities."""
    from lshdedup.text import Document

    rng = np.random.default_rng(seed)
    vocab = ["".join(rng.choice(list("abcdefghijklmnopqrstuvwxyz"), size=int(rng.integers(2, 9)))) for _ in range(3000)]
    docs = []
    base_words = []
    for i in range(bases):
        words = [vocab[j] for j in rng.integers(0, len(vocab), size=words_per_doc)]
        base_words.append(words)
        docs.append(Document(f"b{i:04d}", " ".join(words)))
    for i in range(variants):
        words = list(base_words[int(rng.integers(0, bases))])
        rate = rng.uniform(0, max_mutation)
        for pos in np.flatnonzero(rng.random(len(words)) < rate):
            words[pos] = vocab[int(rng.integers(0, len(vocab)))]
        docs.append(Document(f"v{i:04d}", " ".join(words)))
    return docs


def all_pairs_jaccard(docs, n):
    """Brute-force Jaccard of every pair, straight from python string sets."""
    from itertools import combinations

    from lshdedup.text import normalize

    grams = {}
    for d in docs:
        t = normalize(d.text)
        grams[d.id] = {t[i : i + n] for i in range(len(t) - n + 1)}
    out = {}
    for a, b in combinations(sorted(grams), 2):
        ga, gb = grams[a], grams[b]
        union = len(ga | gb)
        out[(a, b)] = len(ga & gb) / union if union else 1.0
    return out


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
