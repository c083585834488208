"""Seeded generator of plain-text "articles" for desk-scale benchmarks.

No real encyclopedia dump ships with the package, so benchmarks and tests draw
from a Zipf-Mandelbrot distribution over a synthetic vocabulary, with a few
topic words boosted per article. The result has the properties the benchmark
needs: long-tailed word frequencies, many distinct sentences of 6-32 words,
and unrelated articles that share almost no long character n-grams.
"""

from __future__ import annotations

import numpy as np

from .text import Document

_ONSETS = ["", "b", "c", "d", "f", "g", "h", "j", "k", "l", "m", "n", "p", "r", "s", "t", "v", "w", "z",
           "br", "ch", "cl", "dr", "fl", "gr", "pl", "pr", "sh", "st", "th", "tr"]
_VOWELS = ["a", "e", "i", "o", "u", "ai", "ea", "ie", "ou", "y"]
_CODAS = ["", "", "n", "r", "s", "t", "l", "m", "nd", "st", "ng", "rk"]


def make_vocabulary(size: int = 40_000, seed: int = 0) -> list[str]:
    """Distinct pseudo-words, shortest first so frequent ranks get short words."""
    rng = np.random.default_rng(seed)
    words: set[str] = set()
    while len(words) < size:
        syllables = int(rng.choice([1, 2, 2, 3, 3, 4]))
        word = "".join(
            _ONSETS[rng.integers(len(_ONSETS))] + _VOWELS[rng.integers(len(_VOWELS))] + _CODAS[rng.integers(len(_CODAS))]
            for _ in range(syllables)
        )
        if len(word) > 1:
            words.add(word)
    return sorted(words, key=lambda w: (len(w), w))


class ArticleGenerator:
    def __init__(
        self,
        vocab_size: int = 40_000,
        zipf_exponent: float = 1.05,
        topic_words: int = 30,
        topic_rate: float = 0.15,
        sentence_words: tuple[int, int] = (6, 32),
    ):
        self.vocab = np.array(make_vocabulary(vocab_size))
        ranks = np.arange(vocab_size, dtype=np.float64)
        weights = 1.0 / (ranks + 2.7) ** zipf_exponent
        self.probs = weights / weights.sum()
        self.topic_words = topic_words
        self.topic_rate = topic_rate
        self.sentence_words = sentence_words

    def article(self, rng: np.random.Generator, n_sentences: int) -> str:
        lo, hi = self.sentence_words
        lengths = rng.integers(lo, hi + 1, size=n_sentences)
        total = int(lengths.sum())
        words = self.vocab[rng.choice(self.vocab.size, size=total, p=self.probs)]
        topic = self.vocab[rng.integers(500, self.vocab.size, size=self.topic_words)]
        boosted = rng.random(total) < self.topic_rate
        words[boosted] = topic[rng.integers(0, self.topic_words, size=int(boosted.sum()))]
        enders = rng.choice([".", "?", "!"], size=n_sentences, p=[0.9, 0.05, 0.05])
        sentences = []
        start = 0
        for length, end in zip(lengths, enders):
            chunk = list(words[start : start + length])
            start += length
            if length > 10 and rng.random() < 0.4:
                pos = int(rng.integers(3, length - 3))
                chunk[pos] += ","
            chunk[0] = chunk[0].capitalize()
            sentences.append(" ".join(chunk) + end)
        return " ".join(sentences)


def generate_articles(
    count: int,
    seed: int = 0,
    min_sentences: int = 20,
    max_sentences: int = 60,
    prefix: str = "art",
    generator: ArticleGenerator | None = None,
) -> list[Document]:
    gen = generator or ArticleGenerator()
    rng = np.random.default_rng(seed)
    width = max(6, len(str(count - 1)))
    docs = []
    for i in range(count):
        n_sentences = int(rng.integers(min_sentences, max_sentences + 1))
        docs.append(Document(f"{prefix}-{i:0{width}d}", gen.article(rng, n_sentences)))
    return docs


def random_strings(count: int, length: int, seed: int = 0, alphabet: str = "abcdefghijklmnopqrstuvwxyz ") -> list[Document]:
    """i.i.d. uniform character strings; the null model for scaling runs."""
    rng = np.random.default_rng(seed)
    letters = np.array(list(alphabet))
    width = max(6, len(str(count - 1)))
    return [
        Document(f"rnd-{i:0{width}d}", "".join(letters[rng.integers(0, letters.size, size=length)]))
        for i in range(count)
    ]
