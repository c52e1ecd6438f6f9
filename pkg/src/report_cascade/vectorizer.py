"""N-gram vocabulary construction and BOW / sublinear TF-IDF transforms.

The vocabulary keeps n-grams whose document frequency is at least
``min_df_abs`` and at most ``max_df_ratio`` of the corpus, then retains the
``max_features`` most frequent by total corpus count (ties broken by n-gram
string order).  Column indices are assigned in lexicographic n-gram order.

TF-IDF uses tf = 1 + ln(count) when sublinear, idf = ln((1+N)/(1+df)) + 1,
and L2-normalizes the resulting vector.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .preprocess import TokenizedDocument
from .sparse import SparseVector

BOW = "BOW"
TFIDF = "TFIDF"


class VectorizerError(ValueError):
    pass


@dataclass(frozen=True)
class FeatureConfig:
    ngram_min: int = 1
    ngram_max: int = 2
    min_df_abs: int = 2
    max_df_ratio: float = 0.25
    max_features: int = 5000
    weighting: str = TFIDF
    sublinear_tf: bool = True

    def __post_init__(self):
        if not (1 <= self.ngram_min <= self.ngram_max):
            raise VectorizerError("need 1 <= ngram_min <= ngram_max")
        if not (0.0 < self.max_df_ratio <= 1.0):
            raise VectorizerError("max_df_ratio must be in (0, 1]")
        if self.max_features < 1:
            raise VectorizerError("max_features must be >= 1")
        if self.weighting not in (BOW, TFIDF):
            raise VectorizerError(f"unknown weighting {self.weighting!r}")


@dataclass
class Vocabulary:
    index: dict[str, int]
    df: dict[str, int]
    total_count: dict[str, int]
    n_docs: int
    idf: np.ndarray = field(init=False)

    def __post_init__(self):
        self.idf = np.zeros(len(self.index))
        for ngram, col in self.index.items():
            self.idf[col] = math.log((1 + self.n_docs) / (1 + self.df[ngram])) + 1.0

    def __len__(self) -> int:
        return len(self.index)


def iter_ngrams(tokens: list[str], ngram_min: int, ngram_max: int):
    for n in range(ngram_min, ngram_max + 1):
        for i in range(len(tokens) - n + 1):
            yield " ".join(tokens[i : i + n])


def fit(corpus: list[TokenizedDocument], cfg: FeatureConfig) -> Vocabulary:
    """Two passes over the corpus: df counting, then filter + top-K select."""
    if not corpus:
        raise VectorizerError("cannot fit a vocabulary on an empty corpus")
    df: Counter = Counter()
    total: Counter = Counter()
    for tdoc in corpus:
        counts = Counter(iter_ngrams(tdoc.tokens, cfg.ngram_min, cfg.ngram_max))
        df.update(counts.keys())
        total.update(counts)
    n_docs = len(corpus)
    kept = [
        g
        for g, d in df.items()
        if d >= cfg.min_df_abs and d / n_docs <= cfg.max_df_ratio
    ]
    # Most frequent by corpus count; equal counts resolved by string order.
    kept.sort(key=lambda g: (-total[g], g))
    kept = kept[: cfg.max_features]
    kept.sort()
    return Vocabulary(
        index={g: i for i, g in enumerate(kept)},
        df={g: df[g] for g in kept},
        total_count={g: total[g] for g in kept},
        n_docs=n_docs,
    )


def transform(tdoc: TokenizedDocument, vocab: Vocabulary, cfg: FeatureConfig) -> SparseVector:
    """Vectorize one document against a fitted vocabulary.

    Out-of-vocabulary n-grams are ignored; an all-zero result is returned
    as an empty vector (L2 normalization is skipped for it).
    """
    counts: Counter = Counter()
    for g in iter_ngrams(tdoc.tokens, cfg.ngram_min, cfg.ngram_max):
        col = vocab.index.get(g)
        if col is not None:
            counts[col] += 1
    if not counts:
        return SparseVector(np.zeros(0, dtype=np.int64), np.zeros(0), len(vocab))
    cols = np.array(sorted(counts), dtype=np.int64)
    vals = np.array([counts[c] for c in cols], dtype=np.float64)
    if cfg.weighting == TFIDF:
        tf = 1.0 + np.log(vals) if cfg.sublinear_tf else vals
        vals = tf * vocab.idf[cols]
        norm = np.sqrt(np.dot(vals, vals))
        if norm > 0:
            vals = vals / norm
    return SparseVector(cols, vals, len(vocab))


def transform_corpus(
    corpus: list[TokenizedDocument], vocab: Vocabulary, cfg: FeatureConfig
) -> list[SparseVector]:
    return [transform(tdoc, vocab, cfg) for tdoc in corpus]
