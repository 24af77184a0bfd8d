"""Sublinear tf-idf with base-2 logarithms, in a standard and a literal form."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, TransformerMixin

from .preprocess import preprocess

__all__ = ["Vocabulary", "TfidfVectorizer", "EmptyVocabulary", "term_weight", "MODES"]

MODES = ("standard", "paper-literal")


class EmptyVocabulary(ValueError):
    pass


@dataclass(frozen=True)
class Vocabulary:
    index: dict[str, int]
    df: tuple[int, ...]
    n_docs: int

    def __len__(self) -> int:
        return len(self.index)

    def terms(self) -> list[str]:
        return sorted(self.index, key=self.index.__getitem__)


def term_weight(tf: int, df: int, n_docs: int, mode: str = "standard") -> float:
    """Weight of one term in one document.

    standard: ``(1 + log2 tf) * max(0, log2(N / (df + 1)))``.
    paper-literal: ``tf / log2(N / (df + 1))``, taken as 0 where the log is 0.
    """
    if tf <= 0:
        return 0.0
    idf = math.log2(n_docs / (df + 1))
    if mode == "standard":
        return (1.0 + math.log2(tf)) * max(0.0, idf)
    if mode == "paper-literal":
        return tf / idf if idf != 0 else 0.0
    raise ValueError(f"unknown tf-idf mode {mode!r}")


class TfidfVectorizer(TransformerMixin, BaseEstimator):
    """Documents to a sparse tf-idf matrix; the vocabulary comes from ``fit`` only.

    Standard rows are L2-normalized; paper-literal rows are left as computed.
    """

    def __init__(self, mode: str = "standard", analyzer: Callable[[str], list[str]] | None = None,
                 normalize: bool | None = None):
        self.mode = mode
        self.analyzer = analyzer
        self.normalize = normalize

    def _analyze(self, doc) -> list[str]:
        if isinstance(doc, (list, tuple)):
            return list(doc)
        return (self.analyzer or preprocess)(doc)

    def fit(self, docs: Sequence, y=None):
        if self.mode not in MODES:
            raise ValueError(f"unknown tf-idf mode {self.mode!r}")
        df: Counter = Counter()
        n = 0
        for doc in docs:
            df.update(set(self._analyze(doc)))
            n += 1
        if not df:
            raise EmptyVocabulary("no terms in the training documents")
        terms = sorted(df)
        self.vocabulary_ = Vocabulary({t: i for i, t in enumerate(terms)}, tuple(df[t] for t in terms), n)
        idf = np.log2(n / (np.array(self.vocabulary_.df, dtype=float) + 1.0))
        self.idf_ = idf
        return self

    def transform(self, docs: Sequence) -> sp.csr_matrix:
        vocab = self.vocabulary_
        rows, cols, vals = [], [], []
        n_rows = 0
        for r, doc in enumerate(docs):
            n_rows += 1
            counts = Counter(t for t in self._analyze(doc) if t in vocab.index)
            for term, tf in counts.items():
                j = vocab.index[term]
                w = self._weight(tf, j)
                if w != 0.0:
                    rows.append(r)
                    cols.append(j)
                    vals.append(w)
        X = sp.csr_matrix((vals, (rows, cols)), shape=(n_rows, len(vocab)), dtype=float)
        normalize = self.normalize if self.normalize is not None else self.mode == "standard"
        if normalize:
            norms = np.sqrt(np.asarray(X.multiply(X).sum(axis=1)).ravel())
            norms[norms == 0] = 1.0
            X = sp.diags(1.0 / norms) @ X
        return sp.csr_matrix(X)

    def _weight(self, tf: int, j: int) -> float:
        idf = self.idf_[j]
        if self.mode == "standard":
            return (1.0 + math.log2(tf)) * max(0.0, idf)
        return tf / idf if idf != 0 else 0.0

    def get_feature_names_out(self, input_features=None):
        return np.array(self.vocabulary_.terms(), dtype=object)
