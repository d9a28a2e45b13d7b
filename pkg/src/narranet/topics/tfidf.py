"""Word-by-chapter TF-IDF matrix built from token lists."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.feature_extraction.text import ENGLISH_STOP_WORDS

from ..errors import EmptyVocabulary


@dataclass(frozen=True)
class Vocabulary:
    words: tuple[str, ...]
    df: np.ndarray = field(compare=False)
    filters: dict = field(default_factory=dict, compare=False)

    def __len__(self):
        return len(self.words)

    @property
    def index(self) -> dict[str, int]:
        return {w: i for i, w in enumerate(self.words)}


def _stop_set(stop_words) -> frozenset[str]:
    if stop_words is None:
        return frozenset()
    if stop_words == "english":
        return frozenset(ENGLISH_STOP_WORDS)
    return frozenset(w.lower() for w in stop_words)


class TfidfMatrixBuilder(BaseEstimator, TransformerMixin):
    """TF-IDF over pre-tokenized documents.

    ``tf`` is the raw count, ``idf(w) = ln((1 + n_docs) / (1 + df(w))) + 1`` and
    every document vector is scaled to unit Euclidean norm.  Following the
    scikit-learn convention ``transform`` returns a (n_documents, n_words) sparse
    matrix; use :func:`build_tfidf` for the word-by-document orientation.

    Parameters
    ----------
    stop_words : "english", iterable of str or None
    min_df : int
        Minimum number of documents a word must occur in.
    max_df : float
        Drop words occurring in more than this fraction of documents.
    min_length : int
        Minimum token length.
    """

    def __init__(self, stop_words=None, min_df=1, max_df=1.0, min_length=1):
        self.stop_words = stop_words
        self.min_df = min_df
        self.max_df = max_df
        self.min_length = min_length

    def fit(self, documents, y=None):
        documents = [list(d) for d in documents]
        n_docs = len(documents)
        stops = _stop_set(self.stop_words)
        df = Counter()
        for doc in documents:
            df.update(set(doc))
        limit = self.max_df * n_docs
        words = sorted(
            w for w, n in df.items()
            if n >= self.min_df and n <= limit and len(w) >= self.min_length and w not in stops
        )
        if not words:
            raise EmptyVocabulary("vocabulary filters removed every word")
        dfs = np.array([df[w] for w in words], dtype=float)
        self.vocabulary_ = Vocabulary(
            tuple(words), dfs,
            {"stop_words": sorted(stops) if stops and self.stop_words != "english" else self.stop_words,
             "min_df": self.min_df, "max_df": self.max_df, "min_length": self.min_length},
        )
        self.idf_ = np.log((1.0 + n_docs) / (1.0 + dfs)) + 1.0
        return self

    def transform(self, documents):
        index = self.vocabulary_.index
        rows, cols, vals = [], [], []
        for i, doc in enumerate(documents):
            for w, n in Counter(t for t in doc if t in index).items():
                rows.append(i)
                cols.append(index[w])
                vals.append(n)
        X = sp.csr_matrix((vals, (rows, cols)), shape=(len(documents), len(index)), dtype=float)
        X = X @ sp.diags(self.idf_)
        norms = np.sqrt(np.asarray(X.multiply(X).sum(axis=1)).ravel())
        norms[norms == 0] = 1.0
        return sp.csr_matrix(sp.diags(1.0 / norms) @ X)


def build_tfidf(corpus, stop_words="english", min_df=2, max_df=0.95, min_length=2):
    """Return ``(Vocabulary, M)`` with dense ``M`` of shape (n_words, n_chapters)."""
    docs = [c.tokens for c in corpus.chapters]
    builder = TfidfMatrixBuilder(stop_words, min_df, max_df, min_length).fit(docs)
    M = builder.transform(docs).T.toarray()
    return builder.vocabulary_, M
