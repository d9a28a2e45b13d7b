"""Non-negative matrix factorization by multiplicative updates.

Minimizes the squared Frobenius reconstruction error ``||M - Q H||_F^2`` with
Q, H >= 0 using the Lee-Seung multiplicative rules, which never increase the
objective.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .._validation import check_nonnegative_matrix, check_positive_int
from ..errors import DimensionError


@dataclass(frozen=True)
class TopicModel:
    Q: np.ndarray = field(repr=False)  # words x topics
    H: np.ndarray = field(repr=False)  # topics x documents
    seed: int | None
    error_trace: tuple[float, ...] = field(repr=False)

    @property
    def topic_count(self) -> int:
        return self.H.shape[0]

    @property
    def n_iter(self) -> int:
        return len(self.error_trace) - 1

    @property
    def reconstruction_error(self) -> float:
        return self.error_trace[-1]


def _ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    out = np.ones_like(num)
    np.divide(num, den, out=out, where=den > 0)
    return out


def sq_frobenius(M, Q, H) -> float:
    R = M - Q @ H
    return float(np.einsum("ij,ij->", R, R))


def nnmf(M, topic_count: int, seed: int | None = 0, max_iter: int = 200, rel_tol: float = 1e-4) -> TopicModel:
    """Factorize non-negative ``M`` (words x documents) into ``Q @ H``.

    Initialization is uniform random scaled by ``sqrt(mean(M) / topic_count)``
    from ``numpy.random.default_rng(seed)``.  Iteration stops when the relative
    decrease of the error falls below ``rel_tol`` or after ``max_iter`` rounds.
    ``error_trace[0]`` is the error of the initialization.
    """
    M = check_nonnegative_matrix(M, "M")
    k = check_positive_int(topic_count, "topic_count")
    if k >= min(M.shape):
        raise DimensionError(f"topic_count={k} must be smaller than both dimensions of M {M.shape}")
    rng = np.random.default_rng(seed)
    scale = np.sqrt(M.mean() / k)
    Q = scale * rng.uniform(size=(M.shape[0], k))
    H = scale * rng.uniform(size=(k, M.shape[1]))

    trace = [sq_frobenius(M, Q, H)]
    for _ in range(max_iter):
        H *= _ratio(Q.T @ M, (Q.T @ Q) @ H)
        Q *= _ratio(M @ H.T, Q @ (H @ H.T))
        err = sq_frobenius(M, Q, H)
        prev = trace[-1]
        trace.append(err)
        if prev == 0 or (prev - err) / prev < rel_tol:
            break
    return TopicModel(Q, H, seed, tuple(trace))


class MultiplicativeNMF(BaseEstimator, TransformerMixin):
    """Estimator interface to :func:`nnmf`.

    ``fit(M)`` takes the word-by-document matrix; ``components_`` is ``Q``
    (words x topics) and ``transform`` returns ``H`` (topics x documents) of the
    fitted matrix.
    """

    def __init__(self, n_components=50, random_state=0, max_iter=200, tol=1e-4):
        self.n_components = n_components
        self.random_state = random_state
        self.max_iter = max_iter
        self.tol = tol

    def fit(self, M, y=None):
        model = nnmf(M, self.n_components, self.random_state, self.max_iter, self.tol)
        self.model_ = model
        self.components_ = model.Q
        self.H_ = model.H
        self.error_trace_ = np.array(model.error_trace)
        self.n_iter_ = model.n_iter
        self.reconstruction_err_ = model.reconstruction_error
        return self

    def transform(self, M=None):
        return self.H_

    def fit_transform(self, M, y=None):
        return self.fit(M).H_


def topic_keywords(Q, words, top_n: int = 10) -> list[list[dict]]:
    """Per topic, the ``top_n`` words by descending weight (ties keep vocabulary order).

    The first keyword of each topic carries ``"strongest": True``.
    """
    top_n = check_positive_int(top_n, "top_n")
    Q = np.asarray(Q)
    out = []
    for j in range(Q.shape[1]):
        order = np.argsort(-Q[:, j], kind="stable")[:top_n]
        out.append([
            {"word": words[i], "weight": float(Q[i, j]), "strongest": r == 0}
            for r, i in enumerate(order)
        ])
    return out
