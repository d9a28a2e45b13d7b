"""Bundling consecutive books into Sequences by character composition.

Each book is reduced to a vector over the roster (presence by default).  The
similarity of each consecutive pair of retained books is compared with a
threshold, by default the mean of those similarities, and pairs at or above it
are chained into one Sequence.
"""
from __future__ import annotations

import logging
from collections.abc import Mapping
from dataclasses import dataclass, field, replace

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import check_timelines
from .network import CharacterNetwork, build_network
from .sentiment import sign_of

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BookCompositionVector:
    book: tuple[int, int]
    chapters: tuple[int, ...]
    vector: np.ndarray = field(compare=False)


def book_vectors(timelines, corpus, weighting: str = "binary") -> list[BookCompositionVector]:
    """One composition vector per book that features at least one character.

    ``weighting="count"`` counts the chapters of the book a character appears in
    instead of recording presence.  Dimensions follow the timeline order.
    """
    if weighting not in ("binary", "count"):
        raise ValueError(f"weighting must be 'binary' or 'count', got {weighting!r}")
    tl = check_timelines(timelines)
    names = list(timelines) if isinstance(timelines, Mapping) else list(tl)
    sets = [set(tl[n]) for n in names]
    out = []
    for key, ordinals in corpus.books().items():
        chs = set(ordinals)
        counts = np.array([len(s & chs) for s in sets], dtype=float)
        if not counts.any():
            logger.info("book %s has no roster character; dropped", key)
            continue
        vec = counts if weighting == "count" else (counts > 0).astype(float)
        out.append(BookCompositionVector(key, tuple(ordinals), vec))
    return out


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        return 0.0
    return float(np.dot(u, v) / (nu * nv))


def jaccard(u: np.ndarray, v: np.ndarray) -> float:
    # weighted (Ruzicka) form; equals set Jaccard on binary vectors
    den = np.maximum(u, v).sum()
    return float(np.minimum(u, v).sum() / den) if den else 0.0


SIMILARITIES = {"cosine": cosine, "jaccard": jaccard}
TIE_TOL = 1e-12


@dataclass(frozen=True)
class Sequence:
    index: int
    books: tuple[tuple[int, int], ...]
    chapters: tuple[int, ...]
    mean_spi: float | None = None

    @property
    def sign(self) -> str | None:
        if self.mean_spi is None:
            return None
        return {1: "positive", -1: "negative", 0: "neutral"}[sign_of(self.mean_spi)]

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "books": [list(b) for b in self.books],
            "first_chapter": self.chapters[0] if self.chapters else None,
            "last_chapter": self.chapters[-1] if self.chapters else None,
            "chapters": list(self.chapters),
            "mean_spi": self.mean_spi,
            "sign": self.sign,
        }

    @classmethod
    def from_json(cls, d: dict) -> "Sequence":
        return cls(d["index"], tuple(tuple(b) for b in d["books"]), tuple(d["chapters"]), d.get("mean_spi"))


class SequenceBundler(BaseEstimator):
    """Chain consecutive books whose composition similarity reaches a threshold.

    Parameters
    ----------
    threshold : float or "auto"
        ``"auto"`` uses the mean consecutive similarity.
    similarity : {"cosine", "jaccard"}

    Attributes
    ----------
    similarities_ : ndarray of shape (n_books - 1,)
    threshold_ : float
    labels_ : ndarray of shape (n_books,)
        1-based Sequence index of each retained book.
    sequences_ : list of Sequence
    """

    def __init__(self, threshold="auto", similarity="cosine"):
        self.threshold = threshold
        self.similarity = similarity

    def fit(self, vectors, y=None):
        vectors = list(vectors)
        if not vectors:
            raise ValueError("at least one book vector is required")
        sim = SIMILARITIES[self.similarity]
        s = np.array([sim(a.vector, b.vector) for a, b in zip(vectors, vectors[1:])])
        if self.threshold == "auto":
            thr = float(s.mean()) if len(s) else 1.0
        else:
            thr = float(self.threshold)
        labels = np.ones(len(vectors), dtype=int)
        for i, si in enumerate(s):
            # tolerance keeps a similarity equal to the mean from splitting on rounding
            labels[i + 1] = labels[i] + (0 if si >= thr - TIE_TOL else 1)
        seqs = []
        for idx in range(1, labels.max() + 1):
            members = [v for v, lab in zip(vectors, labels) if lab == idx]
            seqs.append(Sequence(
                idx,
                tuple(m.book for m in members),
                tuple(c for m in members for c in m.chapters),
            ))
        self.similarities_ = s
        self.threshold_ = thr
        self.labels_ = labels
        self.sequences_ = seqs
        return self


def bundle_sequences(vectors, threshold="auto", similarity="cosine") -> list[Sequence]:
    return SequenceBundler(threshold, similarity).fit(vectors).sequences_


def attach_sentiment(sequences, spi_by_chapter: Mapping[int, float]) -> list[Sequence]:
    """Set each Sequence's mean polarity over its member chapters."""
    return [
        replace(s, mean_spi=float(np.mean([spi_by_chapter[c] for c in s.chapters])))
        for s in sequences
    ]


@dataclass(frozen=True)
class SequenceSnapshot:
    index: int
    network: CharacterNetwork
    signs: dict[tuple[str, str], int]
    pos_fraction: float
    neg_fraction: float

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "n_nodes": self.network.n_nodes,
            "n_edges": self.network.n_edges,
            "pos_fraction": self.pos_fraction,
            "neg_fraction": self.neg_fraction,
            "edges": [
                {"source": a, "target": b, "weight": self.network.edges[(a, b)].weight, "sign": s}
                for (a, b), s in self.signs.items()
            ],
        }


def sequence_snapshots(sequences, timelines, cosent: Mapping[tuple[str, str], float],
                       spi_by_chapter: Mapping[int, float] | None = None,
                       baseline: float | None = None) -> list[SequenceSnapshot]:
    """Co-appearance subnetwork of each Sequence with edge sentiment fractions.

    Edges take the sign of the whole-narrative cosentiment by default.  Passing
    ``spi_by_chapter`` and ``baseline`` switches to a local cosentiment: the
    pair's mean polarity over shared chapters inside the Sequence minus
    ``baseline``.
    """
    local = spi_by_chapter is not None
    if local and baseline is None:
        raise ValueError("local cosentiment needs the pair baseline")
    tl = check_timelines(timelines)
    out = []
    for seq in sequences:
        net = build_network(tl, chapters=seq.chapters)
        signs = {}
        for pair, e in net.edges.items():
            if local:
                value = float(np.mean([spi_by_chapter[c] for c in e.chapters])) - baseline
            else:
                value = cosent[pair]
            signs[pair] = sign_of(value)
        m = len(signs)
        pos = sum(1 for s in signs.values() if s > 0)
        neg = sum(1 for s in signs.values() if s < 0)
        out.append(SequenceSnapshot(seq.index, net, signs, pos / m if m else 0.0, neg / m if m else 0.0))
    return out
