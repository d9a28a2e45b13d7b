"""Lexicon sentiment scoring and its character, pair and community aggregates.

A chapter's polarity index is ``log10((pos + 1) / (neg + 1))`` where ``pos`` and
``neg`` are the percentages of its tokens matched by the positive and negative
word lists.  Lists follow the stem-wildcard convention: ``abandon*`` matches any
token starting with ``abandon``.
"""
from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import check_timelines
from .errors import ConfigError, EmptySubject
from .network import CharacterNetwork, CommunityPartition

NEUTRAL_TOL = 1e-12


@dataclass(frozen=True)
class SentimentLexicon:
    positive: frozenset[str]
    negative: frozenset[str]

    def __post_init__(self):
        for name, entries in (("positive", self.positive), ("negative", self.negative)):
            for e in entries:
                if not e or e == "*":
                    raise ConfigError(f"empty {name} lexicon entry")
                if "*" in e[:-1]:
                    raise ConfigError(f"wildcard must be the last character: {e!r}")
                if e != e.lower():
                    raise ConfigError(f"lexicon entries must be lowercase: {e!r}")
        both = self.positive & self.negative
        if both:
            raise ConfigError(f"entries in both categories: {sorted(both)[:5]}")
        object.__setattr__(self, "_pos", _Matcher(self.positive))
        object.__setattr__(self, "_neg", _Matcher(self.negative))

    @classmethod
    def from_lists(cls, positive, negative) -> "SentimentLexicon":
        return cls(frozenset(w.lower() for w in positive), frozenset(w.lower() for w in negative))

    @classmethod
    def parse(cls, text: str) -> "SentimentLexicon":
        """Parse the sectioned lexicon format (``[positive]`` / ``[negative]``, ``#`` comments)."""
        sections: dict[str, set[str]] = {"positive": set(), "negative": set()}
        current = None
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("[") and line.endswith("]"):
                current = line[1:-1].strip().lower()
                if current not in sections:
                    raise ConfigError(f"line {lineno}: unknown section [{current}]")
                continue
            if current is None:
                raise ConfigError(f"line {lineno}: entry outside a section")
            sections[current].add(line.lower())
        return cls(frozenset(sections["positive"]), frozenset(sections["negative"]))

    @classmethod
    def load(cls, path) -> "SentimentLexicon":
        return cls.parse(Path(path).read_text(encoding="utf-8"))

    def polarity(self, token: str) -> tuple[bool, bool]:
        return self._pos(token), self._neg(token)


class _Matcher:
    def __init__(self, entries):
        self.words = frozenset(e for e in entries if not e.endswith("*"))
        self.stems = frozenset(e[:-1] for e in entries if e.endswith("*"))
        self.max_stem = max((len(s) for s in self.stems), default=0)
        self._cache: dict[str, bool] = {}

    def _match(self, token: str) -> bool:
        if token in self.words:
            return True
        for i in range(1, min(len(token), self.max_stem) + 1):
            if token[:i] in self.stems:
                return True
        return False

    def __call__(self, token: str) -> bool:
        hit = self._cache.get(token)
        if hit is None:
            hit = self._cache[token] = self._match(token)
        return hit


def _pos_neg_counts(tokens, lexicon: SentimentLexicon) -> tuple[int, int]:
    pos = neg = 0
    match_pos, match_neg = lexicon._pos, lexicon._neg
    for t in tokens:
        pos += match_pos(t)
        neg += match_neg(t)
    return pos, neg


@dataclass(frozen=True)
class ChapterSentiment:
    ordinal: int
    positive: float
    negative: float
    spi: float


def spi(positive: float, negative: float) -> float:
    """Polarity index from positive and negative percentages."""
    return math.log10((positive + 1.0) / (negative + 1.0))


def score_chapter(tokens: Sequence[str], lexicon: SentimentLexicon, ordinal: int = 0) -> ChapterSentiment:
    n = len(tokens)
    if n == 0:
        return ChapterSentiment(ordinal, 0.0, 0.0, 0.0)
    pos, neg = _pos_neg_counts(tokens, lexicon)
    p = 100.0 * pos / n
    q = 100.0 * neg / n
    return ChapterSentiment(ordinal, p, q, spi(p, q))


class SentimentScorer(BaseEstimator, TransformerMixin):
    """Transform token lists into ``(positive %, negative %, spi)`` rows.

    Stateless; ``fit`` only validates the lexicon.
    """

    def __init__(self, lexicon=None):
        self.lexicon = lexicon

    def _lexicon(self) -> SentimentLexicon:
        if isinstance(self.lexicon, SentimentLexicon):
            return self.lexicon
        if self.lexicon is None:
            from .resources import default_lexicon_path

            return SentimentLexicon.load(default_lexicon_path())
        return SentimentLexicon.load(self.lexicon)

    def fit(self, X=None, y=None):
        self.lexicon_ = self._lexicon()
        return self

    def transform(self, X):
        lex = getattr(self, "lexicon_", None) or self._lexicon()
        rows = [score_chapter(tokens, lex) for tokens in X]
        return np.array([[r.positive, r.negative, r.spi] for r in rows], dtype=float).reshape(-1, 3)


def score_corpus(corpus, lexicon: SentimentLexicon) -> list[ChapterSentiment]:
    return [score_chapter(c.tokens, lexicon, c.ref.ordinal) for c in corpus.chapters]


@dataclass(frozen=True)
class SentimentProfile:
    subject: tuple[str, ...]
    chapters: tuple[int, ...]
    spi_set: tuple[float, ...]
    mean: float
    median: float
    q1: float
    q3: float
    stderr: float

    def to_json(self) -> dict:
        return {
            "subject": list(self.subject),
            "chapters": list(self.chapters),
            "spi_set": list(self.spi_set),
            "mean": self.mean,
            "median": self.median,
            "q1": self.q1,
            "q3": self.q3,
            "stderr": self.stderr,
        }


def aggregate_spi(subject_chapters, spi_by_chapter: Mapping[int, float], subject=()) -> SentimentProfile:
    """Collect the polarity indices of ``subject_chapters`` and summarize them.

    The box ``(q1, q3)`` spans the middle half of the values around the median.
    ``stderr`` is the standard error of the mean (0 for a single chapter).
    """
    chapters = tuple(sorted(set(subject_chapters)))
    if not chapters:
        raise EmptySubject(f"no chapters for subject {subject!r}")
    missing = [c for c in chapters if c not in spi_by_chapter]
    if missing:
        raise KeyError(f"unscored chapters: {missing[:5]}")
    values = np.array([spi_by_chapter[c] for c in chapters], dtype=float)
    q1, med, q3 = np.percentile(values, [25, 50, 75])
    se = float(values.std(ddof=1) / math.sqrt(len(values))) if len(values) > 1 else 0.0
    if isinstance(subject, str):
        subject = (subject,)
    return SentimentProfile(
        tuple(subject), chapters, tuple(float(v) for v in values),
        float(values.mean()), float(med), float(q1), float(q3), se,
    )


def character_profiles(timelines, spi_by_chapter) -> dict[str, SentimentProfile]:
    return {
        name: aggregate_spi(chs, spi_by_chapter, name)
        for name, chs in check_timelines(timelines).items()
        if chs
    }


def pair_profiles(network: CharacterNetwork, spi_by_chapter) -> dict[tuple[str, str], SentimentProfile]:
    return {pair: aggregate_spi(e.chapters, spi_by_chapter, pair) for pair, e in network.edges.items()}


def pair_baseline(profiles: Mapping) -> float:
    """Mean pair polarity over all connected pairs."""
    if not profiles:
        return 0.0
    return float(np.mean([p.mean for p in profiles.values()]))


def cosentiment(pair_profile, baseline: float) -> float:
    mean = pair_profile.mean if isinstance(pair_profile, SentimentProfile) else float(pair_profile)
    return mean - baseline


def sign_of(value: float) -> int:
    if abs(value) <= NEUTRAL_TOL:
        return 0
    return 1 if value > 0 else -1


def cosentiments(profiles: Mapping, baseline: float | None = None) -> dict[tuple[str, str], float]:
    if baseline is None:
        baseline = pair_baseline(profiles)
    return {pair: cosentiment(p, baseline) for pair, p in profiles.items()}


@dataclass(frozen=True)
class CosentimentCell:
    positive_fraction: float
    negative_fraction: float
    edge_count: int

    @property
    def log_radius(self) -> float | None:
        return math.log10(self.edge_count) if self.edge_count else None


@dataclass(frozen=True)
class CommunityCosentimentMatrix:
    labels: tuple[str, ...]
    cells: dict[tuple[str, str], CosentimentCell]

    def cell(self, a: str, b: str) -> CosentimentCell:
        i, j = self.labels.index(a), self.labels.index(b)
        key = (a, b) if i <= j else (b, a)
        return self.cells.get(key, CosentimentCell(0.0, 0.0, 0))

    def to_json(self) -> dict:
        return {
            "labels": list(self.labels),
            "cells": [
                {
                    "row": a,
                    "col": b,
                    "positive_fraction": c.positive_fraction,
                    "negative_fraction": c.negative_fraction,
                    "edge_count": c.edge_count,
                    "log_radius": c.log_radius,
                }
                for (a, b), c in self.cells.items()
            ],
        }


def community_cosentiments(network: CharacterNetwork, partition: CommunityPartition,
                           cosent: Mapping[tuple[str, str], float]) -> CommunityCosentimentMatrix:
    """Fractions of positive and negative edges inside and between communities.

    Cells are keyed by label pairs in label order; the diagonal holds
    intra-community edges.  Edges at exactly the baseline are neutral and count
    only toward ``edge_count``.
    """
    order = {lab: i for i, lab in enumerate(partition.labels)}
    tallies: dict[tuple[str, str], list[int]] = {}
    for pair in network.edges:
        la, lb = partition.assignment[pair[0]], partition.assignment[pair[1]]
        key = (la, lb) if order[la] <= order[lb] else (lb, la)
        t = tallies.setdefault(key, [0, 0, 0])
        s = sign_of(cosent[pair])
        t[0] += s > 0
        t[1] += s < 0
        t[2] += 1
    cells = {
        key: CosentimentCell(p / n, q / n, n)
        for key, (p, q, n) in sorted(tallies.items(), key=lambda kv: (order[kv[0][0]], order[kv[0][1]]))
    }
    return CommunityCosentimentMatrix(partition.labels, cells)
