"""Input validation helpers in the spirit of ``sklearn.utils.validation``."""
from __future__ import annotations

from collections.abc import Iterable, Mapping

import numpy as np


def check_nonnegative_matrix(X, name="X"):
    """Return ``X`` as a 2-d float64 array, rejecting negatives and non-finite values."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains NaN or infinity")
    if X.size and X.min() < 0:
        raise ValueError(f"{name} must be non-negative")
    return X


def check_timelines(timelines) -> dict[str, tuple[int, ...]]:
    """Normalize a timeline collection to ``{name: sorted tuple of ordinals}``.

    Accepts a mapping of name to ordinal iterable (or to Timeline), or an iterable of objects with
    ``character`` and ``chapters`` attributes (e.g. :class:`narranet.corpus.Timeline`).
    """
    if isinstance(timelines, Mapping):
        items = timelines.items()
    elif isinstance(timelines, Iterable):
        items = ((t.character, t.chapters) for t in timelines)
    else:
        raise TypeError("timelines must be a mapping or an iterable of Timeline")
    out = {}
    for name, chapters in items:
        chapters = getattr(chapters, "chapters", chapters)
        chs = sorted({int(c) for c in chapters})
        if chs and chs[0] < 1:
            raise ValueError(f"timeline of {name!r} contains non-positive ordinal {chs[0]}")
        out[str(name)] = tuple(chs)
    return dict(sorted(out.items()))


def check_positive_int(value, name):
    if isinstance(value, bool) or int(value) != value or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return int(value)
