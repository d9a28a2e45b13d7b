"""Character topical states, community topics and phase/transfer analysis.

A topical state is the topic-strength vector of a character over a window of
chapters: the column sums of H restricted to the window, normalized to 1.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .._validation import check_positive_int, check_timelines
from ..errors import EmptyWindow, InvalidPhases, ZeroMassWarning


@dataclass(frozen=True)
class TopicalState:
    window: tuple[int, ...]
    t: np.ndarray
    zero_mass: bool = False
    character: str | None = None

    def top(self, n: int = 5) -> list[int]:
        return [int(i) for i in np.argsort(-self.t, kind="stable")[:n]]

    def to_json(self) -> dict:
        return {
            "character": self.character,
            "window": list(self.window),
            "t": self.t.tolist(),
            "zero_mass": self.zero_mass,
        }


def topical_state(H, chapter_window, character: str | None = None) -> TopicalState:
    """Normalized topic strength over the chapters in ``chapter_window`` (1-based).

    Raises
    ------
    EmptyWindow
        If the window is empty.

    Warns
    -----
    ZeroMassWarning
        If H has no mass in the window; the state is then uniform and flagged.
    """
    H = np.asarray(H, dtype=float)
    window = tuple(sorted({int(c) for c in chapter_window}))
    if not window:
        raise EmptyWindow(f"empty chapter window for {character!r}")
    if window[0] < 1 or window[-1] > H.shape[1]:
        raise ValueError(f"window outside 1..{H.shape[1]}")
    mass = H[:, np.array(window) - 1].sum(axis=1)
    total = mass.sum()
    if total <= 0:
        warnings.warn(f"zero topic mass in window for {character!r}", ZeroMassWarning, stacklevel=2)
        return TopicalState(window, np.full(H.shape[0], 1.0 / H.shape[0]), True, character)
    return TopicalState(window, mass / total, False, character)


def community_topics(H, partition, timelines) -> dict[str, TopicalState]:
    """Topical state of each community over chapters holding two or more members."""
    tl = check_timelines(timelines)
    H = np.asarray(H, dtype=float)
    out = {}
    for label, members in partition.groups().items():
        counts: dict[int, int] = {}
        for m in members:
            for c in tl.get(m, ()):
                counts[c] = counts.get(c, 0) + 1
        chapters = sorted(c for c, n in counts.items() if n >= 2)
        if not chapters:
            warnings.warn(f"community {label} never co-appears", ZeroMassWarning, stacklevel=2)
            out[label] = TopicalState((), np.full(H.shape[0], 1.0 / H.shape[0]), True, label)
        else:
            out[label] = topical_state(H, chapters, label)
    return out


@dataclass(frozen=True)
class Phase:
    name: str
    start: int
    end: int

    @property
    def chapters(self) -> range:
        return range(self.start, self.end + 1)


def check_phases(phases, n_units: int | None = None) -> tuple[list[Phase], list[tuple[int, int]]]:
    """Validate phases; return them with the list of uncovered gaps between them."""
    out = []
    for p in phases:
        if isinstance(p, Phase):
            out.append(p)
        elif isinstance(p, dict):
            out.append(Phase(str(p["name"]), int(p["start"]), int(p["end"])))
        else:
            name, start, end = p
            out.append(Phase(str(name), int(start), int(end)))
    if not out:
        raise InvalidPhases("no phases given")
    gaps = []
    for i, p in enumerate(out):
        if p.start < 1 or p.end < p.start:
            raise InvalidPhases(f"phase {p.name!r} has an invalid range {p.start}..{p.end}")
        if n_units is not None and p.end > n_units:
            raise InvalidPhases(f"phase {p.name!r} ends after unit {n_units}")
        if i:
            prev = out[i - 1]
            if p.start <= prev.end:
                raise InvalidPhases(f"phases {prev.name!r} and {p.name!r} overlap or are out of order")
            if p.start > prev.end + 1:
                gaps.append((prev.end + 1, p.start - 1))
    return out, gaps


def pearson(u, v) -> float | None:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    du, dv = u - u.mean(), v - v.mean()
    den = np.sqrt((du * du).sum() * (dv * dv).sum())
    if den == 0:
        return None
    return float((du * dv).sum() / den)


def _phase_window(phase: Phase, window: int | None, mode: str) -> range:
    if mode == "cumulative":
        return range(1, phase.end + 1)
    if window is None:
        return phase.chapters
    return range(max(phase.start, phase.end - window + 1), phase.end + 1)


def phase_states(H, phases, timelines, characters, window=None, mode="phase"):
    """End-of-phase topical states for each character.

    Returns ``{character: [(state or None, present), ...]}`` aligned with
    ``phases``.  An absent character keeps its previous state (None before the
    first appearance).
    """
    if mode not in ("phase", "cumulative"):
        raise ValueError(f"mode must be 'phase' or 'cumulative', got {mode!r}")
    tl = check_timelines(timelines)
    out = {}
    for ch in characters:
        appear = set(tl.get(ch, ()))
        rows = []
        last = None
        for p in phases:
            chs = [c for c in _phase_window(p, window, mode) if c in appear]
            if chs:
                last = topical_state(H, chs, ch)
                rows.append((last, True))
            else:
                rows.append((last, False))
        out[ch] = rows
    return out


@dataclass(frozen=True)
class TransferLabel:
    topic: int
    kind: str  # transferred | exogenous-both | single-entry
    source: str | None
    target: str | None
    evidence: dict

    def to_json(self) -> dict:
        return {"topic": self.topic, "kind": self.kind, "source": self.source,
                "target": self.target, "evidence": self.evidence}


def classify_transfers(before_states, deltas, top_n: int = 5):
    """Label the strongest-gaining topics of a character pair.

    ``before_states`` and ``deltas`` map each of the two characters to a topic
    vector.  For each character's ``top_n`` largest positive gains:

    * ``transferred`` from the other character if the topic was among the other
      character's ``top_n`` strongest before;
    * ``exogenous-both`` if it was below both characters' median before and is
      among both characters' top gains;
    * ``single-entry`` if it was below both medians and gains for one only.

    Returns the labels and the diagram edges ``(topic, source, target)``, where
    the source of an exogenous topic is ``None``.
    """
    top_n = check_positive_int(top_n, "top_n")
    a, b = list(before_states)
    before = {c: np.asarray(before_states[c], dtype=float) for c in (a, b)}
    delta = {c: np.asarray(deltas[c], dtype=float) for c in (a, b)}
    strong = {c: set(np.argsort(-before[c], kind="stable")[:top_n].tolist()) for c in (a, b)}
    gains = {
        c: [int(k) for k in np.argsort(-delta[c], kind="stable")[:top_n] if delta[c][k] > 0]
        for c in (a, b)
    }
    median = {c: float(np.median(before[c])) for c in (a, b)}

    def weak_both(k):
        return before[a][k] < median[a] and before[b][k] < median[b]

    def evidence(k):
        return {
            "before": {c: float(before[c][k]) for c in (a, b)},
            "delta": {c: float(delta[c][k]) for c in (a, b)},
        }

    labels = []
    seen_exo = set()
    for target, source in ((a, b), (b, a)):
        for k in gains[target]:
            if k in strong[source]:
                labels.append(TransferLabel(k, "transferred", source, target, evidence(k)))
            elif weak_both(k) and k in gains[source]:
                if k not in seen_exo:
                    seen_exo.add(k)
                    labels.append(TransferLabel(k, "exogenous-both", None, None, evidence(k)))
            elif weak_both(k):
                labels.append(TransferLabel(k, "single-entry", None, target, evidence(k)))
    edges = []
    for lab in labels:
        if lab.kind == "exogenous-both":
            edges += [(lab.topic, None, a), (lab.topic, None, b)]
        else:
            edges.append((lab.topic, lab.source, lab.target))
    return labels, edges


def _phase_correlations(H, phases, timelines, pair, window, mode):
    states = phase_states(H, phases, timelines, pair, window, mode)
    rs = []
    for i in range(len(phases)):
        sa, sb = states[pair[0]][i][0], states[pair[1]][i][0]
        rs.append(pearson(sa.t, sb.t) if sa is not None and sb is not None else None)
    return states, rs


def phase_analysis(H, phases, timelines, characters, window=None, top_n=5,
                   H_replicates=(), mode="phase", n_units=None) -> dict:
    """Topical-state dynamics of a character pair across narrative phases.

    For each phase: each character's end-of-phase state (see
    :func:`phase_states`), the change from the previous phase, the Pearson
    correlation of the two states, and transfer labels.  The correlation
    uncertainty is the standard deviation over ``H_replicates`` (factor matrices
    from other NMF seeds) when given.
    """
    pair = tuple(characters)
    if len(pair) != 2:
        raise ValueError("phase analysis needs exactly two characters")
    H = np.asarray(H, dtype=float)
    phases, gaps = check_phases(phases, n_units if n_units is not None else H.shape[1])
    states, rs = _phase_correlations(H, phases, timelines, pair, window, mode)
    rep_rs = [_phase_correlations(Hr, phases, timelines, pair, window, mode)[1] for Hr in H_replicates]

    report_phases = []
    transfer_edges = []
    for i, p in enumerate(phases):
        entry = {"name": p.name, "start": p.start, "end": p.end, "characters": {}}
        before, deltas = {}, {}
        for ch in pair:
            state, present = states[ch][i]
            prev = states[ch][i - 1][0] if i else None
            d = state.t - prev.t if state is not None and prev is not None else None
            entry["characters"][ch] = {
                "present": present,
                "state": state.t.tolist() if state is not None else None,
                "delta": d.tolist() if d is not None else None,
                "top_gains": [int(k) for k in np.argsort(-d, kind="stable")[:top_n]] if d is not None else None,
            }
            if prev is not None and d is not None:
                before[ch], deltas[ch] = prev.t, d
        samples = [r[i] for r in rep_rs if r[i] is not None]
        if rs[i] is not None:
            samples = [rs[i]] + samples
        entry["r"] = rs[i]
        entry["r_samples"] = samples
        entry["r_std"] = float(np.std(samples, ddof=1)) if len(samples) > 1 else None
        if len(before) == 2:
            labels, edges = classify_transfers(before, deltas, top_n)
            entry["transfers"] = [lab.to_json() for lab in labels]
            transfer_edges += [
                {"topic": k, "source": s, "target": t, "phase": p.name} for k, s, t in edges
            ]
        else:
            entry["transfers"] = []
        report_phases.append(entry)
    return {
        "characters": list(pair),
        "window": window,
        "mode": mode,
        "gaps": [list(g) for g in gaps],
        "phases": report_phases,
        "transfer_edges": transfer_edges,
    }
