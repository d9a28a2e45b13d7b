"""Character co-appearance network, its growth over narrative time, and structure.

Two characters are linked when they appear in the same narrative unit; the edge
weight counts the shared units.  Growth series track the cumulative number of
nodes and edges (and per-character appearance and degree) chapter by chapter.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import networkx as nx
import numpy as np
from sklearn.base import BaseEstimator

from ._validation import check_positive_int, check_timelines
from .errors import EmptyNetwork


@dataclass(frozen=True)
class Edge:
    weight: int
    chapters: tuple[int, ...]


def edge_key(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class CharacterNetwork:
    """Undirected weighted co-appearance graph; edge keys are name-sorted pairs."""

    nodes: tuple[str, ...]
    edges: dict[tuple[str, str], Edge] = field(default_factory=dict)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def neighbors(self, node: str) -> list[str]:
        return sorted(b if a == node else a for a, b in self.edges if node in (a, b))

    def weight(self, a: str, b: str) -> int:
        e = self.edges.get(edge_key(a, b))
        return e.weight if e else 0

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(self.nodes)
        for (a, b), e in self.edges.items():
            g.add_edge(a, b, weight=e.weight)
        return g

    def to_json(self) -> dict:
        return {
            "nodes": list(self.nodes),
            "edges": [
                {"source": a, "target": b, "weight": e.weight, "chapters": list(e.chapters)}
                for (a, b), e in self.edges.items()
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "CharacterNetwork":
        edges = {
            edge_key(r["source"], r["target"]): Edge(int(r["weight"]), tuple(r["chapters"]))
            for r in data["edges"]
        }
        return cls(tuple(data["nodes"]), dict(sorted(edges.items())))


def build_network(timelines, chapters=None) -> CharacterNetwork:
    """Build the co-appearance network from character timelines.

    Characters that never appear are left out; characters appearing only alone
    become isolated nodes.  When ``chapters`` is given, only co-appearances inside
    that ordinal set count, though nodes are still every appearing character
    restricted to those chapters.
    """
    tl = check_timelines(timelines)
    if chapters is not None:
        keep = set(chapters)
        tl = {k: tuple(c for c in v if c in keep) for k, v in tl.items()}
    sets = {name: set(chs) for name, chs in tl.items() if chs}
    nodes = tuple(sorted(sets))
    edges = {}
    for a, b in itertools.combinations(nodes, 2):
        shared = sets[a] & sets[b]
        if shared:
            edges[(a, b)] = Edge(len(shared), tuple(sorted(shared)))
    return CharacterNetwork(nodes, edges)


@dataclass(frozen=True)
class GrowthSeries:
    """Cumulative counts indexed by ordinal ``t = 1..C`` (array position ``t - 1``)."""

    n: np.ndarray
    m: np.ndarray
    appearance: dict[str, np.ndarray]
    degree: dict[str, np.ndarray]

    @property
    def n_units(self) -> int:
        return len(self.n)

    def to_rows(self, characters=()) -> list[dict]:
        rows = []
        for i in range(self.n_units):
            row = {"ordinal": i + 1, "n": int(self.n[i]), "m": int(self.m[i])}
            for c in characters:
                row[f"a:{c}"] = int(self.appearance[c][i])
                row[f"k:{c}"] = int(self.degree[c][i])
            rows.append(row)
        return rows


def growth_series(timelines, n_units: int | None = None) -> GrowthSeries:
    """Cumulative node, edge, appearance and degree counts along the narrative.

    ``n(t)`` counts characters whose first appearance is at or before ``t`` and
    ``m(t)`` counts pairs whose first co-appearance is at or before ``t``.
    """
    tl = check_timelines(timelines)
    if n_units is None:
        n_units = max((chs[-1] for chs in tl.values() if chs), default=0)
    C = int(n_units)

    def cumulative(events):
        inc = np.zeros(C + 1, dtype=np.int64)
        for t in events:
            if t <= C:
                inc[t] += 1
        return np.cumsum(inc)[1:]

    firsts = {name: chs[0] for name, chs in tl.items() if chs}
    sets = {name: set(chs) for name, chs in tl.items()}
    pair_first = {}
    for a, b in itertools.combinations(sorted(firsts), 2):
        shared = sets[a] & sets[b]
        if shared:
            pair_first[(a, b)] = min(shared)

    appearance = {name: cumulative(chs) for name, chs in tl.items()}
    per_node_links: dict[str, list[int]] = {name: [] for name in tl}
    for (a, b), t in pair_first.items():
        per_node_links[a].append(t)
        per_node_links[b].append(t)
    degree = {name: cumulative(ts) for name, ts in per_node_links.items()}
    return GrowthSeries(
        n=cumulative(firsts.values()),
        m=cumulative(pair_first.values()),
        appearance=appearance,
        degree=degree,
    )


def path_statistics(network: CharacterNetwork) -> dict:
    """Density, mean geodesic length, diameter and clustering coefficient.

    Geodesics are unweighted; the mean and the diameter range over connected
    pairs only (the count of disconnected pairs is reported separately).  The
    clustering coefficient averages local clustering over nodes of degree >= 2.
    """
    n = network.n_nodes
    if n == 0:
        raise EmptyNetwork("network has no nodes")
    g = network.to_networkx()
    total = 0
    count = 0
    diameter = 0
    for _, lengths in nx.all_pairs_shortest_path_length(g):
        for d in lengths.values():
            if d > 0:
                total += d
                count += 1
                diameter = max(diameter, d)
    pairs = n * (n - 1) // 2
    local = nx.clustering(g)
    eligible = [local[v] for v in g if g.degree(v) >= 2]
    return {
        "n": n,
        "m": network.n_edges,
        "density": network.n_edges / pairs if pairs else 0.0,
        "mean_geodesic": total / count if count else 0.0,
        "diameter": diameter,
        "clustering_coefficient": float(np.mean(eligible)) if eligible else 0.0,
        "disconnected_pairs": pairs - count // 2,
    }


def centralities(network: CharacterNetwork, timelines) -> dict[str, dict]:
    """Per-node appearance, degree and weighted degree.

    ``weighted_degree`` is the sum of incident edge weights.  ``degree_appearance``
    (degree times appearance) is reported alongside it as an alternative weighting.
    """
    tl = check_timelines(timelines)
    deg = {v: 0 for v in network.nodes}
    wdeg = {v: 0 for v in network.nodes}
    for (a, b), e in network.edges.items():
        deg[a] += 1
        deg[b] += 1
        wdeg[a] += e.weight
        wdeg[b] += e.weight
    out = {}
    for v in network.nodes:
        a = len(tl.get(v, ()))
        out[v] = {
            "appearance": a,
            "degree": deg[v],
            "weighted_degree": wdeg[v],
            "degree_appearance": deg[v] * a,
        }
    return out


ROMAN = [(1000, "M"), (900, "CM"), (500, "D"), (400, "CD"), (100, "C"), (90, "XC"),
         (50, "L"), (40, "XL"), (10, "X"), (9, "IX"), (5, "V"), (4, "IV"), (1, "I")]


def to_roman(number: int) -> str:
    out = []
    for value, numeral in ROMAN:
        while number >= value:
            out.append(numeral)
            number -= value
    return "".join(out)


@dataclass(frozen=True)
class CommunityPartition:
    assignment: dict[str, str]
    labels: tuple[str, ...]
    modularity: float

    def members(self, label: str) -> list[str]:
        return sorted(v for v, lab in self.assignment.items() if lab == label)

    def groups(self) -> dict[str, list[str]]:
        return {lab: self.members(lab) for lab in self.labels}

    def to_json(self) -> dict:
        return {"labels": list(self.labels), "modularity": self.modularity, "communities": self.groups()}

    @classmethod
    def from_json(cls, data: dict) -> "CommunityPartition":
        assignment = {v: lab for lab, vs in data["communities"].items() for v in vs}
        return cls(assignment, tuple(data["labels"]), float(data["modularity"]))


def modularity(network: CharacterNetwork, groups) -> float:
    """Weighted Newman modularity of a partition given as an iterable of node sets."""
    W = sum(e.weight for e in network.edges.values())
    if W == 0:
        return 0.0
    label = {v: i for i, grp in enumerate(groups) for v in grp}
    strength = {v: 0.0 for v in network.nodes}
    internal: dict[int, float] = {}
    for (a, b), e in network.edges.items():
        strength[a] += e.weight
        strength[b] += e.weight
        if label[a] == label[b]:
            internal[label[a]] = internal.get(label[a], 0.0) + e.weight
    total_strength: dict[int, float] = {}
    for v, s in strength.items():
        total_strength[label[v]] = total_strength.get(label[v], 0.0) + s
    return sum(internal.get(c, 0.0) / W - (d / (2 * W)) ** 2 for c, d in total_strength.items())


def detect_communities(network: CharacterNetwork, seed: int | None = None) -> CommunityPartition:
    """Greedy agglomerative modularity maximization on the weighted network.

    Starting from singletons, the pair of linked communities with the largest
    modularity gain is merged until no merge gains.  Equal gains are resolved
    by the alphabetically smallest member names, so the result is deterministic;
    ``seed`` is accepted for interface symmetry and has no effect.
    Labels I, II, ... are assigned by decreasing community size.
    """
    del seed
    W = float(sum(e.weight for e in network.edges.values()))
    comms: dict[str, set[str]] = {v: {v} for v in network.nodes}  # keyed by min member name
    if W > 0:
        strength = {v: 0.0 for v in network.nodes}
        between: dict[tuple[str, str], float] = {}
        for (a, b), e in network.edges.items():
            strength[a] += e.weight
            strength[b] += e.weight
            between[edge_key(a, b)] = float(e.weight)
        while between:
            gains = {
                pair: w / W - strength[pair[0]] * strength[pair[1]] / (2 * W * W)
                for pair, w in between.items()
            }
            top = max(gains.values())
            if top <= 1e-12:
                break
            a, b = min(pair for pair, g in gains.items() if g >= top - 1e-12)
            keep, gone = (a, b) if a < b else (b, a)
            comms[keep] |= comms.pop(gone)
            strength[keep] += strength.pop(gone)
            merged: dict[tuple[str, str], float] = {}
            for (x, y), w in between.items():
                x = keep if x == gone else x
                y = keep if y == gone else y
                if x == y:
                    continue
                k = edge_key(x, y)
                merged[k] = merged.get(k, 0.0) + w
            between = merged
    ordered = sorted(comms.values(), key=lambda s: (-len(s), min(s)))
    labels = tuple(to_roman(i + 1) for i in range(len(ordered)))
    assignment = {v: labels[i] for i, grp in enumerate(ordered) for v in grp}
    return CommunityPartition(
        dict(sorted(assignment.items())), labels, modularity(network, ordered)
    )


@dataclass(frozen=True)
class StageAnnotation:
    kind: str  # node-burst | plateau | edge-led
    start: int
    end: int
    magnitude: float

    def to_json(self) -> dict:
        return {"kind": self.kind, "start": self.start, "end": self.end, "magnitude": self.magnitude}


def _runs(mask: np.ndarray) -> list[tuple[int, int]]:
    """Inclusive (start, end) index pairs of the True runs in ``mask``."""
    runs = []
    start = None
    for i, flag in enumerate(mask):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            runs.append((start, i - 1))
            start = None
    if start is not None:
        runs.append((start, len(mask) - 1))
    return runs


def _window_ranges(mask: np.ndarray, w: int) -> list[tuple[int, int]]:
    """Runs of flagged window starts, joined when their covered chapters overlap.

    A window starting at index ``i`` covers ``i .. i + w - 1``, so two runs whose
    start gap is shorter than ``w`` would otherwise yield overlapping ranges.
    """
    merged: list[list[int]] = []
    for s, e in _runs(mask):
        if merged and s <= merged[-1][1] + w - 1:
            merged[-1][1] = e
        else:
            merged.append([s, e])
    return [(s, e) for s, e in merged]


def detect_stages(growth: GrowthSeries, window: int = 10, burst_z: float = 2.0) -> list[StageAnnotation]:
    """Annotate node bursts, plateaus and edge-led stretches of a growth series.

    Per-chapter increments are summed over sliding windows of ``window`` chapters.
    A window is a node burst when its new-node count exceeds
    ``mean + burst_z * std`` of all windowed counts, and edge-led when its
    new-edge count exceeds the analogous edge threshold while its new-node count
    stays below the mean.  Overlapping flagged windows merge into one range.
    A plateau is a run of at least ``window`` chapters without a new node.
    """
    window = check_positive_int(window, "window")
    C = growth.n_units
    if C == 0:
        return []
    dn = np.diff(np.concatenate([[0], growth.n]))
    dm = np.diff(np.concatenate([[0], growth.m]))
    w = min(window, C)
    kernel = np.ones(w, dtype=np.int64)
    wn = np.convolve(dn, kernel, mode="valid")
    wm = np.convolve(dm, kernel, mode="valid")

    out = []
    node_thr = wn.mean() + burst_z * wn.std()
    for s, e in _window_ranges(wn > node_thr + 1e-12, w):
        out.append(StageAnnotation("node-burst", s + 1, e + w, float(wn[s : e + 1].max())))
    for s, e in _runs(dn == 0):
        if e - s + 1 >= window:
            out.append(StageAnnotation("plateau", s + 1, e + 1, float(e - s + 1)))
    edge_thr = wm.mean() + burst_z * wm.std()
    for s, e in _window_ranges((wm > edge_thr + 1e-12) & (wn < wn.mean()), w):
        out.append(StageAnnotation("edge-led", s + 1, e + w, float(wm[s : e + 1].max())))
    return sorted(out, key=lambda a: (a.start, a.kind))


class CoAppearanceNetwork(BaseEstimator):
    """Estimator wrapper: ``fit(timelines)`` computes the network and its summaries.

    Parameters
    ----------
    stage_window : int
        Sliding window, in units, for :func:`detect_stages`.
    burst_z : float
        Threshold in standard deviations for bursts.
    n_units : int or None
        Length of the growth series; defaults to the last appearance.

    Attributes
    ----------
    network_, growth_, partition_, stages_, path_stats_, centralities_
    """

    def __init__(self, stage_window=10, burst_z=2.0, n_units=None):
        self.stage_window = stage_window
        self.burst_z = burst_z
        self.n_units = n_units

    def fit(self, timelines, y=None):
        tl = check_timelines(timelines)
        self.network_ = build_network(tl)
        self.growth_ = growth_series(tl, self.n_units)
        self.partition_ = detect_communities(self.network_)
        self.stages_ = detect_stages(self.growth_, self.stage_window, self.burst_z)
        self.path_stats_ = path_statistics(self.network_) if self.network_.n_nodes else None
        self.centralities_ = centralities(self.network_, tl)
        return self
