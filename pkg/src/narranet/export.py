"""GEXF, DOT, CSV and JSON writers for pipeline artifacts."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import networkx as nx
import numpy as np

SIGN_COLORS = {1: "blue", -1: "red", 0: "gray"}


def annotated_graph(network, partition=None, cosent=None, centrality=None, signs=None) -> nx.Graph:
    """networkx graph carrying community, centrality and cosentiment attributes."""
    from .sentiment import sign_of

    g = nx.Graph()
    for v in network.nodes:
        attrs = {}
        if partition is not None:
            attrs["community"] = partition.assignment[v]
        if centrality is not None:
            attrs.update({k: int(x) for k, x in centrality[v].items()})
        g.add_node(v, **attrs)
    for pair, e in network.edges.items():
        attrs = {"weight": e.weight}
        s = None
        if signs is not None:
            s = signs[pair]
        if cosent is not None:
            attrs["cosentiment"] = float(cosent[pair])
            if s is None:
                s = sign_of(cosent[pair])
        if s is not None:
            attrs["sign"] = int(s)
            attrs["color"] = SIGN_COLORS[s]
        g.add_edge(*pair, **attrs)
    return g


def write_gexf(graph: nx.Graph, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    nx.write_gexf(graph, path)
    return path


def _dot_id(x) -> str:
    return '"' + str(x).replace("\\", "\\\\").replace('"', '\\"') + '"'


def _dot_attrs(attrs: dict) -> str:
    if not attrs:
        return ""
    body = ", ".join(f"{k}={_dot_id(v)}" for k, v in sorted(attrs.items()))
    return f" [{body}]"


def to_dot(graph: nx.Graph, name="G") -> str:
    directed = graph.is_directed()
    lines = [f"{'digraph' if directed else 'graph'} {_dot_id(name)} {{"]
    for v, attrs in graph.nodes(data=True):
        lines.append(f"  {_dot_id(v)}{_dot_attrs(attrs)};")
    arrow = "->" if directed else "--"
    for a, b, attrs in graph.edges(data=True):
        lines.append(f"  {_dot_id(a)} {arrow} {_dot_id(b)}{_dot_attrs(attrs)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_dot(graph: nx.Graph, path, name="G") -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(to_dot(graph, name), encoding="utf-8")
    return path


def transfer_diagram(report: dict, topic_names: dict[int, str] | None = None) -> nx.DiGraph:
    """Directed topic-flow graph from a phase report's transfer edges.

    Nodes are characters, topics (``T<k>``) and an ``exogenous`` source; every
    edge carries its phase.
    """
    g = nx.DiGraph()
    for ch in report["characters"]:
        g.add_node(ch, kind="character")
    for e in report["transfer_edges"]:
        topic = f"T{e['topic'] + 1}"
        label = topic_names.get(e["topic"], "") if topic_names else ""
        g.add_node(topic, kind="topic", label=f"{topic} {label}".strip())
        src = e["source"] if e["source"] is not None else "exogenous"
        if src == "exogenous":
            g.add_node(src, kind="source")
        g.add_edge(src, topic, phase=e["phase"])
        g.add_edge(topic, e["target"], phase=e["phase"])
    return g


def write_csv(rows, path, fieldnames=None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = list(rows)
    if fieldnames is None:
        fieldnames = list(rows[0]) if rows else []
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=fieldnames, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    return path


def read_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def write_matrix_csv(M, path, row_labels=None, col_labels=None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    M = np.asarray(M)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if col_labels is not None:
            w.writerow([""] + list(col_labels) if row_labels is not None else list(col_labels))
        for i, row in enumerate(M):
            vals = [repr(float(x)) for x in row]
            w.writerow([row_labels[i]] + vals if row_labels is not None else vals)
    return path


def _default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (set, frozenset)):
        return sorted(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def write_json(data, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, ensure_ascii=False, default=_default) + "\n", encoding="utf-8")
    return path


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))
