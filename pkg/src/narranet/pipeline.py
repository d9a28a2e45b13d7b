"""Stage-by-stage orchestration with cached intermediate artifacts.

Every stage reads the caches of the stages it depends on from the output
directory and writes its own.  A stage's completion marker records the config
hash, so a downstream stage refuses to run on missing or stale upstream output.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .corpus import (
    Chapter, CharacterRoster, Corpus, SegmentationConfig, UnitRef,
    detect_appearances, parse_narrative, read_text, timelines_from_json, timelines_to_json,
)
from .errors import ConfigError, InvalidPhases, StageDependencyMissing
from .export import (
    annotated_graph, read_json, transfer_diagram, write_csv, write_dot, write_gexf,
    write_json, write_matrix_csv,
)
from .network import (
    CharacterNetwork, CommunityPartition, build_network, centralities, detect_communities,
    detect_stages, growth_series, path_statistics,
)
from .resources import default_lexicon_path
from .sentiment import (
    SentimentLexicon, character_profiles, community_cosentiments, cosentiments,
    pair_baseline, pair_profiles, score_corpus,
)
from .sequence import (
    Sequence, SequenceBundler, attach_sentiment, book_vectors, sequence_snapshots,
)
from .topics import (
    build_tfidf, check_phases, community_topics, nnmf, phase_analysis, topic_keywords,
    topical_state,
)

logger = logging.getLogger(__name__)

STAGES = ("ingest", "network", "sentiment", "sequences", "topics", "phases", "report")
DEPENDS = {
    "ingest": (),
    "network": ("ingest",),
    "sentiment": ("ingest", "network"),
    "sequences": ("ingest", "network", "sentiment"),
    "topics": ("ingest", "network"),
    "phases": ("ingest", "topics"),
    "report": ("ingest", "network", "sentiment", "sequences", "topics", "phases"),
}
# parameters that never change an analysis output
_UNHASHED = {"output_dir", "text", "segmentation", "roster", "lexicon"}


@dataclass
class PipelineConfig:
    text: Path | None = None
    segmentation: Path | None = None
    roster: Path | None = None
    lexicon: Path | None = None
    output_dir: Path = Path("out")
    unit_level: str = "chapter"
    vocab: dict = field(default_factory=lambda: {
        "stop_words": "english", "min_df": 2, "max_df": 0.95, "min_length": 2,
    })
    topic_count: int = 50
    seed: int = 0
    n_seeds: int = 10
    max_iter: int = 200
    rel_tol: float = 1e-4
    sequence_threshold: float | str = "auto"
    sequence_similarity: str = "cosine"
    sequence_weighting: str = "binary"
    local_cosentiment: bool = False
    stage_window: int = 10
    burst_z: float = 2.0
    phase_characters: list = field(default_factory=list)
    phases: list = field(default_factory=list)
    phase_window: int | None = None
    phase_mode: str = "phase"
    transfer_top_n: int = 5
    top_keywords: int = 10

    @classmethod
    def load(cls, path=None, **overrides) -> "PipelineConfig":
        data: dict = {}
        base = Path.cwd()
        if path is not None:
            path = Path(path)
            if not path.exists():
                raise ConfigError(f"config file not found: {path}")
            with open(path, encoding="utf-8") as fh:
                data = yaml.safe_load(fh) or {}
            base = path.parent
        data.update({k: v for k, v in overrides.items() if v is not None})
        unknown = set(data) - {f.name for f in dataclasses.fields(cls)}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key in ("text", "segmentation", "roster", "lexicon", "output_dir"):
            if data.get(key) is not None:
                p = Path(data[key]).expanduser()
                data[key] = p if p.is_absolute() else (base / p)
        cfg = cls(**data)
        cfg.validate()
        return cfg

    def validate(self):
        for key in ("text", "segmentation", "roster", "lexicon"):
            p = getattr(self, key)
            if p is not None and not Path(p).exists():
                raise ConfigError(f"{key} file not found: {p}")
        for key in ("text", "roster"):
            if getattr(self, key) is None:
                raise ConfigError(f"config needs a {key} file")
        for key in ("topic_count", "n_seeds", "max_iter", "stage_window", "transfer_top_n", "top_keywords"):
            v = getattr(self, key)
            if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                raise ConfigError(f"{key} must be a positive integer, got {v!r}")
        if not (isinstance(self.rel_tol, (int, float)) and self.rel_tol >= 0):
            raise ConfigError("rel_tol must be a non-negative number")
        if self.burst_z < 0:
            raise ConfigError("burst_z must be non-negative")
        if self.unit_level not in ("chapter", "book", "volume"):
            raise ConfigError(f"unknown unit level {self.unit_level!r}")
        if self.sequence_threshold != "auto":
            try:
                self.sequence_threshold = float(self.sequence_threshold)
            except (TypeError, ValueError):
                raise ConfigError("sequence_threshold must be 'auto' or a number") from None
        if self.sequence_similarity not in ("cosine", "jaccard"):
            raise ConfigError("sequence_similarity must be cosine or jaccard")
        if self.sequence_weighting not in ("binary", "count"):
            raise ConfigError("sequence_weighting must be binary or count")
        if self.phase_mode not in ("phase", "cumulative"):
            raise ConfigError("phase_mode must be phase or cumulative")
        if self.phase_window is not None and (not isinstance(self.phase_window, int) or self.phase_window < 1):
            raise ConfigError("phase_window must be a positive integer or null")
        if self.phases and len(self.phase_characters) != 2:
            raise ConfigError("phase_characters must name exactly two characters")
        if self.phases:
            try:
                check_phases(self.phases)
            except (InvalidPhases, KeyError, TypeError, ValueError) as exc:
                raise ConfigError(f"invalid phases: {exc}") from None

    def parameters(self) -> dict:
        out = {}
        for f in dataclasses.fields(self):
            if f.name in _UNHASHED:
                continue
            out[f.name] = getattr(self, f.name)
        return out

    def input_digests(self) -> dict[str, str | None]:
        digests = {}
        for key in ("text", "segmentation", "roster", "lexicon"):
            p = getattr(self, key)
            if key == "lexicon" and p is None:
                p = default_lexicon_path()
            digests[key] = sha256_file(p) if p is not None else None
        return digests

    def config_hash(self) -> str:
        payload = {"parameters": self.parameters(), "inputs": self.input_digests()}
        blob = json.dumps(payload, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


class Pipeline:
    """Runs named stages against one output directory."""

    def __init__(self, config: PipelineConfig):
        self.config = config
        self.out = Path(config.output_dir)
        self.cache = self.out / "cache"
        self._hash = config.config_hash()

    # -- bookkeeping ---------------------------------------------------------
    def _marker(self, stage):
        return self.cache / f"{stage}.done.json"

    def _require(self, stage):
        for dep in DEPENDS[stage]:
            marker = self._marker(dep)
            if not marker.exists():
                raise StageDependencyMissing(f"stage {stage!r} needs {dep!r}; run it first")
            if read_json(marker).get("config_hash") != self._hash:
                raise StageDependencyMissing(f"cached {dep!r} output is from a different config; rerun it")

    def _finish(self, stage, outputs, seconds):
        write_json({"stage": stage, "config_hash": self._hash}, self._marker(stage))
        manifest_path = self.out / "manifest.json"
        manifest = read_json(manifest_path) if manifest_path.exists() else {}
        if manifest.get("config_hash") != self._hash:
            manifest = {"stages": {}}
        manifest.update({
            "engine_version": __version__,
            "config_hash": self._hash,
            "inputs": {k: {"path": str(getattr(self.config, k) or default_lexicon_path()), "sha256": v}
                       for k, v in self.config.input_digests().items() if v is not None},
            "parameters": json.loads(json.dumps(self.config.parameters(), default=str)),
        })
        manifest.setdefault("stages", {})[stage] = {
            "outputs": sorted(str(Path(p).relative_to(self.out)) for p in outputs),
            "seconds": round(seconds, 4),
        }
        write_json(manifest, manifest_path)

    def run(self, stage: str):
        if stage == "all":
            for s in STAGES:
                self.run(s)
            return
        if stage not in STAGES:
            raise ConfigError(f"unknown stage {stage!r}")
        self._require(stage)
        start = time.perf_counter()
        logger.info("stage %s: start", stage)
        outputs = getattr(self, f"_stage_{stage}")()
        elapsed = time.perf_counter() - start
        logger.info("stage %s: done in %.2fs", stage, elapsed)
        self._finish(stage, outputs, elapsed)

    # -- cache loaders ---------------------------------------------------------
    def load_corpus(self) -> Corpus:
        data = read_json(self.cache / "corpus.json")
        chapters = tuple(
            Chapter(UnitRef(c["ordinal"], c["volume"], c["book"], c["chapter"]), c["title"], "", tuple(c["tokens"]))
            for c in data["chapters"]
        )
        return Corpus(chapters, (), data["level"])

    def load_timelines(self):
        return timelines_from_json(read_json(self.out / "timelines.json"))

    def load_network(self) -> CharacterNetwork:
        return CharacterNetwork.from_json(read_json(self.cache / "network.json"))

    def load_partition(self) -> CommunityPartition:
        return CommunityPartition.from_json(read_json(self.out / "network" / "communities.json"))

    def load_sentiment(self):
        data = read_json(self.cache / "sentiment.json")
        spi = {int(k): v for k, v in data["spi"].items()}
        cos = {tuple(k.split("\t")): v for k, v in data["cosentiment"].items()}
        return spi, cos, data["baseline"]

    def load_topics(self):
        with np.load(self.cache / "topics.npz") as z:
            return z["H"], [z[f"H_{i}"] for i in range(int(z["n_replicates"]))]

    # -- stages ----------------------------------------------------------------
    def _stage_ingest(self):
        cfg = self.config
        markers = SegmentationConfig.load(cfg.segmentation) if cfg.segmentation else SegmentationConfig()
        corpus = parse_narrative(read_text(cfg.text), markers)
        roster = CharacterRoster.load(cfg.roster)
        timelines = detect_appearances(corpus, roster)
        corpus = corpus.regroup(cfg.unit_level)
        if cfg.unit_level != "chapter":
            # reattach timelines to the coarser units
            timelines = detect_appearances(corpus, roster)
        if cfg.phases:
            check_phases(cfg.phases, corpus.n_chapters)
        cache = {
            "level": corpus.level,
            "chapters": [
                {"ordinal": c.ref.ordinal, "volume": c.ref.volume_index, "book": c.ref.book_index,
                 "chapter": c.ref.chapter_index, "title": c.title, "tokens": list(c.tokens)}
                for c in corpus.chapters
            ],
        }
        return [
            write_json(cache, self.cache / "corpus.json"),
            write_json(corpus.to_manifest(), self.out / "corpus_manifest.json"),
            write_json(timelines_to_json(timelines), self.out / "timelines.json"),
        ]

    def _stage_network(self):
        cfg = self.config
        corpus = self.load_corpus()
        timelines = self.load_timelines()
        net = build_network(timelines)
        growth = growth_series(timelines, corpus.n_chapters)
        partition = detect_communities(net, cfg.seed)
        stages = detect_stages(growth, cfg.stage_window, cfg.burst_z)
        stats = path_statistics(net) if net.n_nodes else None
        cent = centralities(net, timelines)
        d = self.out / "network"
        graph = annotated_graph(net, partition, centrality=cent)
        names = [n for n, t in timelines.items() if t.chapters]
        return [
            write_json(net.to_json(), self.cache / "network.json"),
            write_csv(growth.to_rows(), d / "growth.csv"),
            write_csv(growth.to_rows(names), d / "growth_characters.csv"),
            write_json([s.to_json() for s in stages], d / "stages.json"),
            write_json(stats, d / "path_statistics.json"),
            write_json(cent, d / "centralities.json"),
            write_json(partition.to_json(), d / "communities.json"),
            write_gexf(graph, d / "network.gexf"),
            write_dot(graph, d / "network.dot", "characters"),
        ]

    def _stage_sentiment(self):
        cfg = self.config
        corpus = self.load_corpus()
        timelines = self.load_timelines()
        net = self.load_network()
        partition = self.load_partition()
        lexicon = SentimentLexicon.load(cfg.lexicon or default_lexicon_path())
        scores = score_corpus(corpus, lexicon)
        spi = {s.ordinal: s.spi for s in scores}
        chars = character_profiles(timelines, spi)
        pairs = pair_profiles(net, spi)
        baseline = pair_baseline(pairs)
        cos = cosentiments(pairs, baseline)
        matrix = community_cosentiments(net, partition, cos)
        values = np.array(list(spi.values()))
        summary = {
            "mean_chapter_spi": float(values.mean()) if len(values) else 0.0,
            "chapter_spi_stderr": float(values.std(ddof=1) / np.sqrt(len(values))) if len(values) > 1 else 0.0,
            "pair_baseline": baseline,
        }
        d = self.out / "sentiment"
        graph = annotated_graph(net, partition, cos, centralities(net, timelines))
        return [
            write_json({"spi": {str(k): v for k, v in spi.items()},
                        "cosentiment": {"\t".join(k): v for k, v in cos.items()},
                        "baseline": baseline}, self.cache / "sentiment.json"),
            write_csv(({"ordinal": s.ordinal, "positive": s.positive, "negative": s.negative, "spi": s.spi}
                       for s in scores), d / "chapter_spi.csv", ["ordinal", "positive", "negative", "spi"]),
            write_json({
                "summary": summary,
                "characters": {k: p.to_json() for k, p in chars.items()},
                "pairs": [dict(p.to_json(), cosentiment=cos[k]) for k, p in pairs.items()],
            }, d / "profiles.json"),
            write_json(matrix.to_json(), d / "community_cosentiment.json"),
            write_gexf(graph, d / "network_sentiment.gexf"),
            write_dot(graph, d / "network_sentiment.dot", "characters"),
        ]

    def _stage_sequences(self):
        cfg = self.config
        corpus = self.load_corpus()
        timelines = self.load_timelines()
        spi, cos, baseline = self.load_sentiment()
        vectors = book_vectors(timelines, corpus, cfg.sequence_weighting)
        bundler = SequenceBundler(cfg.sequence_threshold, cfg.sequence_similarity).fit(vectors)
        seqs = attach_sentiment(bundler.sequences_, spi)
        local = {"spi_by_chapter": spi, "baseline": baseline} if cfg.local_cosentiment else {}
        snaps = sequence_snapshots(seqs, timelines, cos, **local)
        d = self.out / "sequences"
        outputs = [
            write_json({
                "threshold": bundler.threshold_,
                "n_books": corpus.n_books,
                "n_retained_books": len(vectors),
                "retained_books": [list(v.book) for v in vectors],
                "sequences": [s.to_json() for s in seqs],
            }, d / "sequences.json"),
            write_csv(({"from_book": "%d.%d" % vectors[i].book, "to_book": "%d.%d" % vectors[i + 1].book,
                        "similarity": float(s)} for i, s in enumerate(bundler.similarities_)),
                      d / "similarities.csv", ["from_book", "to_book", "similarity"]),
            write_json([s.to_json() for s in snaps], d / "snapshots.json"),
        ]
        for snap in snaps:
            g = annotated_graph(snap.network, signs=snap.signs)
            outputs.append(write_gexf(g, d / "snapshots" / f"sequence_{snap.index:02d}.gexf"))
        return outputs

    def _models(self, M):
        cfg = self.config
        return [nnmf(M, cfg.topic_count, cfg.seed + i, cfg.max_iter, cfg.rel_tol) for i in range(cfg.n_seeds)]

    def _stage_topics(self):
        cfg = self.config
        corpus = self.load_corpus()
        timelines = self.load_timelines()
        partition = self.load_partition()
        vocab, M = build_tfidf(corpus, **cfg.vocab)
        models = self._models(M)
        model = models[0]
        keywords = topic_keywords(model.Q, vocab.words, cfg.top_keywords)
        states = {name: topical_state(model.H, t.chapters, name) for name, t in timelines.items() if t.chapters}
        comm = community_topics(model.H, partition, timelines)
        d = self.out / "topics"
        arrays = {"H": model.H, "n_replicates": np.array(len(models) - 1)}
        arrays.update({f"H_{i}": m.H for i, m in enumerate(models[1:])})
        self.cache.mkdir(parents=True, exist_ok=True)
        np.savez(self.cache / "topics.npz", **arrays)
        topic_table = [
            {"index": j, "label": f"T{j + 1}", "keywords": kw, "strength": float(model.H[j].sum())}
            for j, kw in enumerate(keywords)
        ]
        return [
            self.cache / "topics.npz",
            write_json(topic_table, d / "topics.json"),
            write_json({"words": list(vocab.words), "df": vocab.df.astype(int).tolist(),
                        "filters": vocab.filters}, d / "vocabulary.json"),
            write_json({
                "seeds": [m.seed for m in models],
                "iterations": [m.n_iter for m in models],
                "reconstruction_error": [m.reconstruction_error for m in models],
                "error_trace": list(model.error_trace),
            }, d / "solver.json"),
            write_matrix_csv(model.H, d / "H.csv", [f"T{j + 1}" for j in range(model.topic_count)],
                             [str(c.ref.ordinal) for c in corpus.chapters]),
            write_matrix_csv(model.Q, d / "Q.csv", list(vocab.words),
                             [f"T{j + 1}" for j in range(model.topic_count)]),
            write_json({k: s.to_json() for k, s in states.items()}, d / "topical_states.json"),
            write_json({k: dict(s.to_json(), members=partition.members(k)) for k, s in comm.items()},
                       d / "community_topics.json"),
        ]

    def _stage_phases(self):
        cfg = self.config
        if not cfg.phases:
            raise ConfigError("no phases configured")
        corpus = self.load_corpus()
        timelines = self.load_timelines()
        H, replicates = self.load_topics()
        report = phase_analysis(
            H, cfg.phases, timelines, cfg.phase_characters, window=cfg.phase_window,
            top_n=cfg.transfer_top_n, H_replicates=replicates, mode=cfg.phase_mode,
            n_units=corpus.n_chapters,
        )
        table = read_json(self.out / "topics" / "topics.json")
        names = {t["index"]: t["keywords"][0]["word"] for t in table}
        report["topic_names"] = {str(k): v for k, v in names.items()}
        d = self.out / "phases"
        return [
            write_json(report, d / "phase_report.json"),
            write_dot(transfer_diagram(report, names), d / "transfers.dot", "transfers"),
        ]

    def _stage_report(self):
        d = self.out / "report"
        o = self.out
        growth = o / "network" / "growth.csv"
        groups = {
            "growth": {"growth_series": str(growth.relative_to(o)),
                            "stages": "network/stages.json"},
            "centralities": {"centralities": "network/centralities.json",
                                  "growth_characters": "network/growth_characters.csv",
                                  "histograms": _histograms(read_json(o / "network" / "centralities.json")),
                                  "community_cosentiment": "sentiment/community_cosentiment.json",
                                  "profiles": "sentiment/profiles.json"},
            "chapter_sentiment": {"chapter_spi": "sentiment/chapter_spi.csv",
                                  "sequence_shading": [
                                      {k: s[k] for k in ("index", "first_chapter", "last_chapter", "sign")}
                                      for s in read_json(o / "sequences" / "sequences.json")["sequences"]
                                  ]},
            "network": {"gexf": "sentiment/network_sentiment.gexf",
                             "communities": "network/communities.json",
                             "path_statistics": "network/path_statistics.json"},
            "sequence_snapshots": {"snapshots": "sequences/snapshots.json", "gexf_dir": "sequences/snapshots"},
            "topics": {"topic_table": "topics/topics.json"},
            "topic_profiles": {"characters": "topics/topical_states.json",
                                  "communities": "topics/community_topics.json"},
            "phases": {"phase_report": "phases/phase_report.json",
                            "transfer_diagram": "phases/transfers.dot"},
        }
        return [write_json(groups, d / "report.json")]


def _histograms(cent: dict) -> dict:
    out = {}
    for key in ("appearance", "degree", "weighted_degree"):
        values = [c[key] for c in cent.values()]
        counts: dict[int, int] = {}
        for v in values:
            counts[v] = counts.get(v, 0) + 1
        out[key] = {
            "counts": {str(k): counts[k] for k in sorted(counts)},
            "mean": float(np.mean(values)) if values else 0.0,
            "median": float(np.median(values)) if values else 0.0,
        }
    return out
