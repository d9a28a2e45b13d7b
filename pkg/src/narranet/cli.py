"""Command-line entry point: ``narranet <stage> --config run.yaml [overrides]``."""
from __future__ import annotations

import argparse
import json
import logging
import sys

from .errors import ConfigError, NarranetError, StageDependencyMissing
from .pipeline import STAGES, PipelineConfig, Pipeline

EXIT_OK, EXIT_CONFIG, EXIT_DEPENDENCY, EXIT_RUNTIME = 0, 2, 3, 4


class JsonFormatter(logging.Formatter):
    def format(self, record):
        return json.dumps({
            "time": self.formatTime(record),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
        })


def _threshold(value):
    return value if value == "auto" else float(value)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="narranet",
        description="Character networks, sentiment and topical states from a chaptered narrative.",
    )
    parser.add_argument("stage", choices=STAGES + ("all",))
    parser.add_argument("--config", help="YAML run configuration")
    parser.add_argument("--quiet", action="store_true", help="only log warnings and errors")
    parser.add_argument("--json-logs", action="store_true", help="log one JSON object per line")

    o = parser.add_argument_group("config overrides")
    o.add_argument("--text")
    o.add_argument("--segmentation")
    o.add_argument("--roster")
    o.add_argument("--lexicon")
    o.add_argument("--output-dir")
    o.add_argument("--unit-level", choices=("chapter", "book", "volume"))
    o.add_argument("--topic-count", type=int)
    o.add_argument("--seed", type=int)
    o.add_argument("--n-seeds", type=int)
    o.add_argument("--max-iter", type=int)
    o.add_argument("--rel-tol", type=float)
    o.add_argument("--sequence-threshold", type=_threshold)
    o.add_argument("--sequence-similarity", choices=("cosine", "jaccard"))
    o.add_argument("--sequence-weighting", choices=("binary", "count"))
    o.add_argument("--local-cosentiment", action="store_true", default=None)
    o.add_argument("--stage-window", type=int)
    o.add_argument("--burst-z", type=float)
    o.add_argument("--phase-window", type=int)
    o.add_argument("--phase-mode", choices=("phase", "cumulative"))
    o.add_argument("--transfer-top-n", type=int)
    o.add_argument("--top-keywords", type=int)
    return parser


_OVERRIDES = (
    "text", "segmentation", "roster", "lexicon", "output_dir", "unit_level", "topic_count",
    "seed", "n_seeds", "max_iter", "rel_tol", "sequence_threshold", "sequence_similarity",
    "sequence_weighting", "local_cosentiment", "stage_window", "burst_z", "phase_window",
    "phase_mode", "transfer_top_n", "top_keywords",
)


def _setup_logging(quiet: bool, json_logs: bool):
    handler = logging.StreamHandler(sys.stderr)
    if json_logs:
        handler.setFormatter(JsonFormatter())
    else:
        handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
    root = logging.getLogger("narranet")
    root.handlers[:] = [handler]
    root.setLevel(logging.WARNING if quiet else logging.INFO)
    root.propagate = False


def _fail(code: int, exc: BaseException) -> int:
    print(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": code}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _setup_logging(args.quiet, args.json_logs)
    overrides = {k: getattr(args, k) for k in _OVERRIDES}
    try:
        config = PipelineConfig.load(args.config, **overrides)
        Pipeline(config).run(args.stage)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, exc)
    except StageDependencyMissing as exc:
        return _fail(EXIT_DEPENDENCY, exc)
    except (NarranetError, OSError, ValueError, KeyError) as exc:
        return _fail(EXIT_RUNTIME, exc)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
