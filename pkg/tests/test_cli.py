import json

import pytest
import yaml

from narranet.cli import EXIT_CONFIG, EXIT_DEPENDENCY, EXIT_OK, main
from narranet.export import read_csv, read_json
from narranet.resources import lesmiserables_dir
from synthetic import make_novel


@pytest.fixture
def workspace(tmp_path):
    text, timelines, _ = make_novel(seed=21, n_volumes=2, books_per_volume=3, chapters_per_book=4,
                                     empty_books=(4,))
    (tmp_path / "novel.txt").write_text(text, encoding="utf-8")
    roster = {"characters": [{"name": n, "aliases": [n]} for n in timelines]}
    (tmp_path / "roster.yaml").write_text(yaml.safe_dump(roster), encoding="utf-8")
    config = {
        "text": "novel.txt",
        "segmentation": str(lesmiserables_dir() / "segmentation.yaml"),
        "roster": "roster.yaml",
        "output_dir": "out",
        "topic_count": 3,
        "n_seeds": 3,
        "max_iter": 100,
        "stage_window": 3,
        "phase_characters": ["Anna", "Boris"],
        "phases": [{"name": "I", "start": 1, "end": 10}, {"name": "II", "start": 11, "end": 18},
                   {"name": "III", "start": 20, "end": 24}],
        "transfer_top_n": 2,
    }
    (tmp_path / "run.yaml").write_text(yaml.safe_dump(config), encoding="utf-8")
    return tmp_path, timelines


def test_all_stages_write_artifacts(workspace, capsys):
    root, timelines = workspace
    assert main(["all", "--config", str(root / "run.yaml"), "--quiet"]) == EXIT_OK
    out = root / "out"
    manifest = read_json(out / "manifest.json")
    assert list(manifest["stages"]) == ["ingest", "network", "sentiment", "sequences", "topics", "phases", "report"]
    assert all(s["seconds"] >= 0 for s in manifest["stages"].values())
    assert set(manifest["inputs"]) == {"text", "segmentation", "roster", "lexicon"}
    for rel in ("network/network.gexf", "network/network.dot", "network/growth.csv", "network/stages.json",
                "sentiment/chapter_spi.csv", "sentiment/community_cosentiment.json",
                "sequences/sequences.json", "topics/topics.json", "topics/H.csv",
                "phases/phase_report.json", "phases/transfers.dot", "report/report.json"):
        assert (out / rel).exists(), rel

    assert read_json(out / "timelines.json") == timelines
    growth = read_csv(out / "network" / "growth.csv")
    assert len(growth) == 24
    spi = read_csv(out / "sentiment" / "chapter_spi.csv")
    assert [int(r["ordinal"]) for r in spi] == list(range(1, 25))
    seqs = read_json(out / "sequences" / "sequences.json")
    assert seqs["n_books"] == 6 and seqs["n_retained_books"] == 5
    report = read_json(out / "phases" / "phase_report.json")
    assert report["gaps"] == [[19, 19]]
    assert len(report["phases"][0]["r_samples"]) >= 1
    groups = read_json(out / "report" / "report.json")
    assert len(groups) == 8


def test_rerun_is_deterministic(workspace):
    root, _ = workspace
    args = ["all", "--config", str(root / "run.yaml"), "--quiet"]
    assert main(args) == EXIT_OK
    first = (root / "out" / "topics" / "H.csv").read_bytes()
    phases = (root / "out" / "phases" / "phase_report.json").read_bytes()
    assert main(args) == EXIT_OK
    assert (root / "out" / "topics" / "H.csv").read_bytes() == first
    assert (root / "out" / "phases" / "phase_report.json").read_bytes() == phases


def test_stage_dependency_missing(workspace, capsys):
    root, _ = workspace
    code = main(["phases", "--config", str(root / "run.yaml"), "--quiet"])
    assert code == EXIT_DEPENDENCY
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["error"] == "StageDependencyMissing"


def test_stale_cache_is_refused(workspace):
    root, _ = workspace
    cfg = str(root / "run.yaml")
    assert main(["ingest", "--config", cfg, "--quiet"]) == EXIT_OK
    assert main(["network", "--config", cfg, "--quiet"]) == EXIT_OK
    # a different seed changes the config hash, so the cached ingest no longer applies
    assert main(["network", "--config", cfg, "--seed", "5", "--quiet"]) == EXIT_DEPENDENCY


def test_config_errors(workspace, tmp_path):
    root, _ = workspace
    assert main(["all", "--config", str(tmp_path / "missing.yaml"), "--quiet"]) == EXIT_CONFIG
    assert main(["all", "--config", str(root / "run.yaml"), "--topic-count", "0", "--quiet"]) == EXIT_CONFIG
    bad = yaml.safe_load((root / "run.yaml").read_text())
    bad["colour"] = "red"
    (root / "bad.yaml").write_text(yaml.safe_dump(bad))
    assert main(["ingest", "--config", str(root / "bad.yaml"), "--quiet"]) == EXIT_CONFIG
    bad = yaml.safe_load((root / "run.yaml").read_text())
    bad["phases"] = [{"name": "I", "start": 1, "end": 10}, {"name": "II", "start": 5, "end": 12}]
    (root / "overlap.yaml").write_text(yaml.safe_dump(bad))
    assert main(["ingest", "--config", str(root / "overlap.yaml"), "--quiet"]) == EXIT_CONFIG


def test_json_logs(workspace, capsys):
    root, _ = workspace
    assert main(["ingest", "--config", str(root / "run.yaml"), "--json-logs"]) == EXIT_OK
    lines = [json.loads(line) for line in capsys.readouterr().err.strip().splitlines()]
    assert any(rec["message"].startswith("stage ingest") for rec in lines)


def test_book_level_units(workspace):
    root, _ = workspace
    code = main(["network", "--config", str(root / "run.yaml"), "--unit-level", "book",
                 "--output-dir", str(root / "books"), "--quiet"])
    assert code == EXIT_DEPENDENCY
    cfg = yaml.safe_load((root / "run.yaml").read_text())
    cfg["phases"] = []
    cfg["phase_characters"] = []
    (root / "books.yaml").write_text(yaml.safe_dump(cfg))
    for stage in ("ingest", "network"):
        assert main([stage, "--config", str(root / "books.yaml"), "--unit-level", "book",
                     "--output-dir", str(root / "books"), "--quiet"]) == EXIT_OK
    assert len(read_csv(root / "books" / "network" / "growth.csv")) == 6
