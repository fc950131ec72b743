import json
import shutil
import xml.etree.ElementTree as ET

import pytest

from topicalign.cli import main
from topicalign.errors import ConfigError
from topicalign.pipeline import load_config, run_pipeline, run_zoom
from topicalign.synth import write_demo


@pytest.fixture(scope="module")
def demo_dir(tmp_path_factory):
    """A small but complete demo dataset shared across this module."""
    root = tmp_path_factory.mktemp("demo")
    write_demo(root, seed=7, supply_docs=260, demand_docs=60, supply_k=5,
               demand_k=6, iterations=120)
    return root


@pytest.fixture(scope="module")
def finished_run(demo_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("out")
    cfg = load_config(demo_dir / "config.json", out_override=out)
    manifest = run_pipeline(cfg)
    return cfg, manifest


EXPECTED_ARTIFACTS = [
    "ingest/supply.jsonl",
    "ingest/demand.jsonl",
    "ingest/seed_ids.txt",
    "delineate/supply_delineated.jsonl",
    "delineate/cluster_fractions.tsv",
    "fit/supply/vocab.tsv",
    "fit/supply/matrix.tsv",
    "fit/supply/model/phi.tsv",
    "fit/supply/model/theta.tsv",
    "fit/supply/model/meta.json",
    "fit/demand/model/phi.tsv",
    "map/supply/distances.tsv",
    "map/supply/layout.tsv",
    "map/supply/relevant_terms.tsv",
    "map/supply/map.svg",
    "map/supply/map.html",
    "map/demand/map.svg",
    "align/alignment.json",
    "align/cross_matrix.tsv",
    "analytics/supply/cooccurrence.tsv",
    "analytics/supply/specialization.json",
    "analytics/supply/characteristic_docs.tsv",
    "analytics/supply/trends.tsv",
    "analytics/supply/profiles.tsv",
    "analytics/supply/pseudo_topic_distances.tsv",
    "analytics/demand/cooccurrence.tsv",
    "report/alignment_report.html",
    "report/alignment_matrix.tsv",
    "report/alignment_map.svg",
]


class TestRunPipeline:
    def test_smoke_manifest_complete(self, finished_run):
        cfg, manifest = finished_run
        assert manifest["status"] == "ok"
        paths = {a["path"] for a in manifest["artifacts"]}
        for expected in EXPECTED_ARTIFACTS:
            assert expected in paths, f"missing artifact {expected}"

    def test_svg_and_html_wellformed(self, finished_run):
        cfg, _ = finished_run
        for svg in cfg.output_dir.rglob("*.svg"):
            ET.parse(svg)
        for html in cfg.output_dir.rglob("*.html"):
            text = html.read_text("utf-8")
            ET.fromstring(text.split("\n", 1)[1])

    def test_manifest_checksums_recorded(self, finished_run):
        cfg, manifest = finished_run
        for artifact in manifest["artifacts"]:
            assert len(artifact["sha256"]) == 64

    def test_single_stage_rerun_reproduces_bytes(self, finished_run):
        cfg, _ = finished_run
        before = {
            p.relative_to(cfg.output_dir): p.read_bytes()
            for p in (cfg.output_dir / "map").rglob("*")
            if p.is_file()
        }
        shutil.rmtree(cfg.output_dir / "map")
        run_pipeline(cfg, stage="map")
        for rel, data in before.items():
            assert (cfg.output_dir / rel).read_bytes() == data

    def test_zoom_artifacts(self, finished_run):
        cfg, _ = finished_run
        manifest = run_zoom(cfg)
        paths = {a["path"] for a in manifest["artifacts"]}
        assert "zoom/subcorpus.jsonl" in paths
        assert "zoom/model/phi.tsv" in paths
        assert "zoom/layout.tsv" in paths

    def test_failed_stage_marks_manifest(self, demo_dir, tmp_path):
        cfg = load_config(demo_dir / "config.json", out_override=tmp_path / "out")
        with pytest.raises(Exception):
            run_pipeline(cfg, stage="align")  # fit artifacts are absent
        manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
        assert manifest["status"] == "FAILED"
        assert manifest["failed_stage"] == "align"
        assert manifest["error"]


class TestConfig:
    def test_missing_corpus_path_named(self, demo_dir, tmp_path):
        raw = json.loads((demo_dir / "config.json").read_text())
        raw["paths"]["supply_corpus"] = "missing.jsonl"
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(raw))
        with pytest.raises(ConfigError, match="missing.jsonl"):
            load_config(bad)

    def test_bad_threshold_rejected(self, demo_dir, tmp_path):
        raw = json.loads((demo_dir / "config.json").read_text())
        raw["alignment"]["threshold"] = 1.4
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(raw))
        with pytest.raises(ConfigError, match="threshold"):
            load_config(bad)

    def test_missing_required_key(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"paths": {}}))
        with pytest.raises(ConfigError):
            load_config(bad)

    def test_invalid_json(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        with pytest.raises(ConfigError):
            load_config(bad)

    def test_seed_override(self, demo_dir):
        cfg = load_config(demo_dir / "config.json", seed_override=999)
        assert cfg.supply.seed == 999
        assert cfg.demand.seed == 1000


class TestCli:
    def test_demo_and_run_exit_zero(self, tmp_path):
        demo = tmp_path / "demo"
        assert main(["demo", "--out", str(demo), "--seed", "3"]) == 0
        # shrink the demo workload by regenerating it tiny
        write_demo(demo, seed=3, supply_docs=150, demand_docs=40, supply_k=4,
                   demand_k=4, iterations=60)
        assert main(["run", "--config", str(demo / "config.json")]) == 0
        assert (demo / "out" / "manifest.json").exists()

    def test_missing_config_exits_2(self, tmp_path, capsys):
        code = main(["run", "--config", str(tmp_path / "none.json")])
        assert code == 2
        assert "none.json" in capsys.readouterr().err

    def test_config_with_missing_corpus_exits_2(self, tmp_path, capsys):
        config = tmp_path / "c.json"
        config.write_text(
            json.dumps(
                {
                    "paths": {"supply_corpus": "gone.jsonl", "demand_corpus": "gone2.jsonl"},
                    "supply": {"k": 2},
                    "demand": {"k": 2},
                }
            )
        )
        assert main(["run", "--config", str(config)]) == 2
        assert "gone.jsonl" in capsys.readouterr().err

    def test_stage_with_missing_inputs_exits_3(self, demo_dir, tmp_path, capsys):
        assert (
            main(
                [
                    "align",
                    "--config",
                    str(demo_dir / "config.json"),
                    "--out",
                    str(tmp_path / "out"),
                ]
            )
            == 3
        )
