"""CLI: ingestion writes the store, queries mirror the HTTP endpoints."""

from __future__ import annotations

import json

import pytest
from click.testing import CliRunner

from cargraph.cli import main
from cargraph.demo import write_model_fixtures, write_ncap_fixtures, write_sim_fixtures, write_twobox
from cargraph.store import GraphStore


@pytest.fixture()
def runner():
    return CliRunner()


def invoke(runner, store, *args):
    result = runner.invoke(main, ["--store", str(store), *args], catch_exceptions=False)
    assert result.exit_code == 0, result.output
    return result


def test_ingest_pipeline(tmp_path, runner):
    store = tmp_path / "store"
    ncap_dir = tmp_path / "ncap"
    model_dir = tmp_path / "models"
    sim_dir = tmp_path / "sims"
    write_ncap_fixtures(ncap_dir)
    write_model_fixtures(model_dir)
    write_sim_fixtures(sim_dir)

    out = invoke(runner, store, "ingest-ncap", str(ncap_dir))
    assert json.loads(out.output) == {"protocols": 4, "vehicles": 3}

    for model_id in ("m1", "m2", "m3", "m4"):
        invoke(runner, store, "ingest-model", str(model_dir / f"{model_id}.k"))

    invoke(
        runner, store, "ingest-sim", str(sim_dir / "front_v1.simres"),
        "--keyword-file", str(model_dir / "m1.k"),
    )
    invoke(runner, store, "ingest-sim", str(sim_dir / "front_v2.simres"))

    invoke(runner, store, "diff", str(model_dir / "m1.k"), str(model_dir / "m2.k"), "--load")

    out = invoke(runner, store, "analyze", "simrank", "--top-k", "1")
    summary = json.loads(out.output)
    assert summary["sims"] == 2 and summary["converged"]

    out = invoke(runner, store, "analyze", "degrees", "--label", "Change", "-k", "3")
    ranked = json.loads(out.output)
    assert ranked and ranked[0][0].startswith("change:thk:b-pillar")

    out = invoke(runner, store, "validate")
    assert out.output.strip().endswith("0 violations")

    out = invoke(runner, store, "query", "health")
    assert json.loads(out.output)["status"] == "ok"

    out = invoke(
        runner, store, "query", "vehicles",
        "--class", "Large Family Car", "--subdiscipline", "VRU",
    )
    rows = json.loads(out.output)
    assert [r["id"] for r in rows] == [
        "veh:brennix-liftback-2021",
        "veh:aldora-estate-2022",
    ]


def test_diff_without_load_prints_report(tmp_path, runner):
    model_dir = tmp_path / "models"
    write_model_fixtures(model_dir)
    store = tmp_path / "store"
    out = invoke(runner, store, "diff", str(model_dir / "m1.k"), str(model_dir / "m3.k"))
    assert "# diff m1 -> m3" in out.output
    assert "property_change" in out.output
    assert "geometry_change" in out.output
    # pure report: nothing was written
    assert not (store / "graph.jsonl").exists()


def test_export_formats(tmp_path, runner):
    store = tmp_path / "store"
    model_dir = tmp_path / "models"
    write_twobox(model_dir)
    invoke(runner, store, "ingest-model", str(model_dir / "twobox.k"))
    out_file = tmp_path / "graph.graphml"
    invoke(runner, store, "export", "--format", "graphml", "-o", str(out_file))
    assert out_file.read_bytes().startswith(b"<?xml")


def test_demo_command(tmp_path, runner):
    out = invoke(runner, tmp_path / "unused", "demo", str(tmp_path / "work"))
    summary = json.loads(out.output)
    store = GraphStore(tmp_path / "work" / "store")
    snapshot = store.load()
    assert snapshot.graph.node_count == summary["nodes"]
    assert snapshot.graph.edge_count > 0


def test_query_sim_and_cluster(tmp_path, runner):
    invoke(runner, tmp_path / "unused", "demo", str(tmp_path / "work"))
    store = tmp_path / "work" / "store"
    out = invoke(runner, store, "query", "sim", "sim:front_v1")
    payload = json.loads(out.output)
    assert len(payload["parts"]) == 5
    out = invoke(runner, store, "analyze", "cluster", "--target", "des", "--tau", "1.0")
    clusters = json.loads(out.output)
    assert clusters and all("id" in c for c in clusters)
