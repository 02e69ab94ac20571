"""Command line interface; ingestion writes the store, queries read it."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import analytics, demo, queries
from .diff import diff_models, load_diff
from .keyword import load_model, parse_model
from .ncap import ingest_ncap_dir
from .schema import NL, validate_graph
from .serialize import export_graph
from .simresult import load_sim, parse_sim_result
from .store import GraphStore


def _echo_json(payload) -> None:
    click.echo(json.dumps(payload, indent=2, sort_keys=True, default=str))


@click.group()
@click.option(
    "--store",
    "store_dir",
    type=click.Path(path_type=Path),
    default=Path("cargraph-store"),
    show_default=True,
    help="Store directory (graph.jsonl + blobs/).",
)
@click.pass_context
def main(ctx: click.Context, store_dir: Path) -> None:
    ctx.obj = GraphStore(store_dir)


@main.command("ingest-ncap")
@click.argument("directory", type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.pass_obj
def ingest_ncap(store: GraphStore, directory: Path) -> None:
    """Ingest a directory of .html result pages plus protocol_urls.txt."""
    snapshot = store.load()
    summary = ingest_ncap_dir(snapshot.graph, directory)
    store.save(snapshot.graph)
    _echo_json(summary)


@main.command("ingest-model")
@click.argument("keyword_file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.pass_obj
def ingest_model(store: GraphStore, keyword_file: Path) -> None:
    """Parse KEYWORD_FILE (+ .meta.json sidecar) and load it."""
    snapshot = store.load()
    fem = parse_model(keyword_file)
    model = load_model(snapshot.graph, fem)
    store.save(snapshot.graph)
    _echo_json({"model": model.id, "parts": len(fem.parts), "elements": len(fem.elements)})


@main.command("ingest-sim")
@click.argument("simres_file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option(
    "--keyword-file",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    default=None,
    help="Model keyword file, needed when the result has node/element channels.",
)
@click.pass_obj
def ingest_sim(store: GraphStore, simres_file: Path, keyword_file: Path | None) -> None:
    """Ingest a .simres simulation result."""
    snapshot = store.load()
    result = parse_sim_result(simres_file.read_bytes())
    fem = parse_model(keyword_file) if keyword_file else None
    sim = load_sim(snapshot.graph, result, fem=fem, blobs=store.blobs)
    store.save(snapshot.graph)
    _echo_json({"sim": sim.id, "energy_parts": snapshot.graph.degree(sim.id, "NRG_PART", "out")})


@main.command("diff")
@click.argument("file_a", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.argument("file_b", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--load", "do_load", is_flag=True, help="Also load the diff into the store.")
@click.option("--geom-tol", type=float, default=0.5, show_default=True)
@click.pass_obj
def diff_cmd(store: GraphStore, file_a: Path, file_b: Path, do_load: bool, geom_tol: float) -> None:
    """Compare two keyword models part by part."""
    from .diff import Tolerances

    fem_a = parse_model(file_a)
    fem_b = parse_model(file_b)
    report = diff_models(fem_a, fem_b, Tolerances(geom=geom_tol))
    click.echo(report.to_text(), nl=False)
    if do_load:
        snapshot = store.load()
        changes = load_diff(snapshot.graph, report)
        store.save(snapshot.graph)
        click.echo(f"# loaded: {len(changes)} change nodes", err=True)


@main.command()
@click.pass_obj
def validate(store: GraphStore) -> None:
    """Validate the stored graph against the schema; exit 1 on errors."""
    snapshot = store.load()
    violations = validate_graph(snapshot.graph)
    for violation in violations:
        click.echo(str(violation))
    click.echo(f"{len(violations)} violations")
    if any(v.severity == "error" for v in violations):
        sys.exit(1)


@main.group()
def analyze() -> None:
    """Graph analytics over the stored graph."""


@analyze.command()
@click.option("--decay", "-C", type=float, default=0.8, show_default=True)
@click.option("--eps", type=float, default=1e-6, show_default=True)
@click.option("--max-iter", type=int, default=100, show_default=True)
@click.option("--top-k", type=int, default=5, show_default=True)
@click.option("--no-spread", is_flag=True, help="Disable the weight-spread factor.")
@click.pass_obj
def simrank(store: GraphStore, decay: float, eps: float, max_iter: int, top_k: int, no_spread: bool) -> None:
    """Similarity scores over simulations; writes SIM_SIM edges."""
    snapshot = store.load()
    projection = analytics.build_bipartite(snapshot.graph)
    result = analytics.simrank_pp(
        projection, decay=decay, max_iter=max_iter, eps=eps, spread=not no_spread
    )
    count = analytics.load_similarity(snapshot.graph, result, top_k)
    store.save(snapshot.graph)
    _echo_json(
        {
            "sims": len(result.sims),
            "iterations": result.iterations,
            "converged": result.converged,
            "edges": count,
            "pairs": [[a, b, round(s, 6)] for a, b, s in result.pairs if s > 0],
        }
    )


@analyze.command()
@click.option("--label", default=NL.CHANGE, show_default=True)
@click.option("--edge-label", default=None)
@click.option("-k", type=int, default=10, show_default=True)
@click.pass_obj
def degrees(store: GraphStore, label: str, edge_label: str | None, k: int) -> None:
    """Top-k nodes of a label by degree."""
    snapshot = store.load()
    _echo_json(analytics.rank_by_degree(snapshot.graph, label, edge_label, k))


@analyze.command()
@click.option("--target", type=click.Choice(["des", "behav"]), required=True)
@click.option("--tau", type=float, default=1.0, show_default=True)
@click.pass_obj
def cluster(store: GraphStore, target: str, tau: float) -> None:
    """Leader clustering into Des / Behav nodes."""
    snapshot = store.load()
    nodes = analytics.cluster_entities(snapshot.graph, target, tau)
    store.save(snapshot.graph)
    _echo_json([{"id": n.id, "size": n.props.get("size")} for n in nodes])


@main.command()
@click.option("--format", "fmt", type=click.Choice(["graphml", "jsonlines"]), default="jsonlines")
@click.option("--output", "-o", type=click.Path(path_type=Path), default=None)
@click.pass_obj
def export(store: GraphStore, fmt: str, output: Path | None) -> None:
    """Export the stored graph."""
    snapshot = store.load()
    data = export_graph(snapshot.graph, fmt)
    if output is None:
        sys.stdout.buffer.write(data)
    else:
        output.write_bytes(data)
        click.echo(f"wrote {output} ({len(data)} bytes)", err=True)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8723, show_default=True)
@click.pass_obj
def serve(store: GraphStore, host: str, port: int) -> None:
    """Run the read-only HTTP API (and /ui when the frontend is built)."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(store.root), host=host, port=port)


@main.command("demo")
@click.argument("workdir", type=click.Path(path_type=Path))
def demo_cmd(workdir: Path) -> None:
    """Generate the fixture corpus under WORKDIR and ingest everything."""
    store = demo.build_demo_store(workdir)
    snapshot = store.load()
    _echo_json(
        {
            "store": str(store.root),
            "nodes": snapshot.graph.node_count,
            "edges": snapshot.graph.edge_count,
            "serve": f"cargraph --store {store.root} serve",
        }
    )


# ---------------------------------------------------------------------------
# Query commands mirroring the HTTP endpoints
# ---------------------------------------------------------------------------

@main.group()
def query() -> None:
    """Read queries against the stored graph (mirrors the HTTP API)."""


@query.command()
@click.pass_obj
def health(store: GraphStore) -> None:
    snapshot = store.load()
    _echo_json(
        {
            "status": "ok",
            "snapshot": snapshot.snapshot_id,
            "nodes": snapshot.graph.node_count,
            "edges": snapshot.graph.edge_count,
        }
    )


@query.command()
@click.option("--class", "klass", default=None)
@click.option("--subdiscipline", default=None)
@click.option("--spec-key", default=None)
@click.option("--spec-op", default="eq")
@click.option("--spec-value", default=None)
@click.pass_obj
def vehicles(store, klass, subdiscipline, spec_key, spec_op, spec_value) -> None:
    snapshot = store.load()
    spec_filter = (
        queries.SpecFilter(spec_key, spec_op, spec_value)
        if spec_key is not None and spec_value is not None
        else None
    )
    if subdiscipline is not None:
        _echo_json(queries.benchmark_query(snapshot.graph, klass, subdiscipline, spec_filter))
    else:
        _echo_json(queries.list_vehicles(snapshot.graph, klass))


@query.command()
@click.argument("veh_id")
@click.pass_obj
def devtree(store: GraphStore, veh_id: str) -> None:
    snapshot = store.load()
    _echo_json(queries.dev_tree(snapshot.graph, veh_id))


@query.command()
@click.argument("model_id")
@click.pass_obj
def model(store: GraphStore, model_id: str) -> None:
    snapshot = store.load()
    _echo_json(queries.model_detail(snapshot.graph, model_id))


@query.command("model-diff")
@click.argument("model_a")
@click.argument("model_b")
@click.pass_obj
def model_diff(store: GraphStore, model_a: str, model_b: str) -> None:
    snapshot = store.load()
    _echo_json(queries.model_diff_view(snapshot.graph, model_a, model_b))


@query.command()
@click.option("--model", default=None)
@click.option("--barrier", default=None)
@click.option("--page", type=int, default=1)
@click.option("--page-size", type=int, default=100)
@click.pass_obj
def sims(store, model, barrier, page, page_size) -> None:
    snapshot = store.load()
    _echo_json(queries.sim_overview(snapshot.graph, model, barrier, None, page, page_size))


@query.command()
@click.argument("sim_id")
@click.pass_obj
def sim(store: GraphStore, sim_id: str) -> None:
    snapshot = store.load()
    _echo_json(queries.sim_detail(snapshot.graph, sim_id, blobs=store.blobs))


@query.command()
@click.argument("sim_id")
@click.option("-k", type=int, default=10)
@click.pass_obj
def similar(store: GraphStore, sim_id: str, k: int) -> None:
    snapshot = store.load()
    _echo_json(queries.similar_sims(snapshot.graph, sim_id, k))


@query.command("changes-top")
@click.option("-k", type=int, default=10)
@click.pass_obj
def changes_top(store: GraphStore, k: int) -> None:
    snapshot = store.load()
    _echo_json(queries.top_changes(snapshot.graph, k))


if __name__ == "__main__":
    main()
