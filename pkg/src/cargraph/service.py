"""Read-only HTTP API over a graph store snapshot.

Every response is wrapped in the same envelope::

    {"payload": ..., "schema_version": "1",
     "graph_snapshot_id": "...", "timing_ms": ...}

All mutation happens through CLI ingestion; the service notices a changed
store file on the next request and swaps its snapshot atomically, so read
handlers never observe a half-written graph. The built UI, when present,
is served statically under ``/ui``.
"""

from __future__ import annotations

import threading
import time
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query, Response

from . import queries
from .queries import SpecFilter, UnknownEntity
from .schema import SCHEMA_VERSION, validate_graph
from .serialize import export_graph
from .store import GraphStore, Snapshot

DEFAULT_UI_DIR = Path(__file__).resolve().parents[2] / "frontend" / "dist"


class SnapshotContainer:
    """Holds the current snapshot; reload swaps it under a lock."""

    def __init__(self, store: GraphStore):
        self.store = store
        self._lock = threading.Lock()
        self._stamp = store.stamp()
        self._snapshot = store.load()

    @property
    def snapshot(self) -> Snapshot:
        return self._snapshot

    def refresh(self) -> Snapshot:
        stamp = self.store.stamp()
        if stamp != self._stamp:
            with self._lock:
                if stamp != self._stamp:
                    self._snapshot = self.store.load()
                    self._stamp = stamp
        return self._snapshot


def create_app(store_dir: Path, ui_dir: Path | None = None) -> FastAPI:
    app = FastAPI(title="cargraph", version="0.1.0")
    # read-only, unauthenticated API: permissive CORS lets a separately
    # hosted UI (or dev server) consume it directly
    from fastapi.middleware.cors import CORSMiddleware

    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["GET"])
    container = SnapshotContainer(GraphStore(store_dir))
    app.state.container = container

    def respond(payload, snapshot: Snapshot, started: float) -> dict:
        return {
            "payload": payload,
            "schema_version": SCHEMA_VERSION,
            "graph_snapshot_id": snapshot.snapshot_id,
            "timing_ms": (time.perf_counter() - started) * 1000.0,
        }

    def view():
        return container.refresh(), time.perf_counter()

    @app.get("/health")
    def health():
        snapshot, started = view()
        payload = {
            "status": "ok",
            "nodes": snapshot.graph.node_count,
            "edges": snapshot.graph.edge_count,
        }
        return respond(payload, snapshot, started)

    @app.get("/schema")
    def schema():
        snapshot, started = view()
        return respond(queries.schema_description(snapshot.graph), snapshot, started)

    @app.get("/validate")
    def validate():
        snapshot, started = view()
        violations = [
            {"severity": v.severity, "entity": v.entity, "rule": v.rule, "message": v.message}
            for v in validate_graph(snapshot.graph)
        ]
        return respond({"violations": violations}, snapshot, started)

    @app.get("/vehicles")
    def vehicles(
        klass: str | None = Query(default=None, alias="class"),
        subdiscipline: str | None = None,
        spec_key: str | None = None,
        spec_op: str = "eq",
        spec_value: str | None = None,
    ):
        snapshot, started = view()
        spec_filter = None
        if spec_key is not None and spec_value is not None:
            spec_filter = SpecFilter(key=spec_key, op=spec_op, value=spec_value)
        try:
            if subdiscipline is not None:
                if klass is None:
                    raise HTTPException(422, "benchmark queries need a class")
                rows = queries.benchmark_query(
                    snapshot.graph, klass, subdiscipline, spec_filter
                )
            else:
                rows = queries.list_vehicles(snapshot.graph, klass)
                if spec_filter is not None:
                    graph = snapshot.graph
                    rows = [
                        row
                        for row in rows
                        if spec_filter.matches(graph.node(str(row["id"])).props)
                    ]
        except UnknownEntity as exc:
            raise HTTPException(404, str(exc)) from None
        return respond(rows, snapshot, started)

    @app.get("/vehicles/{veh_id}/ratings")
    def vehicle_ratings(veh_id: str):
        snapshot, started = view()
        if not snapshot.graph.has_node(veh_id):
            raise HTTPException(404, f"unknown vehicle {veh_id!r}")
        return respond(queries.vehicle_row(snapshot.graph, veh_id), snapshot, started)

    @app.get("/vehicles/{veh_id}/devtree")
    def vehicle_devtree(veh_id: str):
        snapshot, started = view()
        try:
            tree = queries.dev_tree(snapshot.graph, veh_id)
        except UnknownEntity as exc:
            raise HTTPException(404, str(exc)) from None
        return respond(tree, snapshot, started)

    @app.get("/models/{model_id}")
    def model(model_id: str):
        snapshot, started = view()
        try:
            return respond(queries.model_detail(snapshot.graph, model_id), snapshot, started)
        except UnknownEntity as exc:
            raise HTTPException(404, str(exc)) from None

    @app.get("/models/{model_id}/diff/{other_id}")
    def model_diff(model_id: str, other_id: str):
        snapshot, started = view()
        try:
            payload = queries.model_diff_view(snapshot.graph, model_id, other_id)
        except UnknownEntity as exc:
            raise HTTPException(404, str(exc)) from None
        return respond(payload, snapshot, started)

    @app.get("/sims")
    def sims(
        model: str | None = None,
        barrier: str | None = None,
        protocol: str | None = None,
        page: int = 1,
        page_size: int = 100,
    ):
        snapshot, started = view()
        payload = queries.sim_overview(
            snapshot.graph, model, barrier, protocol, page, page_size
        )
        return respond(payload, snapshot, started)

    @app.get("/sims/{sim_id}")
    def sim(sim_id: str):
        snapshot, started = view()
        try:
            payload = queries.sim_detail(
                snapshot.graph, sim_id, blobs=container.store.blobs
            )
        except UnknownEntity as exc:
            raise HTTPException(404, str(exc)) from None
        return respond(payload, snapshot, started)

    @app.get("/sims/{sim_id}/similar")
    def sim_similar(sim_id: str, k: int = 10):
        snapshot, started = view()
        try:
            payload = queries.similar_sims(snapshot.graph, sim_id, k)
        except UnknownEntity as exc:
            raise HTTPException(404, str(exc)) from None
        return respond(payload, snapshot, started)

    @app.get("/changes/top")
    def changes_top(k: int = 10):
        snapshot, started = view()
        return respond(queries.top_changes(snapshot.graph, k), snapshot, started)

    @app.get("/export")
    def export(format: str = "jsonlines"):
        snapshot, _ = view()
        try:
            data = export_graph(snapshot.graph, format)
        except ValueError as exc:
            raise HTTPException(422, str(exc)) from None
        media = "application/xml" if format == "graphml" else "application/x-ndjson"
        return Response(content=data, media_type=media)

    ui = ui_dir if ui_dir is not None else DEFAULT_UI_DIR
    if ui.is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui, html=True), name="ui")

    return app


# ---------------------------------------------------------------------------
# Published response schemas (contract-tested)
# ---------------------------------------------------------------------------

_ENVELOPE = {
    "type": "object",
    "required": ["payload", "schema_version", "graph_snapshot_id", "timing_ms"],
    "properties": {
        "schema_version": {"type": "string"},
        "graph_snapshot_id": {"type": "string"},
        "timing_ms": {"type": "number"},
    },
}


def _envelope(payload_schema: dict) -> dict:
    schema = {key: value for key, value in _ENVELOPE.items()}
    schema["properties"] = dict(_ENVELOPE["properties"])  # type: ignore[arg-type]
    schema["properties"]["payload"] = payload_schema  # type: ignore[index]
    return schema


_VEHICLE_ROW = {
    "type": "object",
    "required": ["id", "name"],
    "properties": {
        "id": {"type": "string"},
        "name": {"type": ["string", "null"]},
        "ratings": {"type": "object"},
    },
}

_BENCH_ROW = {
    "type": "object",
    "required": ["id", "name", "score"],
    "properties": {"score": {"type": ["number", "null"]}, "spec": {"type": "object"}},
}

_DEVTREE_NODE = {
    "type": "object",
    "required": ["id", "sim_count", "children"],
    "properties": {
        "id": {"type": "string"},
        "sim_count": {"type": "integer"},
        "protocols": {"type": "array"},
        "status_reuse": {"type": "array"},
        "children": {"type": "array"},
    },
}

_SIM_ROW = {
    "type": "object",
    "required": ["id", "model", "total_ie"],
    "properties": {
        "id": {"type": "string"},
        "model": {"type": ["string", "null"]},
        "total_ie": {"type": "number"},
        "max_similarity": {"type": ["number", "null"]},
        "clusters": {"type": "array"},
    },
}

RESPONSE_SCHEMAS: dict[str, dict] = {
    "/health": _envelope(
        {
            "type": "object",
            "required": ["status", "nodes", "edges"],
            "properties": {
                "status": {"const": "ok"},
                "nodes": {"type": "integer"},
                "edges": {"type": "integer"},
            },
        }
    ),
    "/schema": _envelope(
        {
            "type": "object",
            "required": ["name", "node_labels", "edge_labels"],
        }
    ),
    "/vehicles": _envelope({"type": "array", "items": _VEHICLE_ROW}),
    "/vehicles:benchmark": _envelope({"type": "array", "items": _BENCH_ROW}),
    "/vehicles/{id}/ratings": _envelope(_VEHICLE_ROW),
    "/vehicles/{id}/devtree": _envelope({"type": "array", "items": _DEVTREE_NODE}),
    "/models/{id}": _envelope(
        {
            "type": "object",
            "required": ["id", "parts", "sim_count"],
            "properties": {"parts": {"type": "array"}},
        }
    ),
    "/models/{id}/diff/{other}": _envelope(
        {
            "type": "object",
            "required": ["model_a", "model_b", "same", "changed", "changes"],
        }
    ),
    "/sims": _envelope(
        {
            "type": "object",
            "required": ["rows", "page", "page_size", "total"],
            "properties": {"rows": {"type": "array", "items": _SIM_ROW}},
        }
    ),
    "/sims/{id}": _envelope(
        {
            "type": "object",
            "required": ["id", "parts", "series", "similar"],
            "properties": {"parts": {"type": "array"}, "similar": {"type": "array"}},
        }
    ),
    "/sims/{id}/similar": _envelope({"type": "array"}),
    "/changes/top": _envelope(
        {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "key", "degree"],
                "properties": {"degree": {"type": "integer"}},
            },
        }
    ),
    "/validate": _envelope(
        {"type": "object", "required": ["violations"]}
    ),
}
