"""Read-only views over a graph snapshot.

Everything here is a pure function of (graph, blob store); the HTTP
service and the CLI both call into these, so a payload can always be
reproduced from the snapshot alone.
"""

from __future__ import annotations

import json
import operator
from dataclasses import dataclass
from typing import Callable

from .blobstore import BlobStore
from .graph import PropertyGraph
from .schema import EL, NL, SUBDISCIPLINES

_OPS: dict[str, Callable[[object, object], bool]] = {
    "eq": operator.eq,
    "ne": operator.ne,
    "lt": operator.lt,
    "le": operator.le,
    "gt": operator.gt,
    "ge": operator.ge,
    "contains": lambda a, b: str(b).lower() in str(a).lower(),
}


class UnknownEntity(KeyError):
    pass


@dataclass(frozen=True)
class SpecFilter:
    key: str
    op: str
    value: str

    def matches(self, veh_props: dict[str, object]) -> bool:
        if self.op not in _OPS:
            raise ValueError(f"unknown spec filter op {self.op!r}")
        candidates: dict[str, object] = dict(
            json.loads(str(veh_props.get("spec", "{}")))
        )
        candidates.update(
            {k: v for k, v in veh_props.items() if k not in ("spec", "media")}
        )
        if self.key not in candidates:
            return False
        actual = candidates[self.key]
        expected: object = self.value
        if isinstance(actual, (int, float)) and not isinstance(actual, bool):
            try:
                expected = float(self.value)
            except ValueError:
                return False
        return _OPS[self.op](actual, expected)


def vehicle_row(g: PropertyGraph, veh_id: str) -> dict[str, object]:
    veh = g.node(veh_id)
    classes = [g.node(e.dst).props.get("name") for e in g.incident_edges(veh_id, EL.IN_CLASS, "out")]
    ratings = {
        g.node(e.dst).label: e.weight for e in g.incident_edges(veh_id, EL.RATING, "out")
    }
    return {
        "id": veh.id,
        "name": veh.props.get("name"),
        "on_market": veh.props.get("on_market"),
        "class": classes[0] if classes else None,
        "test_year": veh.props.get("test_year"),
        "stars": veh.props.get("stars"),
        "ratings": ratings,
    }


def list_vehicles(g: PropertyGraph, class_name: str | None = None) -> list[dict[str, object]]:
    rows = []
    for veh in g.nodes(NL.VEH):
        row = vehicle_row(g, veh.id)
        if class_name is not None and row["class"] != class_name:
            continue
        rows.append(row)
    return rows


def benchmark_query(
    g: PropertyGraph,
    class_name: str,
    subdiscipline: str,
    spec_filter: SpecFilter | None = None,
) -> list[dict[str, object]]:
    """Vehicles of a class ranked by one subdiscipline score, spec-filtered."""
    if subdiscipline not in SUBDISCIPLINES:
        raise UnknownEntity(f"unknown subdiscipline {subdiscipline!r}")
    class_nodes = [
        n for n in g.nodes(NL.CLASS) if n.props.get("name") == class_name
    ]
    if not class_nodes:
        raise UnknownEntity(f"unknown vehicle class {class_name!r}")
    class_id = class_nodes[0].id

    rows: list[dict[str, object]] = []
    for edge in g.edges(EL.IN_CLASS):
        if edge.dst != class_id:
            continue
        veh = g.node(edge.src)
        if spec_filter is not None and not spec_filter.matches(veh.props):
            continue
        rating = g.find_edge(EL.RATING, veh.id, subdiscipline.lower())
        if rating is None:
            continue
        spec_values = json.loads(str(veh.props.get("spec", "{}")))
        rows.append(
            {
                "id": veh.id,
                "name": veh.props.get("name"),
                "score": rating.weight,
                "stars": veh.props.get("stars"),
                "test_year": veh.props.get("test_year"),
                "spec": spec_values,
            }
        )
    rows.sort(key=lambda r: (-float(r["score"] or 0.0), str(r["id"])))
    return rows


# ---------------------------------------------------------------------------
# Development tree
# ---------------------------------------------------------------------------

def _model_summary(g: PropertyGraph, model_id: str) -> dict[str, object]:
    sims = [e.src for e in g.incident_edges(model_id, EL.SIM_MODEL, "in")]
    protocols = sorted(
        {
            g.node(p.dst).props.get("name")
            for sim in sims
            for p in g.incident_edges(sim, EL.SIM_PRTCL, "out")
        }
    )
    reused = [e.dst for e in g.incident_edges(model_id, EL.MODEL_STATUS, "out")]
    model = g.node(model_id)
    return {
        "id": model_id,
        "model_id": model.props.get("model_id"),
        "discipline": model.props.get("discipline"),
        "n_parts": model.props.get("n_parts"),
        "sim_count": len(sims),
        "sims": sorted(sims),
        "protocols": [p for p in protocols if p],
        "status_reuse": sorted(reused),
    }


def dev_tree(g: PropertyGraph, veh_id: str) -> list[dict[str, object]]:
    """MODEL_REF forest for one vehicle, roots first, children nested."""
    if not g.has_node(veh_id):
        raise UnknownEntity(f"unknown vehicle {veh_id!r}")
    models = sorted(e.src for e in g.incident_edges(veh_id, EL.MODEL_OF, "in"))
    model_set = set(models)
    children: dict[str, list[str]] = {m: [] for m in models}
    roots: list[str] = []
    for model in models:
        parents = [
            e.dst for e in g.incident_edges(model, EL.MODEL_REF, "out") if e.dst in model_set
        ]
        if parents:
            children[parents[0]].append(model)
        else:
            roots.append(model)

    def build(model_id: str) -> dict[str, object]:
        node = _model_summary(g, model_id)
        node["children"] = [build(child) for child in sorted(children[model_id])]
        return node

    return [build(root) for root in roots]


# ---------------------------------------------------------------------------
# Simulation views
# ---------------------------------------------------------------------------

def _sim_links(g: PropertyGraph, sim_id: str) -> dict[str, object]:
    def first(label: str) -> str | None:
        edges = g.incident_edges(sim_id, label, "out")
        return edges[0].dst if edges else None

    return {
        "model": first(EL.SIM_MODEL),
        "barrier": first(EL.SIM_BARR),
        "impactor": first(EL.SIM_IMP),
        "protocol": first(EL.SIM_PRTCL),
    }


def sim_overview(
    g: PropertyGraph,
    model: str | None = None,
    barrier: str | None = None,
    protocol: str | None = None,
    page: int = 1,
    page_size: int = 100,
) -> dict[str, object]:
    """Zoom-out: one row per simulation with aggregate features."""
    rows: list[dict[str, object]] = []
    for sim in g.nodes(NL.SIM):
        links = _sim_links(g, sim.id)
        if model is not None and links["model"] != model:
            continue
        if barrier is not None and links["barrier"] != barrier:
            continue
        if protocol is not None and links["protocol"] != protocol:
            continue
        energy_edges = g.incident_edges(sim.id, EL.NRG_PART, "out")
        sim_sim = g.incident_edges(sim.id, EL.SIM_SIM, "both")
        clusters = sorted(e.src for e in g.incident_edges(sim.id, EL.BEHAV_OF, "in"))
        rows.append(
            {
                "id": sim.id,
                "run_id": sim.props.get("run_id"),
                **links,
                "total_ie": sum(e.weight or 0.0 for e in energy_edges),
                "max_similarity": max((e.weight or 0.0 for e in sim_sim), default=None),
                "clusters": clusters,
            }
        )
    rows.sort(key=lambda r: str(r["id"]))
    total = len(rows)
    page = max(page, 1)
    page_size = max(page_size, 1)
    start = (page - 1) * page_size
    return {
        "rows": rows[start : start + page_size],
        "page": page,
        "page_size": page_size,
        "total": total,
    }


def sim_detail(
    g: PropertyGraph, sim_id: str, blobs: BlobStore | None = None, top_n: int = 10
) -> dict[str, object]:
    """Zoom-in: globals, top absorbing parts, raw channels, similar sims."""
    if not g.has_node(sim_id):
        raise UnknownEntity(f"unknown simulation {sim_id!r}")
    sim = g.node(sim_id)
    if sim.label != NL.SIM:
        raise UnknownEntity(f"{sim_id!r} is not a simulation")

    parts = []
    for edge in g.incident_edges(sim_id, EL.NRG_PART, "out"):
        part = g.node(edge.dst)
        parts.append(
            {
                "part": edge.dst,
                "name": part.props.get("name"),
                "ie_max": edge.weight,
                "t_start": edge.props.get("t_start"),
                "t_end": edge.props.get("t_end"),
                "rate": edge.props.get("rate"),
            }
        )
    parts.sort(key=lambda r: (-float(r["ie_max"] or 0.0), str(r["part"])))

    neighbors = []
    for edge in g.incident_edges(sim_id, EL.SIM_SIM, "both"):
        other = edge.dst if edge.src == sim_id else edge.src
        neighbors.append({"sim": other, "score": edge.weight})
    neighbors.sort(key=lambda r: (-float(r["score"] or 0.0), str(r["sim"])))

    series = {}
    run_id = str(sim.props.get("run_id", ""))
    if blobs is not None and run_id:
        for entity, channel in blobs.channels(run_id):
            t, v = blobs.get_series(run_id, entity, channel)
            series[f"{entity}/{channel}"] = {"t": t, "v": v}

    return {
        "id": sim_id,
        "run_id": sim.props.get("run_id"),
        "total_mass": sim.props.get("total_mass"),
        "impact_energy": sim.props.get("impact_energy"),
        "termination_time": sim.props.get("termination_time"),
        **_sim_links(g, sim_id),
        "parts": parts[: max(top_n, 0)],
        "series": series,
        "similar": neighbors,
    }


def similar_sims(g: PropertyGraph, sim_id: str, k: int = 10) -> list[dict[str, object]]:
    detail = sim_detail(g, sim_id, blobs=None, top_n=0)
    return list(detail["similar"])[: max(k, 0)]  # type: ignore[index]


def model_detail(g: PropertyGraph, model_id: str) -> dict[str, object]:
    if not g.has_node(model_id) or g.node(model_id).label != NL.MODEL:
        raise UnknownEntity(f"unknown model {model_id!r}")
    summary = _model_summary(g, model_id)
    parts = []
    for edge in g.incident_edges(model_id, EL.HAS_PART, "out"):
        part = g.node(edge.dst)
        parts.append({"id": part.id, **part.props})
    parts.sort(key=lambda p: int(p.get("pid", 0)))  # type: ignore[arg-type]
    summary["parts"] = parts
    parent = [e.dst for e in g.incident_edges(model_id, EL.MODEL_REF, "out")]
    summary["parent"] = parent[0] if parent else None
    return summary


def model_diff_view(g: PropertyGraph, model_a: str, model_b: str) -> dict[str, object]:
    """The stored comparison between two loaded models, read from the graph."""
    for model in (model_a, model_b):
        if not g.has_node(model) or g.node(model).label != NL.MODEL:
            raise UnknownEntity(f"unknown model {model!r}")

    parts_a = {e.dst for e in g.incident_edges(model_a, EL.HAS_PART, "out")}
    parts_b = {e.dst for e in g.incident_edges(model_b, EL.HAS_PART, "out")}

    same_pairs = sorted(
        (e.src, e.dst)
        for e in g.edges(EL.SAME_AS)
        if (e.src in parts_a and e.dst in parts_b) or (e.src in parts_b and e.dst in parts_a)
    )
    changed_pairs = sorted(
        (e.src, e.dst)
        for e in g.edges(EL.CHANGED_TO)
        if e.src in parts_a and e.dst in parts_b
    )

    changes = []
    for change in g.nodes(NL.CHANGE):
        models = {e.dst for e in g.incident_edges(change.id, EL.CHG_MODELS, "out")}
        if model_a in models and model_b in models:
            targets = sorted(e.dst for e in g.incident_edges(change.id, EL.CHG, "out"))
            changes.append(
                {
                    "id": change.id,
                    "key": change.props.get("key"),
                    "kind": change.props.get("kind"),
                    "deltas": json.loads(str(change.props.get("deltas", "{}"))),
                    "targets": targets,
                }
            )
    changes.sort(key=lambda c: str(c["id"]))
    return {
        "model_a": model_a,
        "model_b": model_b,
        "same": [list(p) for p in same_pairs],
        "changed": [list(p) for p in changed_pairs],
        "changes": changes,
    }


def top_changes(g: PropertyGraph, k: int = 10) -> list[dict[str, object]]:
    from .analytics import rank_by_degree

    ranked = rank_by_degree(g, NL.CHANGE, None, k)
    out = []
    for node_id, degree in ranked:
        node = g.node(node_id)
        out.append(
            {
                "id": node_id,
                "key": node.props.get("key"),
                "kind": node.props.get("kind"),
                "degree": degree,
            }
        )
    return out


def schema_description(g: PropertyGraph) -> dict[str, object]:
    schema = g.schema
    return {
        "name": schema.name,
        "node_labels": [
            {
                "label": spec.label,
                "properties": [
                    {"name": p.name, "kind": p.kind, "required": p.required}
                    for p in spec.properties
                ],
            }
            for spec in schema.node_labels
        ],
        "edge_labels": [
            {
                "label": spec.label,
                "endpoints": [list(pair) for pair in spec.endpoints],
                "weighted": spec.weighted,
                "weight_range": list(spec.weight_range) if spec.weight_range else None,
            }
            for spec in schema.edge_labels
        ],
    }
