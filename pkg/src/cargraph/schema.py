"""The car-graph schema: every node label, edge label, and endpoint rule.

One shared Veh label joins the market half (published assessment ratings,
``on_market=true``) and the development half (CAE models and simulations,
``on_market=false``), which is what makes cross-half benchmarking queries
possible. A human-readable rendering of the same tables lives in
docs/schema.md.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .graph import (
    EdgeLabelSpec,
    NodeLabelSpec,
    PropertyGraph,
    PropertySpec,
    SchemaDef,
    check_property_value,
)

SCHEMA_NAME = "car-graph"
SCHEMA_VERSION = "1"


class NL:
    """Node label names."""

    VEH = "Veh"
    CLASS = "Class"
    YEAR = "Year"
    VRU = "VRU"
    AOP = "AOP"
    COP = "COP"
    SA = "SA"
    PAGE = "Page"
    PRTCL = "Prtcl"
    UBDY = "Ubdy"
    PLTF = "Pltf"
    ATTR = "Attr"
    MODEL = "Model"
    SIM = "Sim"
    BARR = "Barr"
    IMP = "Imp"
    PART = "Part"
    NODE = "Node"
    ELMNT = "Elmnt"
    CHANGE = "Change"
    SEMANTIC = "Semantic"
    DES = "Des"
    BEHAV = "Behav"
    GRP = "Grp"


class EL:
    """Edge label names."""

    RATING = "RATING"
    LINKED_TO = "LINKED_TO"
    DEFINED_AS = "DEFINED_AS"
    TESTED_YEAR = "TESTED_YEAR"
    IN_CLASS = "IN_CLASS"
    ON_PAGE = "ON_PAGE"
    HAS_UBDY = "HAS_UBDY"
    HAS_PLTF = "HAS_PLTF"
    HAS_ATTR = "HAS_ATTR"
    MODEL_OF = "MODEL_OF"
    SIM_MODEL = "SIM_MODEL"
    SIM_BARR = "SIM_BARR"
    SIM_IMP = "SIM_IMP"
    SIM_PRTCL = "SIM_PRTCL"
    MODEL_REF = "MODEL_REF"
    MODEL_STATUS = "MODEL_STATUS"
    HAS_PART = "HAS_PART"
    PART_ROLE = "PART_ROLE"
    CON = "CON"
    OUT_NODE = "OUT_NODE"
    OUT_ELMNT = "OUT_ELMNT"
    PART_NODE = "PART_NODE"
    PART_ELMNT = "PART_ELMNT"
    SAME_AS = "SAME_AS"
    CHANGED_TO = "CHANGED_TO"
    CHG = "CHG"
    CHG_MODELS = "CHG_MODELS"
    SEM_PART = "SEM_PART"
    NRG_PART = "NRG_PART"
    GRP_FTS = "GRP_FTS"
    DES_OF = "DES_OF"
    BEHAV_OF = "BEHAV_OF"
    GRP_MEM = "GRP_MEM"
    SIM_SIM = "SIM_SIM"
    CAUSED_TO = "CAUSED_TO"


SUBDISCIPLINES = (NL.VRU, NL.AOP, NL.COP, NL.SA)

#: Spec-table keys that get a typed numeric property next to the verbatim map.
SPEC_ALIASES: dict[str, str] = {
    "Kerb weight": "kerb_weight_kg",
    "Ride height": "ride_height_mm",
    "Length": "length_mm",
    "Width": "width_mm",
}


def _p(name: str, kind: str, required: bool = False) -> PropertySpec:
    return PropertySpec(name=name, kind=kind, required=required)


def car_schema() -> SchemaDef:
    """Build the car-graph SchemaDef; repeated calls return equal definitions."""
    node_labels = (
        NodeLabelSpec(
            NL.VEH,
            (
                _p("name", "text", required=True),
                _p("on_market", "boolean", required=True),
                _p("stars", "integer"),
                _p("test_year", "integer"),
                _p("spec", "text"),
                _p("media", "text-list"),
                _p("source_url", "text"),
                _p("kerb_weight_kg", "real"),
                _p("ride_height_mm", "real"),
                _p("length_mm", "real"),
                _p("width_mm", "real"),
            ),
        ),
        NodeLabelSpec(NL.CLASS, (_p("name", "text", required=True),)),
        NodeLabelSpec(NL.YEAR, (_p("year", "integer", required=True),)),
        NodeLabelSpec(NL.VRU, (_p("name", "text"),)),
        NodeLabelSpec(NL.AOP, (_p("name", "text"),)),
        NodeLabelSpec(NL.COP, (_p("name", "text"),)),
        NodeLabelSpec(NL.SA, (_p("name", "text"),)),
        NodeLabelSpec(NL.PAGE, (_p("url", "text", required=True),)),
        NodeLabelSpec(
            NL.PRTCL,
            (
                _p("name", "text", required=True),
                _p("year", "integer"),
                _p("subdiscipline", "text"),
                _p("url", "text"),
            ),
        ),
        NodeLabelSpec(NL.UBDY, (_p("veh_id", "text"),)),
        NodeLabelSpec(NL.PLTF, (_p("veh_id", "text"),)),
        NodeLabelSpec(NL.ATTR, (_p("name", "text", required=True),)),
        NodeLabelSpec(
            NL.MODEL,
            (
                _p("model_id", "text", required=True),
                _p("discipline", "text"),
                _p("timestamp", "text"),
                _p("n_parts", "integer"),
                _p("n_elements", "integer"),
                _p("n_mesh_nodes", "integer"),
            ),
        ),
        NodeLabelSpec(
            NL.SIM,
            (
                _p("run_id", "text", required=True),
                _p("total_mass", "real"),
                _p("impact_energy", "real"),
                _p("termination_time", "real"),
            ),
        ),
        NodeLabelSpec(NL.BARR, (_p("name", "text", required=True),)),
        NodeLabelSpec(NL.IMP, (_p("name", "text", required=True),)),
        NodeLabelSpec(
            NL.PART,
            (
                _p("pid", "integer", required=True),
                _p("name", "text"),
                _p("thickness", "real"),
                _p("material_id", "integer"),
                _p("n_elements", "integer"),
                _p("centroid", "real-list"),
                _p("bbox", "real-list"),
            ),
        ),
        NodeLabelSpec(NL.NODE, (_p("nid", "integer", required=True),)),
        NodeLabelSpec(NL.ELMNT, (_p("eid", "integer", required=True),)),
        NodeLabelSpec(
            NL.CHANGE,
            (
                _p("key", "text", required=True),
                _p("kind", "text"),
                _p("deltas", "text"),
            ),
        ),
        NodeLabelSpec(NL.SEMANTIC, (_p("kind", "text"),)),
        NodeLabelSpec(NL.DES, (_p("size", "integer"), _p("leader", "real-list"))),
        NodeLabelSpec(NL.BEHAV, (_p("size", "integer"), _p("leader", "real-list"))),
        NodeLabelSpec(NL.GRP, (_p("name", "text"),)),
    )

    def edge(
        label: str,
        endpoints: tuple[tuple[str, str], ...],
        weighted: bool = False,
        weight_range: tuple[float | None, float | None] | None = None,
        properties: tuple[PropertySpec, ...] = (),
    ) -> EdgeLabelSpec:
        return EdgeLabelSpec(label, endpoints, weighted, weight_range, properties)

    rating_targets = tuple((NL.VEH, s) for s in SUBDISCIPLINES)
    defined_targets = ((NL.PRTCL, NL.YEAR),) + tuple((NL.PRTCL, s) for s in SUBDISCIPLINES)

    edge_labels = (
        edge(EL.RATING, rating_targets, weighted=True, weight_range=(0.0, 100.0)),
        edge(EL.LINKED_TO, ((NL.PAGE, NL.PAGE),)),
        edge(EL.DEFINED_AS, defined_targets),
        edge(EL.TESTED_YEAR, ((NL.VEH, NL.YEAR),)),
        edge(EL.IN_CLASS, ((NL.VEH, NL.CLASS),)),
        edge(EL.ON_PAGE, ((NL.VEH, NL.PAGE),)),
        edge(EL.HAS_UBDY, ((NL.VEH, NL.UBDY),)),
        edge(EL.HAS_PLTF, ((NL.VEH, NL.PLTF),)),
        edge(EL.HAS_ATTR, ((NL.VEH, NL.ATTR),)),
        edge(EL.MODEL_OF, ((NL.MODEL, NL.VEH),)),
        edge(EL.SIM_MODEL, ((NL.SIM, NL.MODEL),)),
        edge(EL.SIM_BARR, ((NL.SIM, NL.BARR),)),
        edge(EL.SIM_IMP, ((NL.SIM, NL.IMP),)),
        edge(EL.SIM_PRTCL, ((NL.SIM, NL.PRTCL),)),
        edge(EL.MODEL_REF, ((NL.MODEL, NL.MODEL),)),
        edge(EL.MODEL_STATUS, ((NL.MODEL, NL.SIM),)),
        edge(EL.HAS_PART, ((NL.MODEL, NL.PART),)),
        edge(EL.PART_ROLE, ((NL.PART, NL.PLTF), (NL.PART, NL.UBDY))),
        edge(EL.CON, ((NL.PART, NL.PART),), properties=(_p("types", "text-list", required=True),)),
        edge(EL.OUT_NODE, ((NL.SIM, NL.NODE),)),
        edge(EL.OUT_ELMNT, ((NL.SIM, NL.ELMNT),)),
        edge(EL.PART_NODE, ((NL.PART, NL.NODE),)),
        edge(EL.PART_ELMNT, ((NL.PART, NL.ELMNT),)),
        edge(EL.SAME_AS, ((NL.PART, NL.PART),)),
        edge(EL.CHANGED_TO, ((NL.PART, NL.PART),)),
        edge(EL.CHG, ((NL.CHANGE, NL.PART), (NL.CHANGE, NL.SEMANTIC))),
        edge(EL.CHG_MODELS, ((NL.CHANGE, NL.MODEL),)),
        edge(EL.SEM_PART, ((NL.SEMANTIC, NL.PART),)),
        edge(
            EL.NRG_PART,
            ((NL.SIM, NL.PART),),
            weighted=True,
            weight_range=(0.0, None),
            properties=(_p("t_start", "real"), _p("t_end", "real"), _p("rate", "real")),
        ),
        edge(
            EL.GRP_FTS,
            ((NL.GRP, NL.SIM),),
            weighted=True,
            weight_range=(0.0, None),
            properties=(_p("t_start", "real"), _p("t_end", "real")),
        ),
        edge(EL.DES_OF, ((NL.DES, NL.PART), (NL.DES, NL.MODEL), (NL.DES, NL.GRP))),
        edge(
            EL.BEHAV_OF,
            (
                (NL.BEHAV, NL.PART),
                (NL.BEHAV, NL.SIM),
                (NL.BEHAV, NL.NODE),
                (NL.BEHAV, NL.ELMNT),
                (NL.BEHAV, NL.GRP),
            ),
        ),
        edge(
            EL.GRP_MEM,
            (
                (NL.GRP, NL.PART),
                (NL.GRP, NL.SIM),
                (NL.GRP, NL.MODEL),
                (NL.GRP, NL.NODE),
                (NL.GRP, NL.ELMNT),
            ),
        ),
        edge(
            EL.SIM_SIM,
            ((NL.SIM, NL.SIM),),
            weighted=True,
            weight_range=(0.0, 1.0),
            properties=(_p("params", "text"),),
        ),
        edge(EL.CAUSED_TO, ((NL.CHANGE, NL.SIM),), weighted=True),
    )

    schema = SchemaDef(name=SCHEMA_NAME, node_labels=node_labels, edge_labels=edge_labels)
    schema.validate()
    return schema


# ---------------------------------------------------------------------------
# Whole-graph validation
# ---------------------------------------------------------------------------

SEVERITY_ERROR = "error"
SEVERITY_WARNING = "warning"

#: Allowed relative slack for the per-sim energy bookkeeping check.
ENERGY_TOLERANCE = 0.01


@dataclass(frozen=True)
class Violation:
    severity: str
    entity: str
    rule: str
    message: str

    def __str__(self) -> str:  # pragma: no cover - convenience only
        return f"[{self.severity}] {self.entity}: {self.rule}: {self.message}"


def validate_graph(graph: PropertyGraph) -> list[Violation]:
    """Check full conformance; violations are returned as data, never raised."""
    schema = graph.schema
    out: list[Violation] = []

    for node in graph.nodes():
        spec = schema.node_label(node.label)
        kinds = {p.name: p for p in spec.properties}
        for name, value in node.props.items():
            pspec = kinds.get(name)
            if pspec is None:
                out.append(Violation(SEVERITY_ERROR, node.id, "unknown-property", name))
            elif not check_property_value(pspec.kind, value):
                out.append(
                    Violation(
                        SEVERITY_ERROR,
                        node.id,
                        "property-kind",
                        f"{name} is not {pspec.kind}: {value!r}",
                    )
                )
        for pspec in spec.properties:
            if pspec.required and pspec.name not in node.props:
                out.append(
                    Violation(SEVERITY_ERROR, node.id, "missing-property", pspec.name)
                )

    for edge in graph.edges():
        espec = schema.edge_label(edge.label)
        if not graph.has_node(edge.src) or not graph.has_node(edge.dst):
            out.append(Violation(SEVERITY_ERROR, edge.id, "dangling-edge", ""))
            continue
        pair = (graph.node(edge.src).label, graph.node(edge.dst).label)
        if pair not in espec.endpoints:
            out.append(
                Violation(SEVERITY_ERROR, edge.id, "endpoint-pair", f"{pair} not allowed")
            )
        if espec.weighted:
            if edge.weight is None:
                out.append(Violation(SEVERITY_ERROR, edge.id, "weight-missing", ""))
            elif not math.isfinite(edge.weight):
                out.append(
                    Violation(SEVERITY_ERROR, edge.id, "weight-not-finite", repr(edge.weight))
                )
            elif espec.weight_range is not None:
                lo, hi = espec.weight_range
                if (lo is not None and edge.weight < lo) or (
                    hi is not None and edge.weight > hi
                ):
                    out.append(
                        Violation(
                            SEVERITY_ERROR,
                            edge.id,
                            "weight-range",
                            f"{edge.weight} outside [{lo}, {hi}]",
                        )
                    )
        elif edge.weight is not None:
            out.append(Violation(SEVERITY_ERROR, edge.id, "weight-extra", ""))

    out.extend(_check_domain_rules(graph))
    return out


def _check_domain_rules(graph: PropertyGraph) -> list[Violation]:
    out: list[Violation] = []

    for model in graph.nodes(NL.MODEL):
        if graph.degree(model.id, EL.HAS_PART, "out") == 0:
            out.append(
                Violation(SEVERITY_WARNING, model.id, "empty-model", "model has no parts")
            )

    for veh in graph.nodes(NL.VEH):
        ratings = graph.degree(veh.id, EL.RATING, "out")
        if ratings not in (0, len(SUBDISCIPLINES)):
            out.append(
                Violation(
                    SEVERITY_WARNING,
                    veh.id,
                    "partial-ratings",
                    f"{ratings} RATING edges (expected 0 or {len(SUBDISCIPLINES)})",
                )
            )

    for sim in graph.nodes(NL.SIM):
        impact = sim.props.get("impact_energy")
        if impact is None:
            continue
        absorbed = sum(
            e.weight or 0.0 for e in graph.incident_edges(sim.id, EL.NRG_PART, "out")
        )
        if absorbed > float(impact) * (1.0 + ENERGY_TOLERANCE):
            out.append(
                Violation(
                    SEVERITY_WARNING,
                    sim.id,
                    "energy-bookkeeping",
                    f"part energies sum to {absorbed:.6g}, impact energy is {impact:.6g}",
                )
            )

    return out
