"""Graph core: schema binding, mutation rules, traversal, pattern match."""

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cargraph.graph import (
    DuplicateError,
    EdgeConstraintError,
    EdgeLabelSpec,
    NodeLabelSpec,
    PropertyError,
    PropertyGraph,
    PropertySpec,
    SchemaDef,
    SchemaError,
    UnknownEntityError,
    UnknownLabelError,
    create_graph,
)
from cargraph.schema import EL, NL, car_schema


def toy_schema() -> SchemaDef:
    return SchemaDef(
        name="toy",
        node_labels=(
            NodeLabelSpec("A", (PropertySpec("name", "text", required=True),)),
            NodeLabelSpec("B", (PropertySpec("size", "integer"),)),
        ),
        edge_labels=(
            EdgeLabelSpec("AB", (("A", "B"),)),
            EdgeLabelSpec("AA", (("A", "A"),), weighted=True),
        ),
    )


# ---------------------------------------------------------------------------
# create_graph / schema validation
# ---------------------------------------------------------------------------

def test_create_graph_empty_car_schema():
    g = create_graph(car_schema())
    assert g.node_count == 0
    assert g.edge_count == 0


def test_schema_rejects_edge_without_endpoints():
    schema = SchemaDef(
        name="bad",
        node_labels=(NodeLabelSpec("A"),),
        edge_labels=(EdgeLabelSpec("E", ()),),
    )
    with pytest.raises(SchemaError, match="no endpoint pairs"):
        create_graph(schema)


def test_schema_rejects_duplicate_node_labels():
    schema = SchemaDef(
        name="bad",
        node_labels=(NodeLabelSpec("Veh"), NodeLabelSpec("Veh")),
        edge_labels=(),
    )
    with pytest.raises(SchemaError, match="duplicate node label"):
        create_graph(schema)


# ---------------------------------------------------------------------------
# add_node
# ---------------------------------------------------------------------------

def test_add_node_nominal(car_graph):
    node = car_graph.add_node(NL.VEH, "veh:polo-2022", {"name": "VW Polo", "on_market": True})
    assert node.id == "veh:polo-2022"
    assert car_graph.node("veh:polo-2022").props["name"] == "VW Polo"
    assert [n.id for n in car_graph.nodes(NL.VEH)] == ["veh:polo-2022"]


def test_add_node_duplicate_id(car_graph):
    car_graph.add_node(NL.CLASS, "class:x", {"name": "x"})
    with pytest.raises(DuplicateError):
        car_graph.add_node(NL.CLASS, "class:x", {"name": "x"})


def test_add_node_missing_required_property(car_graph):
    # Sim requires run_id
    with pytest.raises(PropertyError, match="run_id"):
        car_graph.add_node(NL.SIM, "sim:x", {})


def test_add_node_kind_mismatch(car_graph):
    with pytest.raises(PropertyError, match="kind"):
        car_graph.add_node(NL.CLASS, "class:x", {"name": 42})


def test_add_node_unknown_label(car_graph):
    with pytest.raises(UnknownLabelError):
        car_graph.add_node("Nope", "x:1", {})


# ---------------------------------------------------------------------------
# add_edge
# ---------------------------------------------------------------------------

@pytest.fixture()
def rated(car_graph):
    car_graph.add_node(NL.VEH, "veh:a", {"name": "A", "on_market": True})
    car_graph.add_node(NL.VRU, "vru", {})
    car_graph.add_node(NL.MODEL, "model:m", {"model_id": "m"})
    car_graph.add_node(NL.PART, "part:m/1", {"pid": 1})
    car_graph.add_node(NL.PART, "part:m/2", {"pid": 2})
    return car_graph


def test_add_edge_weighted(rated):
    edge = rated.add_edge(EL.RATING, "veh:a", "vru", 76.0)
    assert edge.weight == 76.0
    assert rated.degree("veh:a", EL.RATING, "out") == 1


def test_add_edge_pair_not_allowed(rated):
    with pytest.raises(EdgeConstraintError, match="endpoint pair"):
        rated.add_edge(EL.RATING, "veh:a", "part:m/1", 50.0)


def test_add_edge_weight_on_unweighted_label(rated):
    with pytest.raises(EdgeConstraintError, match="unweighted"):
        rated.add_edge(EL.SAME_AS, "part:m/1", "part:m/2", 1.0)


def test_add_edge_missing_weight(rated):
    with pytest.raises(EdgeConstraintError, match="weight required"):
        rated.add_edge(EL.RATING, "veh:a", "vru")


def test_add_edge_non_finite_weight(rated):
    with pytest.raises(EdgeConstraintError, match="finite"):
        rated.add_edge(EL.RATING, "veh:a", "vru", float("nan"))


def test_add_edge_missing_endpoint(rated):
    with pytest.raises(UnknownEntityError):
        rated.add_edge(EL.RATING, "veh:ghost", "vru", 10.0)


def test_parallel_same_label_rejected(rated):
    rated.add_edge(EL.SAME_AS, "part:m/1", "part:m/2")
    with pytest.raises(DuplicateError, match="parallel"):
        rated.add_edge(EL.SAME_AS, "part:m/1", "part:m/2")
    # a different label between the same endpoints is fine (multigraph)
    rated.add_edge(EL.CHANGED_TO, "part:m/1", "part:m/2")


# ---------------------------------------------------------------------------
# degree / neighbors
# ---------------------------------------------------------------------------

@pytest.fixture()
def change_fixture(car_graph):
    """part:m/0 with 3 outgoing CHANGED_TO and 1 incoming SAME_AS."""
    car_graph.add_node(NL.MODEL, "model:m", {"model_id": "m"})
    for i in range(5):
        car_graph.add_node(NL.PART, f"part:m/{i}", {"pid": i})
    for i in (1, 2, 3):
        car_graph.add_edge(EL.CHANGED_TO, "part:m/0", f"part:m/{i}")
    car_graph.add_edge(EL.SAME_AS, "part:m/4", "part:m/0")
    return car_graph


def test_degree_isolated_node(car_graph):
    car_graph.add_node(NL.GRP, "grp:x", {})
    assert car_graph.degree("grp:x") == 0
    assert car_graph.neighbors("grp:x") == []


def test_degree_filtered(change_fixture):
    assert change_fixture.degree("part:m/0", EL.CHANGED_TO, "out") == 3
    assert change_fixture.degree("part:m/0", None, "both") == 4
    assert change_fixture.degree("part:m/0", EL.SAME_AS, "in") == 1


def test_degree_unknown_node(car_graph):
    with pytest.raises(UnknownEntityError):
        car_graph.degree("nope")


def test_neighbors_sorted(car_graph):
    car_graph.add_node(NL.SIM, "sim:s", {"run_id": "s"})
    car_graph.add_node(NL.MODEL, "model:m", {"model_id": "m"})
    car_graph.add_node(NL.PART, "part:m/2", {"pid": 2})
    car_graph.add_node(NL.PART, "part:m/1", {"pid": 1})
    car_graph.add_edge(EL.NRG_PART, "sim:s", "part:m/2", 5.0)
    car_graph.add_edge(EL.NRG_PART, "sim:s", "part:m/1", 3.0)
    assert [n.id for n in car_graph.neighbors("sim:s", EL.NRG_PART, "out")] == [
        "part:m/1",
        "part:m/2",
    ]


def test_neighbors_unknown_node(car_graph):
    with pytest.raises(UnknownEntityError):
        car_graph.neighbors("missing")


# ---------------------------------------------------------------------------
# match
# ---------------------------------------------------------------------------

def two_vehicle_fixture(g):
    g.add_node(NL.VRU, "vru", {})
    for key in ("a", "b"):
        g.add_node(NL.VEH, f"veh:{key}", {"name": key.upper(), "on_market": True})
        g.add_edge(EL.RATING, f"veh:{key}", "vru", 50.0)
    return g


def test_match_one_hop(car_graph):
    g = two_vehicle_fixture(car_graph)
    bindings = g.match((NL.VEH, EL.RATING, NL.VRU))
    assert len(bindings) == 2
    assert [b[0].id for b in bindings] == ["veh:a", "veh:b"]


def test_match_brute_force_equivalence(car_graph):
    g = two_vehicle_fixture(car_graph)
    expected = []
    for edge in g.edges(EL.RATING):
        src, dst = g.node(edge.src), g.node(edge.dst)
        if src.label == NL.VEH and dst.label == NL.VRU:
            expected.append((src.id, dst.id))
    got = [(a.id, b.id) for a, b in g.match((NL.VEH, EL.RATING, NL.VRU))]
    assert got == sorted(expected)


def test_match_with_predicate(car_graph):
    g = two_vehicle_fixture(car_graph)
    bindings = g.match((NL.VEH, EL.RATING, NL.VRU), {0: {"name": "A"}})
    assert [b[0].id for b in bindings] == ["veh:a"]


def test_match_unknown_label(car_graph):
    with pytest.raises(UnknownLabelError):
        car_graph.match(("Veh", "NOPE", "VRU"))


def test_match_empty_graph(car_graph):
    assert car_graph.match((NL.VEH, EL.RATING, NL.VRU)) == []


def test_match_three_hops(demo_graph):
    bindings = demo_graph.match((NL.SIM, EL.SIM_MODEL, NL.MODEL, EL.MODEL_OF, NL.VEH))
    assert bindings
    for sim, model, veh in bindings:
        assert demo_graph.find_edge(EL.SIM_MODEL, sim.id, model.id)
        assert demo_graph.find_edge(EL.MODEL_OF, model.id, veh.id)


def test_match_rejects_long_patterns(car_graph):
    with pytest.raises(ValueError, match="3 hops"):
        car_graph.match((NL.VEH,) + (EL.RATING, NL.VRU) * 4)


# ---------------------------------------------------------------------------
# removal
# ---------------------------------------------------------------------------

def test_remove_node_requires_no_incident_edges(rated):
    rated.add_edge(EL.RATING, "veh:a", "vru", 10.0)
    with pytest.raises(Exception, match="incident"):
        rated.remove_node("veh:a")
    for edge in rated.incident_edges("veh:a"):
        rated.remove_edge(edge.id)
    rated.remove_node("veh:a")
    assert not rated.has_node("veh:a")


# ---------------------------------------------------------------------------
# property tests: schema conformance over random mutation sequences
# ---------------------------------------------------------------------------

_node_ids = st.integers(0, 9).map(lambda i: f"n{i}")
_labels = st.sampled_from(["A", "B"])
_edge_labels = st.sampled_from(["AB", "AA"])

_ops = st.lists(
    st.one_of(
        st.tuples(st.just("add_node"), _labels, _node_ids),
        st.tuples(st.just("add_edge"), _edge_labels, _node_ids, _node_ids),
        st.tuples(st.just("remove_edge"), _node_ids, _node_ids),
        st.tuples(st.just("remove_node"), _node_ids),
    ),
    max_size=60,
)


def _check_invariants(g: PropertyGraph):
    # every edge endpoint-label pair is allowed and both endpoints exist
    for edge in g.edges():
        spec = g.schema.edge_label(edge.label)
        assert g.has_node(edge.src) and g.has_node(edge.dst), "dangling edge"
        pair = (g.node(edge.src).label, g.node(edge.dst).label)
        assert pair in spec.endpoints
        assert (edge.weight is not None) == spec.weighted
    # degree agrees with a brute-force scan over the full edge list
    for node in g.nodes():
        brute = sum(1 for e in g.edges() if e.src == node.id) + sum(
            1 for e in g.edges() if e.dst == node.id
        )
        assert g.degree(node.id, None, "both") == brute


@settings(max_examples=60, deadline=None)
@given(_ops)
def test_schema_conformance_under_random_mutations(ops):
    g = create_graph(toy_schema())
    for op in ops:
        try:
            if op[0] == "add_node":
                props = {"name": op[2]} if op[1] == "A" else {}
                g.add_node(op[1], op[2], props)
            elif op[0] == "add_edge":
                weight = 1.0 if op[1] == "AA" else None
                g.add_edge(op[1], op[2], op[3], weight)
            elif op[0] == "remove_edge":
                for label in ("AB", "AA"):
                    edge = g.find_edge(label, op[1], op[2])
                    if edge is not None:
                        g.remove_edge(edge.id)
            elif op[0] == "remove_node":
                g.remove_node(op[1])
        except Exception:
            pass  # illegal mutations must leave the graph untouched
        _check_invariants(g)
