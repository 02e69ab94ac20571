"""Export/import round trips for GraphML and JSON-lines."""

from __future__ import annotations

import json
import xml.etree.ElementTree as ET

import pytest

from cargraph.schema import EL, NL, car_schema
from cargraph.serialize import (
    export_graphml,
    export_jsonlines,
    graphs_equal,
    import_graphml,
    import_jsonlines,
)
from cargraph.graph import create_graph


@pytest.fixture()
def small_graph():
    g = create_graph(car_schema())
    g.add_node(NL.VEH, "veh:a", {"name": "A", "on_market": True, "media": ["u1", "u2"]})
    g.add_node(NL.VRU, "vru", {"name": "VRU"})
    g.add_node(NL.CLASS, "class:c", {"name": "C"})
    g.add_edge(EL.RATING, "veh:a", "vru", 76.25)
    g.add_edge(EL.IN_CLASS, "veh:a", "class:c")
    return g


def test_empty_graph_exports(car_graph):
    gml = export_graphml(car_graph)
    assert ET.fromstring(gml) is not None
    assert import_graphml(gml, car_schema()).node_count == 0
    jl = export_jsonlines(car_graph)
    assert jl == b""
    assert import_jsonlines(jl, car_schema()).node_count == 0


@pytest.mark.parametrize("fmt", ["graphml", "jsonlines"])
def test_three_node_round_trip(small_graph, fmt):
    if fmt == "graphml":
        back = import_graphml(export_graphml(small_graph), car_schema())
    else:
        back = import_jsonlines(export_jsonlines(small_graph), car_schema())
    assert graphs_equal(small_graph, back)
    assert back.node("veh:a").props["media"] == ["u1", "u2"]


@pytest.mark.parametrize("weight", [76.25, 1.0 / 3.0, 2.0 ** -40, 99.999999999999999])
@pytest.mark.parametrize("fmt", ["graphml", "jsonlines"])
def test_weight_bit_equal_round_trip(car_graph, fmt, weight):
    car_graph.add_node(NL.VEH, "veh:a", {"name": "A", "on_market": True})
    car_graph.add_node(NL.SA, "sa", {})
    car_graph.add_edge(EL.RATING, "veh:a", "sa", weight)
    if fmt == "graphml":
        back = import_graphml(export_graphml(car_graph), car_schema())
    else:
        back = import_jsonlines(export_jsonlines(car_graph), car_schema())
    restored = back.find_edge(EL.RATING, "veh:a", "sa")
    assert restored is not None
    assert restored.weight == float(weight)  # bit-equal


def test_jsonlines_format_shape(small_graph):
    lines = export_jsonlines(small_graph).decode("utf-8").strip().split("\n")
    records = [json.loads(line) for line in lines]
    assert all(r["kind"] in ("node", "edge") for r in records)
    kinds = [r["kind"] for r in records]
    assert kinds.count("node") == 3
    assert kinds.count("edge") == 2


def test_graphml_attributes(small_graph):
    ns = {"g": "http://graphml.graphdrawing.org/xmlns"}
    root = ET.fromstring(export_graphml(small_graph))
    keys = {k.get("id"): k.get("attr.name") for k in root.findall("g:key", ns)}
    assert "labels" in keys.values()
    assert "label" in keys.values()
    assert "weight" in keys.values()
    graph_elem = root.find("g:graph", ns)
    assert graph_elem.get("edgedefault") == "directed"


def test_full_demo_round_trip(demo_graph):
    for exporter, importer in (
        (export_graphml, import_graphml),
        (export_jsonlines, import_jsonlines),
    ):
        back = importer(exporter(demo_graph), car_schema())
        assert graphs_equal(demo_graph, back)
        assert graphs_equal(back, demo_graph)
