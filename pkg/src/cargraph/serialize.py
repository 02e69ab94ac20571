"""Lossless GraphML and JSON-lines serialization for property graphs.

Both formats round-trip ids, labels, weights, and properties exactly.
GraphML nodes carry a ``labels`` attribute, edges a ``label`` plus an
optional full-precision ``weight``; list-valued properties are encoded
as JSON arrays inside string attributes and decoded back through the
schema's property kinds on import.
"""

from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from typing import IO

from .graph import Edge, PropertyGraph, SchemaDef, create_graph

GRAPHML_NS = "http://graphml.graphdrawing.org/xmlns"

_SCALAR_TYPES = {"text": "string", "integer": "long", "real": "double", "boolean": "boolean"}


def _format_weight(weight: float) -> str:
    # repr round-trips IEEE doubles exactly
    return repr(float(weight))


def _encode_prop(value: object) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return json.dumps(list(value))
    return str(value)


def _decode_prop(kind: str, text: str) -> object:
    if kind == "text":
        return text
    if kind == "integer":
        return int(text)
    if kind == "real":
        return float(text)
    if kind == "boolean":
        return text == "true"
    if kind in ("real-list", "text-list"):
        return json.loads(text)
    raise ValueError(f"unknown property kind {kind!r}")


# ---------------------------------------------------------------------------
# GraphML
# ---------------------------------------------------------------------------

def export_graphml(graph: PropertyGraph) -> bytes:
    ET.register_namespace("", GRAPHML_NS)
    root = ET.Element(f"{{{GRAPHML_NS}}}graphml")

    keys: dict[tuple[str, str], str] = {}  # (target, prop name) -> key id

    def declare_key(target: str, name: str, kind: str) -> str:
        ident = f"{target[0]}_{name}"
        if (target, name) in keys:
            return keys[(target, name)]
        elem = ET.SubElement(root, f"{{{GRAPHML_NS}}}key")
        elem.set("id", ident)
        elem.set("for", target)
        elem.set("attr.name", name)
        elem.set("attr.type", _SCALAR_TYPES.get(kind, "string"))
        if kind not in _SCALAR_TYPES:
            elem.set("attr.kind", kind)
        keys[(target, name)] = ident
        return ident

    declare_key("node", "labels", "text")
    declare_key("edge", "label", "text")
    declare_key("edge", "weight", "real")
    for spec in graph.schema.node_labels:
        for prop in spec.properties:
            declare_key("node", prop.name, prop.kind)
    for espec in graph.schema.edge_labels:
        for prop in espec.properties:
            declare_key("edge", prop.name, prop.kind)

    gelem = ET.SubElement(root, f"{{{GRAPHML_NS}}}graph")
    gelem.set("id", graph.schema.name)
    gelem.set("edgedefault", "directed")

    def data(parent: ET.Element, key: str, text: str) -> None:
        d = ET.SubElement(parent, f"{{{GRAPHML_NS}}}data")
        d.set("key", key)
        d.text = text

    for node in graph.nodes():
        nelem = ET.SubElement(gelem, f"{{{GRAPHML_NS}}}node")
        nelem.set("id", node.id)
        data(nelem, keys[("node", "labels")], node.label)
        for name in sorted(node.props):
            data(nelem, keys[("node", name)], _encode_prop(node.props[name]))

    for edge in graph.edges():
        eelem = ET.SubElement(gelem, f"{{{GRAPHML_NS}}}edge")
        eelem.set("id", edge.id)
        eelem.set("source", edge.src)
        eelem.set("target", edge.dst)
        data(eelem, keys[("edge", "label")], edge.label)
        if edge.weight is not None:
            data(eelem, keys[("edge", "weight")], _format_weight(edge.weight))
        for name in sorted(edge.props):
            data(eelem, keys[("edge", name)], _encode_prop(edge.props[name]))

    ET.indent(root)
    return ET.tostring(root, encoding="utf-8", xml_declaration=True)


def import_graphml(data: bytes, schema: SchemaDef) -> PropertyGraph:
    root = ET.fromstring(data)
    key_names: dict[str, str] = {}
    for key in root.findall(f"{{{GRAPHML_NS}}}key"):
        key_names[key.get("id", "")] = key.get("attr.name", "")

    graph = create_graph(schema)
    gelem = root.find(f"{{{GRAPHML_NS}}}graph")
    if gelem is None:
        raise ValueError("graphml document has no <graph> element")

    def read_data(elem: ET.Element) -> dict[str, str]:
        out: dict[str, str] = {}
        for d in elem.findall(f"{{{GRAPHML_NS}}}data"):
            out[key_names.get(d.get("key", ""), "")] = d.text or ""
        return out

    for nelem in gelem.findall(f"{{{GRAPHML_NS}}}node"):
        fields = read_data(nelem)
        label = fields.pop("labels")
        spec = schema.node_label(label)
        kinds = {p.name: p.kind for p in spec.properties}
        props = {name: _decode_prop(kinds[name], text) for name, text in fields.items()}
        graph.add_node(label, nelem.get("id", ""), props)

    for eelem in gelem.findall(f"{{{GRAPHML_NS}}}edge"):
        fields = read_data(eelem)
        label = fields.pop("label")
        weight = float(fields.pop("weight")) if "weight" in fields else None
        espec = schema.edge_label(label)
        kinds = {p.name: p.kind for p in espec.properties}
        props = {name: _decode_prop(kinds[name], text) for name, text in fields.items()}
        graph.add_edge(label, eelem.get("source", ""), eelem.get("target", ""), weight, props)

    return graph


# ---------------------------------------------------------------------------
# JSON lines
# ---------------------------------------------------------------------------

def export_jsonlines(graph: PropertyGraph) -> bytes:
    lines: list[str] = []
    for node in graph.nodes():
        lines.append(
            json.dumps(
                {"kind": "node", "id": node.id, "label": node.label, "props": node.props},
                sort_keys=True,
            )
        )
    for edge in graph.edges():
        record: dict[str, object] = {
            "kind": "edge",
            "id": edge.id,
            "label": edge.label,
            "src": edge.src,
            "dst": edge.dst,
            "props": edge.props,
        }
        if edge.weight is not None:
            record["weight"] = edge.weight
        lines.append(json.dumps(record, sort_keys=True))
    return ("\n".join(lines) + "\n" if lines else "").encode("utf-8")


def import_jsonlines(data: bytes, schema: SchemaDef) -> PropertyGraph:
    graph = create_graph(schema)
    pending_edges: list[dict[str, object]] = []
    for lineno, raw in enumerate(data.decode("utf-8").splitlines(), start=1):
        if not raw.strip():
            continue
        record = json.loads(raw)
        kind = record.get("kind")
        if kind == "node":
            graph.add_node(record["label"], record["id"], record.get("props", {}))
        elif kind == "edge":
            pending_edges.append(record)
        else:
            raise ValueError(f"line {lineno}: unknown record kind {kind!r}")
    # nodes may legally appear after edges that reference them
    for record in pending_edges:
        graph.add_edge(
            record["label"],
            record["src"],
            record["dst"],
            record.get("weight"),
            record.get("props", {}),
        )
    return graph


def export_graph(graph: PropertyGraph, fmt: str) -> bytes:
    if fmt == "graphml":
        return export_graphml(graph)
    if fmt == "jsonlines":
        return export_jsonlines(graph)
    raise ValueError(f"unknown export format {fmt!r} (expected graphml or jsonlines)")


def import_graph(data: bytes, schema: SchemaDef, fmt: str) -> PropertyGraph:
    if fmt == "graphml":
        return import_graphml(data, schema)
    if fmt == "jsonlines":
        return import_jsonlines(data, schema)
    raise ValueError(f"unknown import format {fmt!r} (expected graphml or jsonlines)")


def write_graph(graph: PropertyGraph, stream: IO[bytes], fmt: str) -> None:
    stream.write(export_graph(graph, fmt))


def graphs_equal(a: PropertyGraph, b: PropertyGraph) -> bool:
    """Id-preserving equality of node and edge sets (labels, weights, props)."""
    if a.node_count != b.node_count or a.edge_count != b.edge_count:
        return False
    for node in a.nodes():
        if not b.has_node(node.id):
            return False
        other = b.node(node.id)
        if other.label != node.label or other.props != node.props:
            return False
    for edge in a.edges():
        other_e: Edge | None = b.find_edge(edge.label, edge.src, edge.dst)
        if other_e is None:
            return False
        if other_e.weight != edge.weight or other_e.props != edge.props:
            return False
    return True
