"""Directed property multigraph with label-indexed storage and schema validation.

Nodes and edges carry typed property maps checked against a registered
schema on every mutation. Parallel edges are allowed between the same
endpoints only when their labels differ; a second edge with the same
(label, src, dst) triple is rejected, which catches most ingestion bugs.

Mutations are serialized through a single writer lock. Readers that need
a stable view (analytics, the query service) work on a snapshot.
"""

from __future__ import annotations

import copy
import math
import threading
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Mapping, Sequence

PROPERTY_KINDS = ("text", "integer", "real", "boolean", "real-list", "text-list")

Direction = str  # "in" | "out" | "both"


class GraphError(Exception):
    """Base class for graph-layer failures."""


class SchemaError(GraphError):
    """Malformed schema definition."""


class UnknownLabelError(GraphError):
    """Label not registered in the active schema."""


class UnknownEntityError(GraphError):
    """Node or edge id not present in the graph."""


class DuplicateError(GraphError):
    """Node id or (label, src, dst) edge triple already present."""


class PropertyError(GraphError):
    """Property map does not conform to the label's signature."""


class EdgeConstraintError(GraphError):
    """Endpoint pair or weight rule violated for an edge label."""


# ---------------------------------------------------------------------------
# Schema definition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PropertySpec:
    name: str
    kind: str
    required: bool = False


@dataclass(frozen=True)
class NodeLabelSpec:
    label: str
    properties: tuple[PropertySpec, ...] = ()


@dataclass(frozen=True)
class EdgeLabelSpec:
    label: str
    endpoints: tuple[tuple[str, str], ...]
    weighted: bool = False
    weight_range: tuple[float | None, float | None] | None = None
    properties: tuple[PropertySpec, ...] = ()


@dataclass(frozen=True)
class SchemaDef:
    """Machine form of a graph schema: labels, endpoint rules, signatures."""

    name: str
    node_labels: tuple[NodeLabelSpec, ...]
    edge_labels: tuple[EdgeLabelSpec, ...]

    def validate(self) -> None:
        """Raise SchemaError if the definition violates its own invariants."""
        seen_nodes: set[str] = set()
        for spec in self.node_labels:
            if not spec.label:
                raise SchemaError("empty node label name")
            if spec.label in seen_nodes:
                raise SchemaError(f"duplicate node label {spec.label!r}")
            seen_nodes.add(spec.label)
            _check_signature(spec.label, spec.properties)
        seen_edges: set[str] = set()
        for espec in self.edge_labels:
            if not espec.label:
                raise SchemaError("empty edge label name")
            if espec.label in seen_edges:
                raise SchemaError(f"duplicate edge label {espec.label!r}")
            seen_edges.add(espec.label)
            if not espec.endpoints:
                raise SchemaError(f"edge label {espec.label!r} has no endpoint pairs")
            for src, dst in espec.endpoints:
                if src not in seen_nodes or dst not in seen_nodes:
                    raise SchemaError(
                        f"edge label {espec.label!r} references unknown "
                        f"node label in pair ({src!r}, {dst!r})"
                    )
            _check_signature(espec.label, espec.properties)

    def node_label(self, label: str) -> NodeLabelSpec:
        for spec in self.node_labels:
            if spec.label == label:
                return spec
        raise UnknownLabelError(f"unknown node label {label!r}")

    def edge_label(self, label: str) -> EdgeLabelSpec:
        for spec in self.edge_labels:
            if spec.label == label:
                return spec
        raise UnknownLabelError(f"unknown edge label {label!r}")

    def has_node_label(self, label: str) -> bool:
        return any(s.label == label for s in self.node_labels)

    def has_edge_label(self, label: str) -> bool:
        return any(s.label == label for s in self.edge_labels)


def _check_signature(owner: str, properties: tuple[PropertySpec, ...]) -> None:
    names: set[str] = set()
    for prop in properties:
        if prop.name in names:
            raise SchemaError(f"duplicate property {prop.name!r} on label {owner!r}")
        names.add(prop.name)
        if prop.kind not in PROPERTY_KINDS:
            raise SchemaError(
                f"property {owner}.{prop.name} has unknown kind {prop.kind!r}"
            )


def check_property_value(kind: str, value: object) -> bool:
    if kind == "text":
        return isinstance(value, str)
    if kind == "integer":
        return isinstance(value, int) and not isinstance(value, bool)
    if kind == "real":
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if kind == "boolean":
        return isinstance(value, bool)
    if kind == "real-list":
        return isinstance(value, (list, tuple)) and all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
        )
    if kind == "text-list":
        return isinstance(value, (list, tuple)) and all(isinstance(v, str) for v in value)
    return False


def _normalize_value(kind: str, value: object) -> object:
    # Normalizing at insert keeps export/import round trips value-identical.
    if kind == "real":
        return float(value)  # type: ignore[arg-type]
    if kind == "real-list":
        return [float(v) for v in value]  # type: ignore[union-attr]
    if kind == "text-list":
        return list(value)  # type: ignore[call-overload]
    return value


def conform_props(
    owner: str, signature: tuple[PropertySpec, ...], props: Mapping[str, object]
) -> dict[str, object]:
    """Validate a property map against a signature and normalize values."""
    by_name = {p.name: p for p in signature}
    out: dict[str, object] = {}
    for key, value in props.items():
        spec = by_name.get(key)
        if spec is None:
            raise PropertyError(f"{owner}: unknown property {key!r}")
        if not check_property_value(spec.kind, value):
            raise PropertyError(
                f"{owner}: property {key!r} expects kind {spec.kind}, "
                f"got {type(value).__name__} ({value!r})"
            )
        out[key] = _normalize_value(spec.kind, value)
    for spec in signature:
        if spec.required and spec.name not in out:
            raise PropertyError(f"{owner}: missing required property {spec.name!r}")
    return out


# ---------------------------------------------------------------------------
# Graph elements
# ---------------------------------------------------------------------------

@dataclass
class Node:
    id: str
    label: str
    props: dict[str, object] = field(default_factory=dict)


@dataclass
class Edge:
    id: str
    label: str
    src: str
    dst: str
    weight: float | None = None
    props: dict[str, object] = field(default_factory=dict)


def edge_id(label: str, src: str, dst: str) -> str:
    """Deterministic edge id; unique because same-label parallels are rejected."""
    return f"{label}:{src}->{dst}"


class PropertyGraph:
    """Schema-bound directed multigraph over string-identified nodes."""

    def __init__(self, schema: SchemaDef):
        schema.validate()
        self.schema = schema
        self._nodes: dict[str, Node] = {}
        self._edges: dict[str, Edge] = {}
        self._by_label: dict[str, set[str]] = {}
        self._out: dict[str, set[str]] = {}
        self._in: dict[str, set[str]] = {}
        self._write_lock = threading.RLock()
        self._mutation_count = 0

    # -- introspection ------------------------------------------------------

    @property
    def node_count(self) -> int:
        return len(self._nodes)

    @property
    def edge_count(self) -> int:
        return len(self._edges)

    @property
    def mutation_count(self) -> int:
        return self._mutation_count

    def has_node(self, node_id: str) -> bool:
        return node_id in self._nodes

    def has_edge(self, label: str, src: str, dst: str) -> bool:
        return edge_id(label, src, dst) in self._edges

    def node(self, node_id: str) -> Node:
        try:
            return self._nodes[node_id]
        except KeyError:
            raise UnknownEntityError(f"unknown node {node_id!r}") from None

    def edge(self, eid: str) -> Edge:
        try:
            return self._edges[eid]
        except KeyError:
            raise UnknownEntityError(f"unknown edge {eid!r}") from None

    def find_edge(self, label: str, src: str, dst: str) -> Edge | None:
        return self._edges.get(edge_id(label, src, dst))

    def nodes(self, label: str | None = None) -> list[Node]:
        """All nodes, optionally restricted to one label, ordered by id."""
        if label is None:
            ids: Iterable[str] = self._nodes
        else:
            if not self.schema.has_node_label(label):
                raise UnknownLabelError(f"unknown node label {label!r}")
            ids = self._by_label.get(label, ())
        return [self._nodes[i] for i in sorted(ids)]

    def edges(self, label: str | None = None) -> list[Edge]:
        out = [
            e for e in self._edges.values() if label is None or e.label == label
        ]
        out.sort(key=lambda e: e.id)
        return out

    def iter_edges(self) -> Iterator[Edge]:
        return iter(self._edges.values())

    # -- mutation -----------------------------------------------------------

    def add_node(self, label: str, node_id: str, props: Mapping[str, object] | None = None) -> Node:
        spec = self.schema.node_label(label)
        conformed = conform_props(f"node {node_id!r} ({label})", spec.properties, props or {})
        with self._write_lock:
            if not node_id:
                raise GraphError("node id must be non-empty")
            if node_id in self._nodes:
                raise DuplicateError(f"node id {node_id!r} already present")
            node = Node(id=node_id, label=label, props=conformed)
            self._nodes[node_id] = node
            self._by_label.setdefault(label, set()).add(node_id)
            self._out.setdefault(node_id, set())
            self._in.setdefault(node_id, set())
            self._mutation_count += 1
            return node

    def set_node_props(self, node_id: str, props: Mapping[str, object]) -> Node:
        """Merge new property values into an existing node (schema-checked)."""
        node = self.node(node_id)
        spec = self.schema.node_label(node.label)
        merged = dict(node.props)
        merged.update(props)
        conformed = conform_props(f"node {node_id!r} ({node.label})", spec.properties, merged)
        with self._write_lock:
            node.props = conformed
            self._mutation_count += 1
            return node

    def add_edge(
        self,
        label: str,
        src: str,
        dst: str,
        weight: float | None = None,
        props: Mapping[str, object] | None = None,
    ) -> Edge:
        spec = self.schema.edge_label(label)
        if src not in self._nodes:
            raise UnknownEntityError(f"edge {label}: missing src node {src!r}")
        if dst not in self._nodes:
            raise UnknownEntityError(f"edge {label}: missing dst node {dst!r}")
        pair = (self._nodes[src].label, self._nodes[dst].label)
        if pair not in spec.endpoints:
            raise EdgeConstraintError(
                f"edge {label}: endpoint pair {pair} not allowed "
                f"(allowed: {sorted(spec.endpoints)})"
            )
        if spec.weighted:
            if weight is None:
                raise EdgeConstraintError(f"edge {label}: weight required")
            weight = float(weight)
            if not math.isfinite(weight):
                raise EdgeConstraintError(f"edge {label}: weight must be finite, got {weight!r}")
        elif weight is not None:
            raise EdgeConstraintError(f"edge {label}: label is unweighted, weight given")
        conformed = conform_props(f"edge {label}", spec.properties, props or {})
        eid = edge_id(label, src, dst)
        with self._write_lock:
            if eid in self._edges:
                raise DuplicateError(f"parallel {label} edge {src!r}->{dst!r} already present")
            edge = Edge(id=eid, label=label, src=src, dst=dst, weight=weight, props=conformed)
            self._edges[eid] = edge
            self._out[src].add(eid)
            self._in[dst].add(eid)
            self._mutation_count += 1
            return edge

    def remove_edge(self, eid: str) -> None:
        with self._write_lock:
            edge = self.edge(eid)
            del self._edges[eid]
            self._out[edge.src].discard(eid)
            self._in[edge.dst].discard(eid)
            self._mutation_count += 1

    def remove_node(self, node_id: str) -> None:
        """Remove a node; fails while any incident edge exists (cascade-free)."""
        with self._write_lock:
            node = self.node(node_id)
            if self._out[node_id] or self._in[node_id]:
                raise GraphError(
                    f"node {node_id!r} still has "
                    f"{len(self._out[node_id]) + len(self._in[node_id])} incident edges"
                )
            del self._nodes[node_id]
            self._by_label[node.label].discard(node_id)
            del self._out[node_id]
            del self._in[node_id]
            self._mutation_count += 1

    # -- traversal ----------------------------------------------------------

    def incident_edges(
        self, node_id: str, label_filter: str | None = None, direction: Direction = "both"
    ) -> list[Edge]:
        if node_id not in self._nodes:
            raise UnknownEntityError(f"unknown node {node_id!r}")
        if direction not in ("in", "out", "both"):
            raise ValueError(f"direction must be in/out/both, got {direction!r}")
        eids: list[str] = []
        if direction in ("out", "both"):
            eids.extend(self._out[node_id])
        if direction in ("in", "both"):
            eids.extend(self._in[node_id])
        edges = [self._edges[e] for e in eids]
        if label_filter is not None:
            edges = [e for e in edges if e.label == label_filter]
        edges.sort(key=lambda e: e.id)
        return edges

    def degree(
        self, node_id: str, label_filter: str | None = None, direction: Direction = "both"
    ) -> int:
        return len(self.incident_edges(node_id, label_filter, direction))

    def neighbors(
        self, node_id: str, label_filter: str | None = None, direction: Direction = "both"
    ) -> list[Node]:
        """Distinct adjacent nodes in ascending id order."""
        seen: set[str] = set()
        for edge in self.incident_edges(node_id, label_filter, direction):
            other = edge.dst if edge.src == node_id else edge.src
            seen.add(other)
        return [self._nodes[i] for i in sorted(seen)]

    def match(
        self,
        path: Sequence[str],
        predicates: Mapping[int, Mapping[str, object] | Callable[[Node], bool]] | None = None,
    ) -> list[tuple[Node, ...]]:
        """Enumerate bindings of an alternating label path.

        ``path`` alternates node and edge labels and therefore has odd
        length: ``("Veh",)``, ``("Veh", "RATING", "VRU")``, up to three hops.
        Edges are followed in their stored direction. ``predicates`` maps a
        node position (0-based within the node sequence) to either a
        property-equality mapping or an arbitrary boolean callable.
        Bindings come back sorted by the tuple of node ids.
        """
        if len(path) % 2 != 1:
            raise ValueError("pattern must alternate node/edge labels (odd length)")
        n_hops = len(path) // 2
        if n_hops > 3:
            raise ValueError("pattern paths are limited to 3 hops")
        node_labels = [path[i] for i in range(0, len(path), 2)]
        hop_labels = [path[i] for i in range(1, len(path), 2)]
        for label in node_labels:
            if not self.schema.has_node_label(label):
                raise UnknownLabelError(f"unknown node label {label!r} in pattern")
        for label in hop_labels:
            if not self.schema.has_edge_label(label):
                raise UnknownLabelError(f"unknown edge label {label!r} in pattern")
        predicates = predicates or {}

        def accepts(position: int, node: Node) -> bool:
            pred = predicates.get(position)
            if pred is None:
                return True
            if callable(pred):
                return bool(pred(node))
            return all(node.props.get(k) == v for k, v in pred.items())

        bindings: list[tuple[Node, ...]] = []
        starts = [n for n in self.nodes(node_labels[0]) if accepts(0, n)]
        stack: list[tuple[Node, ...]] = [(n,) for n in starts]
        while stack:
            partial = stack.pop()
            hop = len(partial) - 1
            if hop == n_hops:
                bindings.append(partial)
                continue
            tail = partial[-1]
            for edge in self.incident_edges(tail.id, hop_labels[hop], "out"):
                nxt = self._nodes[edge.dst]
                if nxt.label == node_labels[hop + 1] and accepts(hop + 1, nxt):
                    stack.append(partial + (nxt,))
        bindings.sort(key=lambda b: tuple(n.id for n in b))
        return bindings

    # -- snapshots ----------------------------------------------------------

    def snapshot(self) -> "PropertyGraph":
        """Deep, independent copy for concurrent read-side use."""
        with self._write_lock:
            clone = PropertyGraph(self.schema)
            clone._nodes = {i: Node(n.id, n.label, copy.deepcopy(n.props)) for i, n in self._nodes.items()}
            clone._edges = {
                i: Edge(e.id, e.label, e.src, e.dst, e.weight, copy.deepcopy(e.props))
                for i, e in self._edges.items()
            }
            clone._by_label = {l: set(s) for l, s in self._by_label.items()}
            clone._out = {i: set(s) for i, s in self._out.items()}
            clone._in = {i: set(s) for i, s in self._in.items()}
            clone._mutation_count = self._mutation_count
            return clone


def create_graph(schema: SchemaDef) -> PropertyGraph:
    """Empty graph bound to ``schema``; every later mutation is validated."""
    return PropertyGraph(schema)
