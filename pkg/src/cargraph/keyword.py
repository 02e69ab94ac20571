"""Keyword-file (solver input deck) parsing and part-level graph loading.

Dialect, bit-exact:

* a line starting with ``$`` is a comment
* a keyword line starts with ``*``; supported keywords are ``*NODE``,
  ``*ELEMENT_SHELL``, ``*PART``, ``*SECTION_SHELL``, ``*MAT``,
  ``*CONSTRAINED_SPOTWELD``, ``*INCLUDE`` and ``*END``
* data lines are comma-separated fields
* ``*PART`` uses two data lines per part: the name, then ``pid,secid,mid``
* ``*INCLUDE`` data lines are paths resolved relative to the including file

Parsing is a single streaming pass; referential checks run once at the end
with the line numbers where each entity was defined. The graph loader keeps
the semantic resolution at the part level: mesh nodes and elements stay in
the FEModel and are never loaded individually.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, NamedTuple

from .graph import Node, PropertyGraph
from .schema import EL, NL

log = logging.getLogger(__name__)

KEYWORDS = (
    "*NODE",
    "*ELEMENT_SHELL",
    "*PART",
    "*SECTION_SHELL",
    "*MAT",
    "*CONSTRAINED_SPOTWELD",
    "*INCLUDE",
    "*END",
)

CONNECTIVITY_SHARED_NODES = "shared_nodes"
CONNECTIVITY_SPOTWELD = "spotweld"


class KeywordError(Exception):
    """Parse or validation failure, carrying the offending line number."""

    def __init__(self, message: str, lineno: int | None = None, filename: str | None = None):
        self.lineno = lineno
        self.filename = filename
        where = ""
        if filename is not None:
            where += filename
        if lineno is not None:
            where += f":{lineno}"
        super().__init__(f"{where}: {message}" if where else message)


class Shell(NamedTuple):
    pid: int
    nodes: tuple[int, int, int, int]


class PartDef(NamedTuple):
    name: str
    secid: int
    mid: int


class Section(NamedTuple):
    thickness: float


class Material(NamedTuple):
    density: float
    yield_strength: float


@dataclass
class Metadata:
    """Sidecar fields describing a model's place in the development process."""

    model_id: str
    veh_id: str
    discipline: str = "safety"
    parent_model_id: str | None = None
    pltf_part_ids: list[int] = field(default_factory=list)
    ubdy_part_ids: list[int] = field(default_factory=list)
    timestamp: str = ""

    def validate(self) -> None:
        overlap = set(self.pltf_part_ids) & set(self.ubdy_part_ids)
        if overlap:
            raise ValueError(f"part ids in both platform and upper-body lists: {sorted(overlap)}")

    @classmethod
    def from_json(cls, data: bytes | str) -> "Metadata":
        raw = json.loads(data)
        meta = cls(
            model_id=raw["model_id"],
            veh_id=raw["veh_id"],
            discipline=raw.get("discipline", "safety"),
            parent_model_id=raw.get("parent_model_id"),
            pltf_part_ids=[int(p) for p in raw.get("pltf_part_ids", [])],
            ubdy_part_ids=[int(p) for p in raw.get("ubdy_part_ids", [])],
            timestamp=raw.get("timestamp", ""),
        )
        meta.validate()
        return meta

    def to_json(self) -> str:
        raw = {
            "model_id": self.model_id,
            "veh_id": self.veh_id,
            "discipline": self.discipline,
            "pltf_part_ids": self.pltf_part_ids,
            "ubdy_part_ids": self.ubdy_part_ids,
            "timestamp": self.timestamp,
        }
        if self.parent_model_id is not None:
            raw["parent_model_id"] = self.parent_model_id
        return json.dumps(raw, indent=2, sort_keys=True)


@dataclass
class FEModel:
    """Parsed keyword-file content at full mesh resolution."""

    model_id: str
    mesh_nodes: dict[int, tuple[float, float, float]] = field(default_factory=dict)
    elements: dict[int, Shell] = field(default_factory=dict)
    parts: dict[int, PartDef] = field(default_factory=dict)
    sections: dict[int, Section] = field(default_factory=dict)
    materials: dict[int, Material] = field(default_factory=dict)
    spotwelds: list[tuple[int, int]] = field(default_factory=list)
    meta: Metadata | None = None

    def part_element_ids(self, pid: int) -> list[int]:
        return sorted(eid for eid, shell in self.elements.items() if shell.pid == pid)

    def part_node_ids(self, pid: int) -> set[int]:
        nids: set[int] = set()
        for shell in self.elements.values():
            if shell.pid == pid:
                nids.update(shell.nodes)
        return nids

    def part_thickness(self, pid: int) -> float:
        return self.sections[self.parts[pid].secid].thickness

    def part_centroid(self, pid: int) -> tuple[float, float, float]:
        """Mean coordinate of the distinct mesh nodes the part references."""
        nids = sorted(self.part_node_ids(pid))
        if not nids:
            return (0.0, 0.0, 0.0)
        sx = sy = sz = 0.0
        for nid in nids:
            x, y, z = self.mesh_nodes[nid]
            sx += x
            sy += y
            sz += z
        n = len(nids)
        return (sx / n, sy / n, sz / n)

    def part_bbox(self, pid: int) -> tuple[float, float, float, float, float, float]:
        nids = self.part_node_ids(pid)
        if not nids:
            return (0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
        xs, ys, zs = zip(*(self.mesh_nodes[n] for n in nids))
        return (min(xs), min(ys), min(zs), max(xs), max(ys), max(zs))

    def equivalent(self, other: "FEModel") -> bool:
        """Content equality over everything the keyword file defines."""
        return (
            self.mesh_nodes == other.mesh_nodes
            and self.elements == other.elements
            and self.parts == other.parts
            and self.sections == other.sections
            and self.materials == other.materials
            and sorted(self.spotwelds) == sorted(other.spotwelds)
        )


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

class _ParseState:
    def __init__(self, model_id: str):
        self.fem = FEModel(model_id=model_id)
        # line numbers for post-parse referential error reporting
        self.element_lines: dict[int, tuple[str, int]] = {}
        self.part_lines: dict[int, tuple[str, int]] = {}
        self.weld_lines: list[tuple[str, int]] = []


def _iter_lines(text: str) -> Iterator[tuple[int, str]]:
    for lineno, line in enumerate(text.splitlines(), start=1):
        yield lineno, line.rstrip("\r\n")


def parse_keyword_file(
    source: bytes | str | Path, model_id: str | None = None
) -> FEModel:
    """Parse a keyword file (path, text, or bytes) into a validated FEModel.

    When ``source`` is a path, ``*INCLUDE`` cards are resolved relative to
    it and the model id defaults to the file stem. Bytes/text input cannot
    contain includes.
    """
    if isinstance(source, Path):
        path = source.resolve()
        text = path.read_text(encoding="utf-8")
        state = _ParseState(model_id or path.stem)
        _parse_text(state, text, path.name, path.parent, frozenset({str(path)}))
    else:
        if isinstance(source, bytes):
            text = source.decode("utf-8")
        else:
            text = source
        state = _ParseState(model_id or "model")
        _parse_text(state, text, "<memory>", None, frozenset())
    _validate_references(state)
    return state.fem


def _parse_text(
    state: _ParseState,
    text: str,
    filename: str,
    base_dir: Path | None,
    in_progress: frozenset[str],
) -> None:
    fem = state.fem
    keyword: str | None = None
    pending_part_name: str | None = None

    for lineno, line in _iter_lines(text):
        stripped = line.strip()
        if not stripped or stripped.startswith("$"):
            continue
        if stripped.startswith("*"):
            upper = stripped.upper()
            if upper == "*END":
                break
            if upper not in KEYWORDS:
                raise KeywordError(f"unknown keyword {stripped!r}", lineno, filename)
            if keyword == "*PART" and pending_part_name is not None:
                raise KeywordError("part name line without id line", lineno, filename)
            keyword = upper
            pending_part_name = None
            continue
        if keyword is None:
            raise KeywordError(f"data line before any keyword: {stripped!r}", lineno, filename)

        if keyword == "*NODE":
            fields = stripped.split(",")
            if len(fields) != 4:
                raise KeywordError(f"node card needs nid,x,y,z: {stripped!r}", lineno, filename)
            nid = _parse_int(fields[0], lineno, filename)
            if nid in fem.mesh_nodes:
                raise KeywordError(f"duplicate node id {nid}", lineno, filename)
            fem.mesh_nodes[nid] = (
                _parse_float(fields[1], lineno, filename),
                _parse_float(fields[2], lineno, filename),
                _parse_float(fields[3], lineno, filename),
            )
        elif keyword == "*ELEMENT_SHELL":
            fields = stripped.split(",")
            if len(fields) != 6:
                raise KeywordError(
                    f"shell card needs eid,pid,n1,n2,n3,n4: {stripped!r}", lineno, filename
                )
            eid = _parse_int(fields[0], lineno, filename)
            if eid in fem.elements:
                raise KeywordError(f"duplicate element id {eid}", lineno, filename)
            fem.elements[eid] = Shell(
                pid=_parse_int(fields[1], lineno, filename),
                nodes=(
                    _parse_int(fields[2], lineno, filename),
                    _parse_int(fields[3], lineno, filename),
                    _parse_int(fields[4], lineno, filename),
                    _parse_int(fields[5], lineno, filename),
                ),
            )
            state.element_lines[eid] = (filename, lineno)
        elif keyword == "*PART":
            if pending_part_name is None:
                pending_part_name = stripped
                continue
            fields = stripped.split(",")
            if len(fields) != 3:
                raise KeywordError(f"part id line needs pid,secid,mid: {stripped!r}", lineno, filename)
            pid = _parse_int(fields[0], lineno, filename)
            if pid in fem.parts:
                raise KeywordError(f"duplicate part id {pid}", lineno, filename)
            fem.parts[pid] = PartDef(
                name=pending_part_name,
                secid=_parse_int(fields[1], lineno, filename),
                mid=_parse_int(fields[2], lineno, filename),
            )
            state.part_lines[pid] = (filename, lineno)
            pending_part_name = None
        elif keyword == "*SECTION_SHELL":
            fields = stripped.split(",")
            if len(fields) != 2:
                raise KeywordError(f"section card needs secid,thickness: {stripped!r}", lineno, filename)
            secid = _parse_int(fields[0], lineno, filename)
            if secid in fem.sections:
                raise KeywordError(f"duplicate section id {secid}", lineno, filename)
            fem.sections[secid] = Section(thickness=_parse_float(fields[1], lineno, filename))
        elif keyword == "*MAT":
            fields = stripped.split(",")
            if len(fields) != 3:
                raise KeywordError(f"material card needs mid,density,yield: {stripped!r}", lineno, filename)
            mid = _parse_int(fields[0], lineno, filename)
            if mid in fem.materials:
                raise KeywordError(f"duplicate material id {mid}", lineno, filename)
            fem.materials[mid] = Material(
                density=_parse_float(fields[1], lineno, filename),
                yield_strength=_parse_float(fields[2], lineno, filename),
            )
        elif keyword == "*CONSTRAINED_SPOTWELD":
            fields = stripped.split(",")
            if len(fields) != 2:
                raise KeywordError(f"spotweld card needs nid_a,nid_b: {stripped!r}", lineno, filename)
            fem.spotwelds.append(
                (_parse_int(fields[0], lineno, filename), _parse_int(fields[1], lineno, filename))
            )
            state.weld_lines.append((filename, lineno))
        elif keyword == "*INCLUDE":
            if base_dir is None:
                raise KeywordError("*INCLUDE needs a file-based parse", lineno, filename)
            target = (base_dir / stripped).resolve()
            if str(target) in in_progress:
                raise KeywordError(f"include cycle through {target.name!r}", lineno, filename)
            try:
                sub_text = target.read_text(encoding="utf-8")
            except OSError as exc:
                raise KeywordError(f"cannot read include {stripped!r}: {exc}", lineno, filename)
            _parse_text(
                state, sub_text, target.name, target.parent, in_progress | {str(target)}
            )

    if pending_part_name is not None:
        raise KeywordError("part name line without id line at end of file", None, filename)


def _parse_int(text: str, lineno: int, filename: str) -> int:
    try:
        return int(text.strip())
    except ValueError:
        raise KeywordError(f"malformed integer field {text.strip()!r}", lineno, filename) from None


def _parse_float(text: str, lineno: int, filename: str) -> float:
    try:
        return float(text.strip())
    except ValueError:
        raise KeywordError(f"malformed numeric field {text.strip()!r}", lineno, filename) from None


def _validate_references(state: _ParseState) -> None:
    fem = state.fem
    for eid, shell in fem.elements.items():
        where = state.element_lines.get(eid, ("<memory>", 0))
        if shell.pid not in fem.parts:
            raise KeywordError(f"element {eid} references undefined part {shell.pid}", where[1], where[0])
        for nid in shell.nodes:
            if nid not in fem.mesh_nodes:
                raise KeywordError(f"element {eid} references undefined node {nid}", where[1], where[0])
    for pid, part in fem.parts.items():
        where = state.part_lines.get(pid, ("<memory>", 0))
        if part.secid not in fem.sections:
            raise KeywordError(f"part {pid} references undefined section {part.secid}", where[1], where[0])
        if part.mid not in fem.materials:
            raise KeywordError(f"part {pid} references undefined material {part.mid}", where[1], where[0])
    for (na, nb), where in zip(fem.spotwelds, state.weld_lines):
        for nid in (na, nb):
            if nid not in fem.mesh_nodes:
                raise KeywordError(f"spotweld references undefined node {nid}", where[1], where[0])


# ---------------------------------------------------------------------------
# Canonical serialization (parse -> serialize -> parse is a fixpoint)
# ---------------------------------------------------------------------------

def serialize_keyword_file(fem: FEModel) -> str:
    lines: list[str] = []
    if fem.mesh_nodes:
        lines.append("*NODE")
        for nid in sorted(fem.mesh_nodes):
            x, y, z = fem.mesh_nodes[nid]
            lines.append(f"{nid},{x!r},{y!r},{z!r}")
    if fem.elements:
        lines.append("*ELEMENT_SHELL")
        for eid in sorted(fem.elements):
            shell = fem.elements[eid]
            n1, n2, n3, n4 = shell.nodes
            lines.append(f"{eid},{shell.pid},{n1},{n2},{n3},{n4}")
    for pid in sorted(fem.parts):
        part = fem.parts[pid]
        lines.append("*PART")
        lines.append(part.name)
        lines.append(f"{pid},{part.secid},{part.mid}")
    if fem.sections:
        lines.append("*SECTION_SHELL")
        for secid in sorted(fem.sections):
            lines.append(f"{secid},{fem.sections[secid].thickness!r}")
    if fem.materials:
        lines.append("*MAT")
        for mid in sorted(fem.materials):
            mat = fem.materials[mid]
            lines.append(f"{mid},{mat.density!r},{mat.yield_strength!r}")
    if fem.spotwelds:
        lines.append("*CONSTRAINED_SPOTWELD")
        for na, nb in sorted(fem.spotwelds):
            lines.append(f"{na},{nb}")
    lines.append("*END")
    return "\n".join(lines) + "\n"


def load_metadata_sidecar(keyword_path: Path) -> Metadata:
    """Read ``<model>.meta.json`` next to a keyword file."""
    sidecar = keyword_path.with_suffix(".meta.json")
    meta = Metadata.from_json(sidecar.read_text(encoding="utf-8"))
    return meta


def parse_model(keyword_path: Path) -> FEModel:
    """Parse keyword file plus its metadata sidecar."""
    fem = parse_keyword_file(keyword_path)
    meta = load_metadata_sidecar(keyword_path)
    if meta.model_id != fem.model_id:
        fem.model_id = meta.model_id
    fem.meta = meta
    return fem


# ---------------------------------------------------------------------------
# Part connectivity
# ---------------------------------------------------------------------------

def part_connectivity(fem: FEModel) -> list[tuple[int, int, str]]:
    """Neighbor pairs ``(pid_a, pid_b, type)`` with ``pid_a < pid_b``.

    ``shared_nodes`` when the parts' element node sets intersect,
    ``spotweld`` when a weld joins one node of each part. A pair can
    appear once per type.
    """
    node_parts: dict[int, set[int]] = {}
    for shell in fem.elements.values():
        for nid in shell.nodes:
            node_parts.setdefault(nid, set()).add(shell.pid)

    pairs: set[tuple[int, int, str]] = set()
    for owners in node_parts.values():
        if len(owners) > 1:
            ordered = sorted(owners)
            for i, a in enumerate(ordered):
                for b in ordered[i + 1 :]:
                    pairs.add((a, b, CONNECTIVITY_SHARED_NODES))

    for na, nb in fem.spotwelds:
        for pa in node_parts.get(na, ()):  # welds between parts, not within
            for pb in node_parts.get(nb, ()):
                if pa != pb:
                    pairs.add((min(pa, pb), max(pa, pb), CONNECTIVITY_SPOTWELD))

    return sorted(pairs)


# ---------------------------------------------------------------------------
# Graph loading (segment: FE-model input)
# ---------------------------------------------------------------------------

def veh_node_id(veh_id: str) -> str:
    return f"veh:{veh_id}"


def model_node_id(model_id: str) -> str:
    return f"model:{model_id}"


def part_node_id(model_id: str, pid: int) -> str:
    # parts are per-model entities; diffs relate them across models
    return f"part:{model_id}/{pid}"


def _ensure_node(g: PropertyGraph, label: str, node_id: str, props: dict) -> Node:
    if g.has_node(node_id):
        return g.set_node_props(node_id, props) if props else g.node(node_id)
    return g.add_node(label, node_id, props)


def _ensure_edge(g: PropertyGraph, label: str, src: str, dst: str, weight=None, props=None):
    existing = g.find_edge(label, src, dst)
    if existing is not None:
        if weight is not None:
            existing.weight = float(weight)
        if props:
            existing.props.update(props)
        return existing
    return g.add_edge(label, src, dst, weight, props)


def load_model(g: PropertyGraph, fem: FEModel) -> Node:
    """Load an FEModel at part resolution; idempotent for repeated calls."""
    meta = fem.meta
    if meta is None:
        raise ValueError(f"model {fem.model_id!r} has no metadata sidecar")
    meta.validate()

    veh_id = veh_node_id(meta.veh_id)
    if g.has_node(veh_id):
        veh = g.node(veh_id)
    else:
        veh = g.add_node(NL.VEH, veh_id, {"name": meta.veh_id, "on_market": False})

    model = _ensure_node(
        g,
        NL.MODEL,
        model_node_id(fem.model_id),
        {
            "model_id": fem.model_id,
            "discipline": meta.discipline,
            "timestamp": meta.timestamp,
            "n_parts": len(fem.parts),
            "n_elements": len(fem.elements),
            "n_mesh_nodes": len(fem.mesh_nodes),
        },
    )
    _ensure_edge(g, EL.MODEL_OF, model.id, veh.id)

    if meta.discipline:
        attr = _ensure_node(g, NL.ATTR, f"attr:{meta.discipline}", {"name": meta.discipline})
        _ensure_edge(g, EL.HAS_ATTR, veh.id, attr.id)

    part_ids: dict[int, str] = {}
    for pid in sorted(fem.parts):
        part = fem.parts[pid]
        node_id = part_node_id(fem.model_id, pid)
        part_ids[pid] = node_id
        _ensure_node(
            g,
            NL.PART,
            node_id,
            {
                "pid": pid,
                "name": part.name,
                "thickness": fem.part_thickness(pid),
                "material_id": part.mid,
                "n_elements": len(fem.part_element_ids(pid)),
                "centroid": list(fem.part_centroid(pid)),
                "bbox": list(fem.part_bbox(pid)),
            },
        )
        _ensure_edge(g, EL.HAS_PART, model.id, node_id)

    for pid_a, pid_b, kind in part_connectivity(fem):
        edge = g.find_edge(EL.CON, part_ids[pid_a], part_ids[pid_b])
        if edge is None:
            g.add_edge(EL.CON, part_ids[pid_a], part_ids[pid_b], props={"types": [kind]})
        else:
            types = set(edge.props.get("types", []))  # type: ignore[arg-type]
            types.add(kind)
            edge.props["types"] = sorted(types)

    if meta.pltf_part_ids:
        pltf = _ensure_node(g, NL.PLTF, f"pltf:{meta.veh_id}", {"veh_id": meta.veh_id})
        _ensure_edge(g, EL.HAS_PLTF, veh.id, pltf.id)
        for pid in meta.pltf_part_ids:
            if pid not in part_ids:
                raise ValueError(f"platform part id {pid} not in model {fem.model_id!r}")
            _ensure_edge(g, EL.PART_ROLE, part_ids[pid], pltf.id)
    if meta.ubdy_part_ids:
        ubdy = _ensure_node(g, NL.UBDY, f"ubdy:{meta.veh_id}", {"veh_id": meta.veh_id})
        _ensure_edge(g, EL.HAS_UBDY, veh.id, ubdy.id)
        for pid in meta.ubdy_part_ids:
            if pid not in part_ids:
                raise ValueError(f"upper-body part id {pid} not in model {fem.model_id!r}")
            _ensure_edge(g, EL.PART_ROLE, part_ids[pid], ubdy.id)

    if meta.parent_model_id:
        parent_id = model_node_id(meta.parent_model_id)
        if not g.has_node(parent_id):
            log.warning("parent model %s not loaded yet; creating stub", meta.parent_model_id)
            g.add_node(NL.MODEL, parent_id, {"model_id": meta.parent_model_id})
        _ensure_edge(g, EL.MODEL_REF, model.id, parent_id)

    return model
