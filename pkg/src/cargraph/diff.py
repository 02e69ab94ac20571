"""Pairwise part-level comparison of two similarly discretized FE models.

The matcher runs in four stages: part-id matching (accepted only when the
element-id sets actually correspond), geometric fingerprint matching for
renumbered parts, element-containment detection of splits and merges, and
a new/deleted sweep for everything left. Matched pairs are then classified
from thickness, material id, and nodal displacement.

Loading a report produces the comparison segment of the car-graph:
SAME_AS edges for unchanged parts, CHANGED_TO edges plus Change nodes for
the rest, and Semantic container nodes for the multi-part side of splits
and merges. Change identity is the canonical change key, so the same
recurring change across many model pairs lands on one Change node whose
degree keeps growing.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .graph import Node, PropertyGraph
from .keyword import FEModel, part_node_id
from .schema import EL, NL

KIND_SAME = "same"
KIND_PROPERTY = "property_change"
KIND_GEOMETRY = "geometry_change"
KIND_NEW = "new"
KIND_DELETED = "deleted"
KIND_SPLIT = "split"
KIND_MERGE = "merge"

_MIRROR_KIND = {
    KIND_SAME: KIND_SAME,
    KIND_PROPERTY: KIND_PROPERTY,
    KIND_GEOMETRY: KIND_GEOMETRY,
    KIND_NEW: KIND_DELETED,
    KIND_DELETED: KIND_NEW,
    KIND_SPLIT: KIND_MERGE,
    KIND_MERGE: KIND_SPLIT,
}

#: displacement buckets used in geometry change keys, in mm
_GEO_BUCKETS = ((2.0, "0.5-2"), (10.0, "2-10"), (math.inf, ">10"))


@dataclass(frozen=True)
class Tolerances:
    geom: float = 0.5          # mm, max nodal displacement still counted as "same"
    centroid: float = 10.0     # mm, fingerprint matching radius
    bbox_rel: float = 0.05     # relative bounding-box diagonal deviation
    containment: float = 0.8   # element-id containment for pid/split/merge decisions


@dataclass
class DiffEntry:
    kind: str
    a_parts: list[int]
    b_parts: list[int]
    name: str = ""
    deltas: dict[str, object] = field(default_factory=dict)

    def mirrored(self) -> "DiffEntry":
        deltas: dict[str, object] = {}
        for key, value in self.deltas.items():
            if isinstance(value, tuple) and len(value) == 2:
                deltas[key] = (value[1], value[0])
            else:
                deltas[key] = value
        return DiffEntry(
            kind=_MIRROR_KIND[self.kind],
            a_parts=list(self.b_parts),
            b_parts=list(self.a_parts),
            name=self.name,
            deltas=deltas,
        )


@dataclass
class DiffReport:
    model_a: str
    model_b: str
    entries: list[DiffEntry] = field(default_factory=list)

    def mirrored(self) -> "DiffReport":
        return DiffReport(
            model_a=self.model_b,
            model_b=self.model_a,
            entries=sorted((e.mirrored() for e in self.entries), key=_entry_sort_key),
        )

    def kinds(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for entry in self.entries:
            counts[entry.kind] = counts.get(entry.kind, 0) + 1
        return counts

    def to_text(self) -> str:
        """One entry per line, stable order, for CI fixtures."""
        lines = [f"# diff {self.model_a} -> {self.model_b}"]
        for entry in self.entries:
            deltas = json.dumps(entry.deltas, sort_keys=True, default=list)
            lines.append(
                f"{entry.kind}\ta={entry.a_parts}\tb={entry.b_parts}"
                f"\tname={entry.name}\tdeltas={deltas}"
            )
        return "\n".join(lines) + "\n"


def _entry_sort_key(entry: DiffEntry) -> tuple:
    a = entry.a_parts[0] if entry.a_parts else math.inf
    b = entry.b_parts[0] if entry.b_parts else math.inf
    return (a, b, entry.kind)


# ---------------------------------------------------------------------------
# Matching
# ---------------------------------------------------------------------------

def _containment(eids_a: frozenset[int], eids_b: frozenset[int]) -> float:
    if not eids_a:
        return 1.0 if not eids_b else 0.0
    return len(eids_a & eids_b) / len(eids_a)


def _distance(p: tuple[float, float, float], q: tuple[float, float, float]) -> float:
    return math.dist(p, q)


def _bbox_diagonal(bbox: tuple[float, float, float, float, float, float]) -> float:
    return math.dist(bbox[:3], bbox[3:])


class _PartView:
    """Cached per-part geometry used by every matching stage."""

    def __init__(self, fem: FEModel, pid: int):
        self.pid = pid
        self.name = fem.parts[pid].name
        self.thickness = fem.part_thickness(pid)
        self.mid = fem.parts[pid].mid
        self.eids = frozenset(fem.part_element_ids(pid))
        self.nids = fem.part_node_ids(pid)
        self.centroid = fem.part_centroid(pid)
        self.bbox_diag = _bbox_diagonal(fem.part_bbox(pid))


def _fingerprint_compatible(a: _PartView, b: _PartView, tol: Tolerances) -> bool:
    ca, cb = len(a.eids), len(b.eids)
    if max(ca, cb) > 1.1 * min(ca, cb):
        return False
    if _distance(a.centroid, b.centroid) > tol.centroid:
        return False
    if abs(a.bbox_diag - b.bbox_diag) > tol.bbox_rel * max(a.bbox_diag, b.bbox_diag, 1e-12):
        return False
    return True


def _max_displacement(fem_a: FEModel, fem_b: FEModel, a: _PartView, b: _PartView) -> float:
    common = a.nids & b.nids
    if not common:
        # fully renumbered mesh: fall back to the centroid shift
        return _distance(a.centroid, b.centroid)
    worst = 0.0
    for nid in common:
        d = _distance(fem_a.mesh_nodes[nid], fem_b.mesh_nodes[nid])
        if d > worst:
            worst = d
    return worst


def _classify(fem_a: FEModel, fem_b: FEModel, a: _PartView, b: _PartView, tol: Tolerances) -> DiffEntry:
    deltas: dict[str, object] = {}
    if abs(a.thickness - b.thickness) > 1e-12:
        deltas["thickness"] = (a.thickness, b.thickness)
    if a.mid != b.mid:
        deltas["material"] = (a.mid, b.mid)
    displacement = _max_displacement(fem_a, fem_b, a, b)
    if displacement > tol.geom:
        deltas["max_node_displacement"] = displacement

    if not deltas:
        kind = KIND_SAME
    elif "thickness" in deltas or "material" in deltas:
        kind = KIND_PROPERTY  # geometry delta, if any, stays in the entry
    else:
        kind = KIND_GEOMETRY
    return DiffEntry(kind=kind, a_parts=[a.pid], b_parts=[b.pid], name=a.name, deltas=deltas)


def diff_models(fem_a: FEModel, fem_b: FEModel, tol: Tolerances | None = None) -> DiffReport:
    """Deterministic part-level diff; every part lands in exactly one entry."""
    tol = tol or Tolerances()
    views_a = {pid: _PartView(fem_a, pid) for pid in fem_a.parts}
    views_b = {pid: _PartView(fem_b, pid) for pid in fem_b.parts}

    unmatched_a = set(views_a)
    unmatched_b = set(views_b)
    matched: list[tuple[_PartView, _PartView]] = []

    # stage 1: same pid, accepted only when element ids mutually correspond
    for pid in sorted(unmatched_a & unmatched_b):
        a, b = views_a[pid], views_b[pid]
        if _containment(a.eids, b.eids) >= tol.containment and _containment(b.eids, a.eids) >= tol.containment:
            matched.append((a, b))
            unmatched_a.discard(pid)
            unmatched_b.discard(pid)

    # stage 2: geometric fingerprint for renumbered parts. The tie-break key
    # must not depend on the diff direction, or diff(a,b) and diff(b,a)
    # could match ambiguous pairs differently: distance first, then the pid
    # on the lexicographically smaller model's side.
    a_first = fem_a.model_id <= fem_b.model_id
    candidates: list[tuple[float, int, int, int, int]] = []
    for pa in sorted(unmatched_a):
        for pb in sorted(unmatched_b):
            a, b = views_a[pa], views_b[pb]
            if _fingerprint_compatible(a, b, tol):
                lo, hi = (pa, pb) if a_first else (pb, pa)
                candidates.append((_distance(a.centroid, b.centroid), lo, hi, pa, pb))
    candidates.sort()
    for _, _, _, pa, pb in candidates:
        if pa in unmatched_a and pb in unmatched_b:
            matched.append((views_a[pa], views_b[pb]))
            unmatched_a.discard(pa)
            unmatched_b.discard(pb)

    entries = [_classify(fem_a, fem_b, a, b, tol) for a, b in matched]

    # stage 3: splits and merges by element-id containment. Fan-outs are
    # processed in a direction-independent order (model id of the single
    # side, then its pid) so mirrored diffs consume parts identically.
    fanouts: list[tuple[str, int, str]] = []
    for pa in sorted(unmatched_a):
        fanouts.append((fem_a.model_id, pa, KIND_SPLIT))
    for pb in sorted(unmatched_b):
        fanouts.append((fem_b.model_id, pb, KIND_MERGE))
    fanouts.sort()

    for _, single_pid, kind in fanouts:
        if kind == KIND_SPLIT:
            if single_pid not in unmatched_a:
                continue
            single, pool, pool_views = views_a[single_pid], unmatched_b, views_b
        else:
            if single_pid not in unmatched_b:
                continue
            single, pool, pool_views = views_b[single_pid], unmatched_a, views_a
        if not single.eids:
            continue
        shares = [
            (pid, len(single.eids & pool_views[pid].eids))
            for pid in sorted(pool)
            if single.eids & pool_views[pid].eids
        ]
        if len(shares) < 2:
            continue
        coverage = sum(n for _, n in shares) / len(single.eids)
        if coverage < tol.containment:
            continue
        counterparts = [pid for pid, _ in shares]
        if kind == KIND_SPLIT:
            entries.append(
                DiffEntry(KIND_SPLIT, [single_pid], counterparts, name=single.name)
            )
            unmatched_a.discard(single_pid)
            unmatched_b.difference_update(counterparts)
        else:
            entries.append(
                DiffEntry(KIND_MERGE, counterparts, [single_pid], name=single.name)
            )
            unmatched_b.discard(single_pid)
            unmatched_a.difference_update(counterparts)

    # stage 4: whatever is left was removed or introduced
    for pa in sorted(unmatched_a):
        entries.append(DiffEntry(KIND_DELETED, [pa], [], name=views_a[pa].name))
    for pb in sorted(unmatched_b):
        entries.append(DiffEntry(KIND_NEW, [], [pb], name=views_b[pb].name))

    entries.sort(key=_entry_sort_key)
    return DiffReport(model_a=fem_a.model_id, model_b=fem_b.model_id, entries=entries)


# ---------------------------------------------------------------------------
# Change identity
# ---------------------------------------------------------------------------

def _sig3(value: float) -> str:
    return f"{value:.3g}"


def _geo_bucket(displacement: float) -> str:
    for upper, label in _GEO_BUCKETS:
        if displacement <= upper:
            return label
    raise AssertionError("unreachable")


def change_key(entry: DiffEntry) -> str:
    """Canonical identity of a non-`same` entry.

    Equal recurring changes across model pairs share a key, which maps
    them onto one Change node and raises its degree.
    """
    if entry.kind == KIND_SAME:
        raise ValueError("`same` entries have no change key")
    name = entry.name
    if entry.kind == KIND_NEW:
        return f"new:{name}"
    if entry.kind == KIND_DELETED:
        return f"del:{name}"
    if entry.kind == KIND_SPLIT:
        return f"split:{name}:{len(entry.b_parts)}"
    if entry.kind == KIND_MERGE:
        return f"merge:{name}:{len(entry.a_parts)}"

    segments: list[str] = []
    if "thickness" in entry.deltas:
        old, new = entry.deltas["thickness"]  # type: ignore[misc]
        segments.append(f"thk:{name}:{_sig3(old)}->{_sig3(new)}")
    if "material" in entry.deltas:
        old, new = entry.deltas["material"]  # type: ignore[misc]
        segments.append(f"mat:{name}:{old}->{new}")
    if "max_node_displacement" in entry.deltas:
        disp = float(entry.deltas["max_node_displacement"])  # type: ignore[arg-type]
        segments.append(f"geo:{name}:{_geo_bucket(disp)}")
    return "|".join(segments)


# ---------------------------------------------------------------------------
# Graph loading (segment: FE-model comparison)
# ---------------------------------------------------------------------------

def _canonical_pair(id_a: str, id_b: str) -> tuple[str, str]:
    return (id_a, id_b) if id_a <= id_b else (id_b, id_a)


def _ensure_edge(g: PropertyGraph, label: str, src: str, dst: str) -> None:
    if g.find_edge(label, src, dst) is None:
        g.add_edge(label, src, dst)


def load_diff(g: PropertyGraph, report: DiffReport) -> list[Node]:
    """Write a diff into the graph; repeated loads change nothing."""
    model_a = f"model:{report.model_a}"
    model_b = f"model:{report.model_b}"
    for model in (model_a, model_b):
        if not g.has_node(model):
            raise ValueError(f"model {model!r} not loaded")

    changes: list[Node] = []
    for entry in report.entries:
        a_ids = [part_node_id(report.model_a, pid) for pid in entry.a_parts]
        b_ids = [part_node_id(report.model_b, pid) for pid in entry.b_parts]

        if entry.kind == KIND_SAME:
            src, dst = _canonical_pair(a_ids[0], b_ids[0])
            _ensure_edge(g, EL.SAME_AS, src, dst)
            continue

        key = change_key(entry)
        change_id = f"change:{key}"
        if g.has_node(change_id):
            change = g.node(change_id)
        else:
            change = g.add_node(
                NL.CHANGE,
                change_id,
                {
                    "key": key,
                    "kind": entry.kind,
                    "deltas": json.dumps(entry.deltas, sort_keys=True, default=list),
                },
            )
        changes.append(change)
        _ensure_edge(g, EL.CHG_MODELS, change.id, model_a)
        _ensure_edge(g, EL.CHG_MODELS, change.id, model_b)

        if entry.kind in (KIND_SPLIT, KIND_MERGE):
            multi_ids = b_ids if entry.kind == KIND_SPLIT else a_ids
            single_ids = a_ids if entry.kind == KIND_SPLIT else b_ids
            primary = entry.a_parts[0] if entry.kind == KIND_SPLIT else entry.b_parts[0]
            sem_id = f"sem:{report.model_a}->{report.model_b}:{entry.kind}:{primary}"
            if not g.has_node(sem_id):
                g.add_node(NL.SEMANTIC, sem_id, {"kind": entry.kind})
            for part in multi_ids:
                _ensure_edge(g, EL.SEM_PART, sem_id, part)
            for part in single_ids:
                _ensure_edge(g, EL.CHG, change.id, part)
            _ensure_edge(g, EL.CHG, change.id, sem_id)
        else:
            for part in a_ids + b_ids:
                _ensure_edge(g, EL.CHG, change.id, part)

        # matched non-same pairs; splits fan out, merges fan in
        for a_part in a_ids:
            for b_part in b_ids:
                _ensure_edge(g, EL.CHANGED_TO, a_part, b_part)

    return changes
