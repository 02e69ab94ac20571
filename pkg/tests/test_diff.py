"""Model diffing: ground-truth fixtures, mirror symmetry, oracle equivalence."""

from __future__ import annotations

import math
import random

import pytest

from cargraph.demo import (
    build_baseline_model,
    clone_model,
    model_metadata,
    with_split_part,
    with_thickness,
    with_translated_part,
    without_part,
    _add_grid_part,
)
from cargraph.diff import (
    DiffEntry,
    DiffReport,
    KIND_DELETED,
    KIND_GEOMETRY,
    KIND_MERGE,
    KIND_NEW,
    KIND_PROPERTY,
    KIND_SAME,
    KIND_SPLIT,
    Tolerances,
    change_key,
    diff_models,
    load_diff,
)
from cargraph.keyword import FEModel, load_model
from cargraph.schema import EL, NL


def baseline(model_id="a"):
    return build_baseline_model(model_id)


def make_thickness_pair():
    a = baseline("a")
    a = with_thickness(a, 2, 1.0)
    b = with_thickness(clone_model(a, "b"), 2, 1.2)
    return a, b


def make_geometry_pair(delta=3.1):
    a = baseline("a")
    b = with_translated_part(clone_model(a, "b"), 4, (delta, 0.0, 0.0))
    return a, b


def make_new_deleted_pair():
    a = baseline("a")
    b = without_part(clone_model(a, "b"), 6)
    _add_grid_part(b, 8, "skid-plate", 2.2, 1, (100.0, -50.0, -100.0), 2, 2)
    return a, b


def make_split_pair():
    a = baseline("a")
    b = with_split_part(clone_model(a, "b"), 3, 7, "crossmember-right")
    return a, b


def kinds_by_part(report: DiffReport) -> dict[tuple[str, int], str]:
    out: dict[tuple[str, int], str] = {}
    for entry in report.entries:
        for pid in entry.a_parts:
            out[("a", pid)] = entry.kind
        for pid in entry.b_parts:
            out[("b", pid)] = entry.kind
    return out


# ---------------------------------------------------------------------------
# ground truth fixtures
# ---------------------------------------------------------------------------

def test_identity_diff_all_same():
    m = baseline("m")
    report = diff_models(m, m)
    assert {e.kind for e in report.entries} == {KIND_SAME}
    assert len(report.entries) == len(m.parts)
    assert all(e.deltas == {} for e in report.entries)


def test_thickness_change():
    a, b = make_thickness_pair()
    report = diff_models(a, b)
    changed = [e for e in report.entries if e.kind != KIND_SAME]
    assert len(changed) == 1
    entry = changed[0]
    assert entry.kind == KIND_PROPERTY
    assert entry.a_parts == [2] and entry.b_parts == [2]
    assert entry.deltas["thickness"] == (1.0, 1.2)
    assert len([e for e in report.entries if e.kind == KIND_SAME]) == len(a.parts) - 1


def test_geometry_change_3_1_mm():
    a, b = make_geometry_pair(3.1)
    report = diff_models(a, b)
    changed = [e for e in report.entries if e.kind != KIND_SAME]
    assert len(changed) == 1
    entry = changed[0]
    assert entry.kind == KIND_GEOMETRY
    assert entry.a_parts == [4]
    assert entry.deltas["max_node_displacement"] == pytest.approx(3.1, abs=1e-9)


def test_geometry_below_tolerance_is_same():
    a, b = make_geometry_pair(0.4)  # below the 0.5 mm default
    report = diff_models(a, b)
    assert {e.kind for e in report.entries} == {KIND_SAME}


def test_new_and_deleted():
    a, b = make_new_deleted_pair()
    report = diff_models(a, b)
    by_kind = report.kinds()
    assert by_kind[KIND_DELETED] == 1
    assert by_kind[KIND_NEW] == 1
    assert by_kind[KIND_SAME] == len(a.parts) - 1
    deleted = next(e for e in report.entries if e.kind == KIND_DELETED)
    assert deleted.a_parts == [6] and deleted.b_parts == []
    new = next(e for e in report.entries if e.kind == KIND_NEW)
    assert new.a_parts == [] and new.b_parts == [8]


def test_split():
    a, b = make_split_pair()
    report = diff_models(a, b)
    splits = [e for e in report.entries if e.kind == KIND_SPLIT]
    assert len(splits) == 1
    assert splits[0].a_parts == [3]
    assert sorted(splits[0].b_parts) == [3, 7]
    assert report.kinds()[KIND_SAME] == len(a.parts) - 1


def test_property_and_geometry_in_one_entry():
    a, b = make_thickness_pair()
    b = with_translated_part(b, 2, (4.0, 0.0, 0.0))
    report = diff_models(a, b)
    entry = next(e for e in report.entries if e.kind != KIND_SAME)
    assert entry.kind == KIND_PROPERTY
    assert "thickness" in entry.deltas
    assert entry.deltas["max_node_displacement"] == pytest.approx(4.0, abs=1e-9)


# ---------------------------------------------------------------------------
# mirror symmetry
# ---------------------------------------------------------------------------

@pytest.mark.parametrize(
    "maker",
    [make_thickness_pair, make_geometry_pair, make_new_deleted_pair, make_split_pair],
)
def test_mirror_symmetry(maker):
    a, b = maker()
    forward = diff_models(a, b)
    backward = diff_models(b, a)
    assert forward.mirrored() == backward


# ---------------------------------------------------------------------------
# partition property + oracle equivalence on randomized fixtures
# ---------------------------------------------------------------------------

def random_variant(seed: int) -> tuple[FEModel, FEModel]:
    rng = random.Random(seed)
    a = baseline("a")
    b = clone_model(a, "b")
    for pid in list(b.parts):
        roll = rng.random()
        if roll < 0.25:
            with_thickness(b, pid, round(b.part_thickness(pid) + rng.choice([0.2, 0.5]), 3))
        elif roll < 0.45:
            with_translated_part(b, pid, (rng.uniform(0.6, 8.0), 0.0, 0.0))
        elif roll < 0.55 and len(b.part_element_ids(pid)) >= 2:
            with_split_part(b, pid, pid + 10, f"{b.parts[pid].name}-right")
        elif roll < 0.65:
            without_part(b, pid)
    if rng.random() < 0.5:
        _add_grid_part(b, 9, "brace", 1.1, 1, (900.0, 900.0, 0.0), 2, 1)
    return a, b


@pytest.mark.parametrize("seed", range(8))
def test_partition_property(seed):
    a, b = random_variant(seed)
    report = diff_models(a, b)
    a_seen = [pid for e in report.entries for pid in e.a_parts]
    b_seen = [pid for e in report.entries for pid in e.b_parts]
    assert sorted(a_seen) == sorted(a.parts)
    assert sorted(b_seen) == sorted(b.parts)
    assert len(a_seen) == len(set(a_seen))
    assert len(b_seen) == len(set(b_seen))


@pytest.mark.parametrize("seed", range(8))
def test_mirror_on_random_fixtures(seed):
    a, b = random_variant(seed)
    assert diff_models(a, b).mirrored() == diff_models(b, a)


def brute_force_classification(a: FEModel, b: FEModel, tol: Tolerances) -> dict:
    """All-pairs matcher with no pid shortcut, reimplemented from scratch."""
    def eids(fem, pid):
        return {e for e, s in fem.elements.items() if s.pid == pid}

    def nids(fem, pid):
        out = set()
        for s in fem.elements.values():
            if s.pid == pid:
                out.update(s.nodes)
        return out

    def centroid(fem, pid):
        pts = [fem.mesh_nodes[n] for n in nids(fem, pid)]
        return tuple(sum(p[k] for p in pts) / len(pts) for k in range(3))

    def diag(fem, pid):
        pts = [fem.mesh_nodes[n] for n in nids(fem, pid)]
        lo = [min(p[k] for p in pts) for k in range(3)]
        hi = [max(p[k] for p in pts) for k in range(3)]
        return math.dist(lo, hi)

    pairs = []
    for pa in a.parts:
        for pb in b.parts:
            ca, cb = len(eids(a, pa)), len(eids(b, pb))
            if max(ca, cb) > 1.1 * min(ca, cb):
                continue
            d = math.dist(centroid(a, pa), centroid(b, pb))
            if d > tol.centroid:
                continue
            da, db = diag(a, pa), diag(b, pb)
            if abs(da - db) > tol.bbox_rel * max(da, db, 1e-12):
                continue
            pairs.append((d, min(pa, pb), max(pa, pb), pa, pb))
    pairs.sort()

    la, lb = set(a.parts), set(b.parts)
    classification: dict[tuple[str, int], str] = {}
    for _, _, _, pa, pb in pairs:
        if pa not in la or pb not in lb:
            continue
        la.discard(pa)
        lb.discard(pb)
        deltas = {}
        if abs(a.part_thickness(pa) - b.part_thickness(pb)) > 1e-12:
            deltas["thickness"] = True
        if a.parts[pa].mid != b.parts[pb].mid:
            deltas["material"] = True
        common = nids(a, pa) & nids(b, pb)
        if common:
            disp = max(math.dist(a.mesh_nodes[n], b.mesh_nodes[n]) for n in common)
        else:
            disp = math.dist(centroid(a, pa), centroid(b, pb))
        if deltas:
            kind = KIND_PROPERTY
        elif disp > tol.geom:
            kind = KIND_GEOMETRY
        else:
            kind = KIND_SAME
        classification[("a", pa)] = kind
        classification[("b", pb)] = kind

    for pa in sorted(la):
        owners = {b.elements[e].pid for e in eids(a, pa) if e in b.elements}
        owners &= lb
        covered = sum(1 for e in eids(a, pa) if e in b.elements and b.elements[e].pid in owners)
        if len(owners) >= 2 and covered / max(len(eids(a, pa)), 1) >= tol.containment:
            classification[("a", pa)] = KIND_SPLIT
            la.discard(pa)
            for pb in owners:
                classification[("b", pb)] = KIND_SPLIT
                lb.discard(pb)
    for pb in sorted(lb):
        owners = {a.elements[e].pid for e in eids(b, pb) if e in a.elements}
        owners &= la
        covered = sum(1 for e in eids(b, pb) if e in a.elements and a.elements[e].pid in owners)
        if len(owners) >= 2 and covered / max(len(eids(b, pb)), 1) >= tol.containment:
            classification[("b", pb)] = KIND_MERGE
            lb.discard(pb)
            for pa in owners:
                classification[("a", pa)] = KIND_MERGE
                la.discard(pa)

    for pa in la:
        classification[("a", pa)] = KIND_DELETED
    for pb in lb:
        classification[("b", pb)] = KIND_NEW
    return classification


@pytest.mark.parametrize(
    "maker",
    [make_thickness_pair, make_geometry_pair, make_new_deleted_pair, make_split_pair],
)
def test_oracle_equivalence_fixtures(maker):
    a, b = maker()
    tol = Tolerances()
    assert kinds_by_part(diff_models(a, b, tol)) == brute_force_classification(a, b, tol)


@pytest.mark.parametrize("seed", range(8))
def test_oracle_equivalence_random(seed):
    a, b = random_variant(seed)
    tol = Tolerances()
    assert kinds_by_part(diff_models(a, b, tol)) == brute_force_classification(a, b, tol)


# ---------------------------------------------------------------------------
# change keys
# ---------------------------------------------------------------------------

def test_change_key_recurring_equal():
    e1 = DiffEntry(KIND_PROPERTY, [2], [2], name="b-pillar", deltas={"thickness": (1.0, 1.2)})
    e2 = DiffEntry(KIND_PROPERTY, [5], [5], name="b-pillar", deltas={"thickness": (1.0, 1.2)})
    assert change_key(e1) == change_key(e2) == "thk:b-pillar:1->1.2"


def test_change_key_differs_on_target_value():
    e1 = DiffEntry(KIND_PROPERTY, [2], [2], name="b-pillar", deltas={"thickness": (1.0, 1.2)})
    e2 = DiffEntry(KIND_PROPERTY, [2], [2], name="b-pillar", deltas={"thickness": (1.0, 1.3)})
    assert change_key(e1) != change_key(e2)


def test_change_key_geometry_bucket():
    a = baseline("a")
    b = with_translated_part(clone_model(a, "b"), 2, (3.1, 0.0, 0.0))
    report = diff_models(a, b)
    entry = next(e for e in report.entries if e.kind == KIND_GEOMETRY)
    assert change_key(entry) == "geo:b-pillar:2-10"


def test_change_key_rejects_same():
    with pytest.raises(ValueError):
        change_key(DiffEntry(KIND_SAME, [1], [1], name="x"))


# ---------------------------------------------------------------------------
# graph loading
# ---------------------------------------------------------------------------

def load_pair(g, a, b):
    for fem in (a, b):
        fem.meta = model_metadata("m1")
        fem.meta.model_id = fem.model_id
        fem.meta.parent_model_id = None
        if 6 not in fem.parts:
            fem.meta.ubdy_part_ids = [2]
        load_model(g, fem)


def test_load_all_same_report(car_graph):
    m = baseline("m")
    m2 = clone_model(m, "m2")
    load_pair(car_graph, m, m2)
    report = diff_models(m, m2)
    changes = load_diff(car_graph, report)
    assert changes == []
    assert len(car_graph.edges(EL.SAME_AS)) == len(m.parts)
    assert car_graph.nodes(NL.CHANGE) == []


def test_load_thickness_report(car_graph):
    a, b = make_thickness_pair()
    load_pair(car_graph, a, b)
    report = diff_models(a, b)
    changes = load_diff(car_graph, report)
    assert len(changes) == 1
    assert len(car_graph.edges(EL.CHANGED_TO)) == 1
    assert len(car_graph.edges(EL.SAME_AS)) == len(a.parts) - 1
    change = changes[0]
    assert car_graph.degree(change.id, EL.CHG, "out") == 2
    assert car_graph.degree(change.id, EL.CHG_MODELS, "out") == 2


def test_load_split_report(car_graph):
    a, b = make_split_pair()
    load_pair(car_graph, a, b)
    report = diff_models(a, b)
    changes = load_diff(car_graph, report)
    assert len(changes) == 1
    semantics = car_graph.nodes(NL.SEMANTIC)
    assert len(semantics) == 1
    assert car_graph.degree(semantics[0].id, EL.SEM_PART, "out") == 2
    assert len(car_graph.edges(EL.CHANGED_TO)) == 2


def test_load_diff_idempotent(car_graph):
    a, b = make_thickness_pair()
    load_pair(car_graph, a, b)
    report = diff_models(a, b)
    load_diff(car_graph, report)
    nodes, edges = car_graph.node_count, car_graph.edge_count
    load_diff(car_graph, report)
    assert (car_graph.node_count, car_graph.edge_count) == (nodes, edges)


def test_recurring_change_shares_node(car_graph):
    a, b = make_thickness_pair()
    c = clone_model(b, "c")  # a->c repeats the same thickness change
    load_pair(car_graph, a, b)
    c.meta = model_metadata("m1")
    c.meta.model_id = "c"
    c.meta.parent_model_id = None
    load_model(car_graph, c)
    load_diff(car_graph, diff_models(a, b))
    load_diff(car_graph, diff_models(a, c))
    assert len(car_graph.nodes(NL.CHANGE)) == 1
    change = car_graph.nodes(NL.CHANGE)[0]
    # degree grew: CHG to parts of a, b, c plus CHG_MODELS to all three models
    assert car_graph.degree(change.id, EL.CHG, "out") == 3
    assert car_graph.degree(change.id, EL.CHG_MODELS, "out") == 3


def test_report_text_emission():
    a, b = make_thickness_pair()
    text = diff_models(a, b).to_text()
    lines = text.strip().split("\n")
    assert lines[0].startswith("# diff a -> b")
    assert len(lines) == 1 + len(a.parts)
    assert any("property_change" in line for line in lines)
