"""Acceptance criteria, one test per criterion, at the stated tolerances.

Run with ``pytest tests/test_acceptance.py -v``; each criterion prints its
own PASS/FAIL line (bypassing capture) so the suite reads as a checklist.
"""

from __future__ import annotations

import random
import sys
import time

import pytest

from cargraph.analytics import BipartiteProjection, build_bipartite, load_similarity, rank_by_degree, simrank_pp
from cargraph.demo import (
    build_demo_graph,
    build_model_family,
    synthetic_grid_keyword,
    TWOBOX_K,
)
from cargraph.diff import diff_models
from cargraph.keyword import parse_keyword_file, serialize_keyword_file
from cargraph.queries import SpecFilter, benchmark_query, top_changes
from cargraph.schema import EL, NL, validate_graph
from cargraph.serialize import export_graph, graphs_equal, import_graph
from cargraph.simresult import Series, energy_features

from test_analytics import oracle_simrank, random_projection
from test_diff import (
    brute_force_classification,
    kinds_by_part,
    make_geometry_pair,
    make_new_deleted_pair,
    make_split_pair,
    make_thickness_pair,
)
from cargraph.diff import Tolerances


def report(name: str, passed: bool = True) -> None:
    line = f"ACCEPTANCE {name}: {'PASS' if passed else 'FAIL'}"
    print(line, file=sys.__stdout__, flush=True)
    assert passed, line


# ---------------------------------------------------------------------------

def test_schema_conformance_full_ingestion(tmp_path):
    started = time.perf_counter()
    bundle = build_demo_graph(tmp_path)
    violations = validate_graph(bundle.graph)
    elapsed = time.perf_counter() - started

    ncap_pages = len(list((tmp_path / "ncap").glob("*.html")))
    models = len(bundle.graph.nodes(NL.MODEL))
    sims = len(bundle.graph.nodes(NL.SIM))
    ok = (
        violations == []
        and elapsed < 10.0
        and ncap_pages == 3
        and models == 4
        and sims == 6
        and len(bundle.diffs) == 3
    )
    report(f"schema-conformance (0 violations, {elapsed:.2f}s < 10s)", ok)


def test_simrank_correctness():
    proj = BipartiteProjection(
        sims=["sim:a", "sim:b"], parts=["p"],
        weights={("sim:a", "p"): 2.5, ("sim:b", "p"): 2.5},
    )
    result = simrank_pp(proj)
    analytic_ok = abs(result.score("sim:a", "sim:b") - 0.4) <= 1e-12

    oracle_ok = True
    convergence_ok = result.converged and result.iterations < 100
    for seed in (101, 202, 303):
        rand = random_projection(seed)
        assert len(rand.sims) <= 10 and len(rand.parts) <= 10
        got = simrank_pp(rand, eps=1e-6, max_iter=100)
        convergence_ok = convergence_ok and got.converged and got.iterations < 100
        expected = oracle_simrank(rand.sims, rand.parts, rand.weights)
        for a, b, score in got.pairs:
            if abs(score - expected[(a, b)]) > 1e-9:
                oracle_ok = False
    report(
        "simrank-correctness (2x1 = 0.4 +-1e-12; 3 random <=10x10 within 1e-9; "
        "converged before K=100)",
        analytic_ok and oracle_ok and convergence_ok,
    )


def test_simrank_invariance():
    ok = True
    for seed in (7, 17, 27):
        proj = random_projection(seed)
        base = simrank_pp(proj, spread=False)
        scaled = simrank_pp(proj.scaled(7.3), spread=False)
        for (a, b, s1), (_, _, s2) in zip(base.pairs, scaled.pairs):
            if abs(s1 - s2) > 1e-12:
                ok = False
    report("simrank-invariance (weights x7.3, spread off, delta <= 1e-12)", ok)


def test_diff_ground_truth():
    m = build_model_family()["m1"]
    identity = diff_models(m, m)
    cases = {
        "identity": (
            kinds_by_part(identity),
            {(side, pid): "same" for side in ("a", "b") for pid in m.parts},
        ),
    }

    a, b = make_thickness_pair()
    expected = {(s, p): "same" for s in ("a", "b") for p in a.parts}
    expected[("a", 2)] = expected[("b", 2)] = "property_change"
    cases["thickness"] = (kinds_by_part(diff_models(a, b)), expected)

    a, b = make_geometry_pair(3.1)
    expected = {(s, p): "same" for s in ("a", "b") for p in a.parts}
    expected[("a", 4)] = expected[("b", 4)] = "geometry_change"
    cases["geometry-3.1mm"] = (kinds_by_part(diff_models(a, b)), expected)

    a, b = make_new_deleted_pair()
    expected = {("a", p): "same" for p in a.parts if p != 6}
    expected.update({("b", p): "same" for p in b.parts if p != 8})
    expected[("a", 6)] = "deleted"
    expected[("b", 8)] = "new"
    cases["new-deleted"] = (kinds_by_part(diff_models(a, b)), expected)

    a, b = make_split_pair()
    expected = {(s, p): "same" for s in ("a", "b") for p in a.parts if p != 3}
    expected[("a", 3)] = expected[("b", 3)] = expected[("b", 7)] = "split"
    cases["split"] = (kinds_by_part(diff_models(a, b)), expected)

    classified_ok = all(got == want for got, want in cases.values())

    mirror_ok = True
    for maker in (make_thickness_pair, make_geometry_pair, make_new_deleted_pair, make_split_pair):
        a, b = maker()
        if diff_models(a, b).mirrored() != diff_models(b, a):
            mirror_ok = False

    report("diff-ground-truth (5 authored pairs 100%; mirror symmetry)", classified_ok and mirror_ok)


def test_energy_features_exact():
    t = [float(i) for i in range(101)]
    ramp = energy_features(Series(t=t, v=[0.1 * ti for ti in t]))
    ramp_ok = (ramp.ie_max, ramp.t_start, ramp.t_end, ramp.rate) == (10.0, 5.0, 95.0, 0.1)

    step = energy_features(Series(t=t, v=[0.0 if ti < 40 else 8.0 for ti in t]))
    step_ok = (step.ie_max, step.t_start, step.t_end, step.rate) == (8.0, 40.0, 40.0, 0.0)

    rng = random.Random(42)
    random_ok = True
    for _ in range(50):
        values = [rng.uniform(0.0, 100.0) for _ in range(rng.randint(1, 60))]
        if rng.random() < 0.5:
            values.sort()  # monotone case
        axis = [float(i) for i in range(len(values))]
        got = energy_features(Series(t=axis, v=values))
        peak = max(values)
        if peak <= 0:
            expected = (0.0, 0.0, 0.0, 0.0)
        else:
            t_start = next(ti for ti, vi in zip(axis, values) if vi >= 0.05 * peak)
            t_end = next(ti for ti, vi in zip(axis, values) if vi >= 0.95 * peak)
            rate = 0.9 * peak / (t_end - t_start) if t_end > t_start else 0.0
            expected = (peak, t_start, t_end, rate)
        if (got.ie_max, got.t_start, got.t_end, got.rate) != expected:
            random_ok = False
    report("energy-features (ramp + step exact; random series match oracle)", ramp_ok and step_ok and random_ok)


def test_parser_fixpoint_and_throughput():
    fem = parse_keyword_file(TWOBOX_K, model_id="twobox")
    again = parse_keyword_file(serialize_keyword_file(fem), model_id="twobox")
    fixpoint_ok = fem.equivalent(again) and serialize_keyword_file(fem) == serialize_keyword_file(again)

    text_1e5 = synthetic_grid_keyword(100_000)
    started = time.perf_counter()
    small = parse_keyword_file(text_1e5, model_id="perf1")
    t_small = time.perf_counter() - started
    small_ok = len(small.elements) >= 100_000 and t_small < 5.0

    text_1e6 = synthetic_grid_keyword(1_000_000)
    started = time.perf_counter()
    parse_keyword_file(text_1e6, model_id="perf10")
    t_big = time.perf_counter() - started
    scaling_ok = t_big < 15.0 * t_small

    report(
        f"parser (fixpoint; 1e5 elements in {t_small:.2f}s < 5s; "
        f"10x size in {t_big / t_small:.1f}x < 15x)",
        fixpoint_ok and small_ok and scaling_ok,
    )


def test_round_trip_full_fixture(demo_graph):
    ok = True
    for fmt in ("graphml", "jsonlines"):
        back = import_graph(export_graph(demo_graph, fmt), demo_graph.schema, fmt)
        ok = ok and graphs_equal(demo_graph, back) and graphs_equal(back, demo_graph)
    report("round-trip (graphml + jsonlines id-preserving isomorphism)", ok)


def test_degree_recommendation(demo_graph):
    ranked = top_changes(demo_graph, k=10)
    first_ok = ranked and ranked[0]["id"] == "change:thk:b-pillar:1.5->1.8"

    brute_ok = True
    for row in ranked:
        recount = sum(
            1 for e in demo_graph.edges() if row["id"] in (e.src, e.dst)
        )
        if row["degree"] != recount:
            brute_ok = False
    # the same ranking from the generic helper
    generic = rank_by_degree(demo_graph, NL.CHANGE, None, len(ranked))
    order_ok = [r["id"] for r in ranked] == [node_id for node_id, _ in generic]
    report("degree-recommendation (recurring change first; equals brute-force recount)", bool(first_ok and brute_ok and order_ok))


def test_benchmark_query_shape(demo_graph):
    rows = benchmark_query(
        demo_graph, "Large Family Car", "VRU", SpecFilter("kerb_weight_kg", "le", "1600")
    )
    expected = [("veh:brennix-liftback-2021", 76.0), ("veh:aldora-estate-2022", 70.0)]
    got = [(r["id"], r["score"]) for r in rows]
    subset_ok = got == expected
    order_ok = [s for _, s in got] == sorted((s for _, s in got), reverse=True)

    narrowed = benchmark_query(
        demo_graph, "Large Family Car", "VRU", SpecFilter("ride_height_mm", "ge", "150")
    )
    narrowed_ok = [r["id"] for r in narrowed] == ["veh:aldora-estate-2022"]
    report("benchmark-query (class + subdiscipline + spec predicate, descending)", subset_ok and order_ok and narrowed_ok)


# The SIM_SIM edges the UI consumes come from the same scored pipeline.
def test_similarity_edges_loaded(demo_graph):
    projection = build_bipartite(demo_graph)
    result = simrank_pp(projection)
    count = load_similarity(demo_graph, result, top_k=2)
    edges = demo_graph.edges(EL.SIM_SIM)
    ok = count == len(edges) > 0 and all(0.0 <= e.weight <= 1.0 for e in edges)
    report("similarity-edges (top-k SIM_SIM loaded, weights in [0,1])", ok)
