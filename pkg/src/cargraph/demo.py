"""Authored fixture corpus and the end-to-end demo ingestion pipeline.

Generates a small but complete data set: three assessment pages plus a
protocol list, four keyword models forming a two-level development tree,
six simulation results, and three diffs against the baseline model. The
same builders feed the test suite, the acceptance run, and ``cargraph
demo``, which materializes everything into a store directory the service
can serve.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .analytics import build_bipartite, cluster_entities, load_caused_to, load_similarity, simrank_pp
from .blobstore import BlobStore
from .diff import DiffReport, diff_models, load_diff
from .graph import PropertyGraph, create_graph
from .keyword import FEModel, Metadata, PartDef, Section, Material, Shell, load_model, serialize_keyword_file
from .ncap import ingest_ncap_dir
from .schema import EL, NL, car_schema
from .simresult import SimResult, load_sim, mark_result_valid_for, parse_sim_result
from .store import GraphStore

DEMO_VEH = "dev-aldora"

# ---------------------------------------------------------------------------
# Mesh building
# ---------------------------------------------------------------------------

def _add_grid_part(
    fem: FEModel,
    pid: int,
    name: str,
    thickness: float,
    mid: int,
    origin: tuple[float, float, float],
    nx: int,
    ny: int,
    spacing: float = 100.0,
    plane: str = "xy",
) -> None:
    """Quad grid of nx*ny shells; node/element ids live in per-part blocks.

    Grid points that land exactly on an existing mesh node are merged onto
    it, which is how fixtures share nodes between adjacent parts.
    """
    coords_index = {xyz: nid for nid, xyz in fem.mesh_nodes.items()}
    nid_base = pid * 1000
    eid_base = pid * 100
    ox, oy, oz = origin

    grid: dict[tuple[int, int], int] = {}
    counter = 0
    for j in range(ny + 1):
        for i in range(nx + 1):
            if plane == "xy":
                xyz = (ox + i * spacing, oy + j * spacing, oz)
            else:  # xz: vertical panel
                xyz = (ox + i * spacing, oy, oz + j * spacing)
            if xyz in coords_index:
                grid[(i, j)] = coords_index[xyz]
            else:
                nid = nid_base + counter
                counter += 1
                fem.mesh_nodes[nid] = xyz
                coords_index[xyz] = nid
                grid[(i, j)] = nid

    eid = eid_base
    for j in range(ny):
        for i in range(nx):
            fem.elements[eid] = Shell(
                pid=pid,
                nodes=(grid[(i, j)], grid[(i + 1, j)], grid[(i + 1, j + 1)], grid[(i, j + 1)]),
            )
            eid += 1

    fem.parts[pid] = PartDef(name=name, secid=pid, mid=mid)
    fem.sections[pid] = Section(thickness=thickness)


_MATERIALS = {
    1: Material(density=7.85e-09, yield_strength=0.25),   # mild steel
    2: Material(density=7.85e-09, yield_strength=0.60),   # high strength steel
    3: Material(density=2.70e-09, yield_strength=0.16),   # aluminium
}


def build_baseline_model(model_id: str = "m1") -> FEModel:
    """Six-part shell model used as the development-tree root."""
    fem = FEModel(model_id=model_id)
    fem.materials.update(_MATERIALS)
    _add_grid_part(fem, 1, "floorpan", 1.2, 1, (0.0, 0.0, 0.0), 3, 2)
    # b-pillar is vertical and shares no nodes with the floor
    _add_grid_part(fem, 2, "b-pillar", 1.5, 2, (250.0, 0.0, 50.0), 1, 3, plane="xz")
    # crossmember's lower edge lands on the floorpan's upper edge -> shared nodes
    _add_grid_part(fem, 3, "crossmember", 2.0, 1, (0.0, 200.0, 0.0), 2, 1)
    _add_grid_part(fem, 4, "bumper-beam", 2.5, 3, (50.0, -200.0, 0.0), 3, 1)
    _add_grid_part(fem, 5, "crashbox", 1.8, 3, (400.0, -150.0, 0.0), 2, 2)
    _add_grid_part(fem, 6, "roof-rail", 1.0, 2, (0.0, 600.0, 50.0), 3, 1)
    # weld the bumper beam to the crashbox
    bumper_corner = _node_at(fem, (350.0, -100.0, 0.0))
    crashbox_corner = _node_at(fem, (400.0, -150.0, 0.0))
    fem.spotwelds.append((bumper_corner, crashbox_corner))
    return fem


def _node_at(fem: FEModel, xyz: tuple[float, float, float]) -> int:
    for nid, coords in fem.mesh_nodes.items():
        if coords == xyz:
            return nid
    raise KeyError(f"no mesh node at {xyz}")


# variation helpers -- used both for the corpus and for diff test fixtures

def clone_model(fem: FEModel, model_id: str) -> FEModel:
    return FEModel(
        model_id=model_id,
        mesh_nodes=dict(fem.mesh_nodes),
        elements=dict(fem.elements),
        parts=dict(fem.parts),
        sections=dict(fem.sections),
        materials=dict(fem.materials),
        spotwelds=list(fem.spotwelds),
        meta=None,
    )


def with_thickness(fem: FEModel, pid: int, thickness: float) -> FEModel:
    fem.sections[fem.parts[pid].secid] = Section(thickness=thickness)
    return fem


def with_translated_part(fem: FEModel, pid: int, delta: tuple[float, float, float]) -> FEModel:
    moved = fem.part_node_ids(pid)
    dx, dy, dz = delta
    for nid in moved:
        x, y, z = fem.mesh_nodes[nid]
        fem.mesh_nodes[nid] = (x + dx, y + dy, z + dz)
    return fem


def without_part(fem: FEModel, pid: int) -> FEModel:
    keep_nodes: set[int] = set()
    fem.elements = {eid: s for eid, s in fem.elements.items() if s.pid != pid}
    for shell in fem.elements.values():
        keep_nodes.update(shell.nodes)
    fem.mesh_nodes = {nid: c for nid, c in fem.mesh_nodes.items() if nid in keep_nodes}
    fem.spotwelds = [
        (a, b) for a, b in fem.spotwelds if a in keep_nodes and b in keep_nodes
    ]
    secid, mid = fem.parts[pid].secid, fem.parts[pid].mid
    del fem.parts[pid]
    if not any(p.secid == secid for p in fem.parts.values()):
        del fem.sections[secid]
    return fem


def with_split_part(fem: FEModel, pid: int, new_pid: int, new_name: str) -> FEModel:
    """Reassign half of a part's elements to a new part (same properties)."""
    eids = fem.part_element_ids(pid)
    half = eids[len(eids) // 2 :]
    for eid in half:
        fem.elements[eid] = Shell(pid=new_pid, nodes=fem.elements[eid].nodes)
    old = fem.parts[pid]
    fem.parts[new_pid] = PartDef(name=new_name, secid=old.secid, mid=old.mid)
    return fem


def build_model_family() -> dict[str, FEModel]:
    """m1 baseline; m2..m4 all carry the recurring b-pillar thickening."""
    m1 = build_baseline_model("m1")
    m2 = with_thickness(clone_model(m1, "m2"), 2, 1.8)
    m3 = with_translated_part(
        with_thickness(clone_model(m1, "m3"), 2, 1.8), 4, (3.1, 0.0, 0.0)
    )
    m4 = with_thickness(clone_model(m1, "m4"), 2, 1.8)
    without_part(m4, 6)
    _add_grid_part(m4, 7, "skid-plate", 2.2, 1, (100.0, -50.0, -100.0), 2, 2)
    return {"m1": m1, "m2": m2, "m3": m3, "m4": m4}


_MODEL_PARENTS = {"m1": None, "m2": "m1", "m3": "m1", "m4": "m2"}


def model_metadata(model_id: str) -> Metadata:
    return Metadata(
        model_id=model_id,
        veh_id=DEMO_VEH,
        discipline="safety",
        parent_model_id=_MODEL_PARENTS[model_id],
        pltf_part_ids=[1, 3],
        ubdy_part_ids=[2, 6] if model_id != "m4" else [2],
        timestamp=f"2022-03-0{int(model_id[1])}T09:00:00Z",
    )


def write_model_fixtures(directory: Path) -> dict[str, Path]:
    directory.mkdir(parents=True, exist_ok=True)
    paths: dict[str, Path] = {}
    for model_id, fem in build_model_family().items():
        path = directory / f"{model_id}.k"
        path.write_text(serialize_keyword_file(fem), encoding="utf-8")
        sidecar = directory / f"{model_id}.meta.json"
        sidecar.write_text(model_metadata(model_id).to_json(), encoding="utf-8")
        paths[model_id] = path
    return paths


TWOBOX_K = """$ two spot-welded boxes
*NODE
1,0.0,0.0,0.0
2,100.0,0.0,0.0
3,200.0,0.0,0.0
4,0.0,100.0,0.0
5,100.0,100.0,0.0
6,200.0,100.0,0.0
7,0.0,300.0,0.0
8,100.0,300.0,0.0
9,200.0,300.0,0.0
10,0.0,400.0,0.0
11,100.0,400.0,0.0
12,200.0,400.0,0.0
*ELEMENT_SHELL
1,1,1,2,5,4
2,1,2,3,6,5
3,2,7,8,11,10
4,2,8,9,12,11
*PART
lower-box
1,1,1
*PART
upper-box
2,2,1
*SECTION_SHELL
1,1.5
2,2.0
*MAT
1,7.85e-09,0.25
*CONSTRAINED_SPOTWELD
5,8
*END
"""

TWOBOX_META = {
    "model_id": "twobox",
    "veh_id": "demo-veh",
    "discipline": "safety",
    "pltf_part_ids": [1],
    "ubdy_part_ids": [2],
    "timestamp": "2022-01-15T12:00:00Z",
}


def write_twobox(directory: Path) -> Path:
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / "twobox.k"
    path.write_text(TWOBOX_K, encoding="utf-8")
    (directory / "twobox.meta.json").write_text(
        json.dumps(TWOBOX_META, indent=2, sort_keys=True), encoding="utf-8"
    )
    return path


def synthetic_grid_keyword(n_shells: int) -> str:
    """Single-part square grid with at least ``n_shells`` elements."""
    side = max(math.ceil(n_shells ** 0.5), 1)
    lines = ["*NODE"]
    for j in range(side + 1):
        for i in range(side + 1):
            nid = j * (side + 1) + i + 1
            lines.append(f"{nid},{float(i * 10)!r},{float(j * 10)!r},0.0")
    lines.append("*ELEMENT_SHELL")
    eid = 1
    for j in range(side):
        for i in range(side):
            n1 = j * (side + 1) + i + 1
            n2 = n1 + 1
            n3 = n2 + side + 1
            n4 = n1 + side + 1
            lines.append(f"{eid},1,{n1},{n2},{n3},{n4}")
            eid += 1
    lines += ["*PART", "big-panel", "1,1,1", "*SECTION_SHELL", "1,1.5", "*MAT", "1,7.85e-09,0.25", "*END"]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Simulation results
# ---------------------------------------------------------------------------

def ramp_series(ie_max: float, t_ramp_start: float, t_ramp_end: float, steps: int = 101) -> dict:
    t = [float(i) for i in range(steps)]
    v = []
    for ti in t:
        if ti <= t_ramp_start:
            v.append(0.0)
        elif ti >= t_ramp_end:
            v.append(ie_max)
        else:
            v.append(ie_max * (ti - t_ramp_start) / (t_ramp_end - t_ramp_start))
    return {"t": t, "ie": v}


#: per-simulation energy schedule: pid -> (ie_max kJ, ramp start ms, ramp end ms)
_SIM_SCHEDULE: dict[str, dict] = {
    "front_v1": {
        "model_id": "m1",
        "barrier_id": "odb-64",
        "protocol_id": "tb-024",
        "parts": {1: (12.0, 10, 60), 2: (8.0, 15, 55), 3: (5.0, 20, 70), 4: (20.0, 5, 40), 5: (15.0, 8, 45)},
        "nodes": {2000: "acceleration"},
        "elements": {400: "section_force"},
    },
    "pedestrian_v1": {
        "model_id": "m1",
        "impactor_id": "upper-leg",
        "protocol_id": "tb-024",
        "parts": {4: (6.0, 4, 30), 5: (3.0, 6, 35)},
    },
    "front_v2": {
        "model_id": "m2",
        "barrier_id": "odb-64",
        "parts": {1: (11.0, 10, 60), 2: (9.5, 14, 52), 3: (5.2, 20, 70), 4: (19.0, 5, 40), 5: (15.5, 8, 45)},
    },
    "front_v3": {
        "model_id": "m3",
        "barrier_id": "odb-64",
        "parts": {1: (11.5, 11, 61), 2: (9.4, 15, 53), 3: (5.1, 21, 71), 4: (21.0, 6, 42), 5: (14.0, 9, 46)},
        "nodes": {2000: "acceleration"},
    },
    "front_v4": {
        "model_id": "m4",
        "barrier_id": "odb-64",
        "protocol_id": "tb-021",
        "parts": {1: (10.0, 10, 58), 2: (9.0, 14, 50), 4: (18.0, 5, 38), 5: (16.0, 8, 44), 7: (4.0, 12, 50)},
    },
    "mpdb_v4": {
        "model_id": "m4",
        "barrier_id": "mpdb",
        "parts": {1: (14.0, 12, 66), 2: (10.0, 16, 58), 3: (6.0, 22, 74), 4: (22.0, 6, 44), 5: (17.0, 9, 48)},
    },
}


def build_simres(sim_id: str) -> dict:
    spec = _SIM_SCHEDULE[sim_id]
    parts = {
        str(pid): ramp_series(*values) for pid, values in sorted(spec["parts"].items())
    }
    total_ie = sum(values[0] for values in spec["parts"].values())
    doc: dict = {
        "sim_id": sim_id,
        "model_id": spec["model_id"],
        "global": {
            "total_mass": 1.4,
            "impact_energy": round(total_ie * 1.25, 6),
            "termination_time": 100.0,
        },
        "parts": parts,
    }
    if "barrier_id" in spec:
        doc["barrier_id"] = spec["barrier_id"]
    if "impactor_id" in spec:
        doc["impactor_id"] = spec["impactor_id"]
    if "protocol_id" in spec:
        doc["protocol_id"] = spec["protocol_id"]
    if "nodes" in spec:
        doc["nodes"] = {
            str(nid): {channel: _oscillation(nid)}
            for nid, channel in spec["nodes"].items()
        }
    if "elements" in spec:
        doc["elements"] = {
            str(eid): {channel: _oscillation(eid)}
            for eid, channel in spec["elements"].items()
        }
    return doc


def _oscillation(seed: int) -> dict:
    t = [float(i) for i in range(0, 101, 2)]
    v = [round(((seed + i * 7) % 23) - 11.0, 3) for i in range(len(t))]
    return {"t": t, "v": v}


def write_sim_fixtures(directory: Path) -> dict[str, Path]:
    directory.mkdir(parents=True, exist_ok=True)
    paths: dict[str, Path] = {}
    for sim_id in _SIM_SCHEDULE:
        path = directory / f"{sim_id}.simres"
        path.write_text(json.dumps(build_simres(sim_id), indent=1), encoding="utf-8")
        paths[sim_id] = path
    return paths


# ---------------------------------------------------------------------------
# Assessment page fixtures
# ---------------------------------------------------------------------------

_PAGE_TEMPLATE = """<!DOCTYPE html>
<html>
<head><title>Assessment | {name}</title></head>
<body>
<h1 class="vehicle-title">{name}</h1>
<div class="vehicle-meta">
  <span class="vehicle-class">{klass}</span>
  tested in <span class="test-year">{year}</span>
  <span class="stars" data-stars="{stars}">{stars} stars</span>
</div>
<table class="rating-table">
  <tr><th>Adult Occupant Protection</th><td class="percentage">{aop}%</td></tr>
  <tr><th>Child Occupant Protection</th><td class="percentage">{cop}%</td></tr>
  <tr><th>Vulnerable Road Users</th><td class="percentage">{vru}%</td></tr>
  <tr><th>Safety Assist</th><td class="percentage">{sa}%</td></tr>
</table>
<table class="spec-table">
{spec_rows}
</table>
<div class="media">
  <a class="media-link" href="https://media.example.org/{slug}/crash-test.mp4">Crash test video</a>
</div>
<nav>
{nav_links}
</nav>
</body>
</html>
"""

NCAP_FIXTURES: dict[str, dict] = {
    "aldora-estate-2022": {
        "name": "Aldora Estate",
        "klass": "Large Family Car",
        "year": 2022,
        "stars": 5,
        "aop": 94, "cop": 87, "vru": 70, "sa": 71,
        "spec": {"Kerb weight": "1503 kg", "Ride height": "158 mm", "Length": "4687 mm"},
        "links": ["brennix-liftback-2021", "corvento-city-2022"],
    },
    "brennix-liftback-2021": {
        "name": "Brennix Liftback",
        "klass": "Large Family Car",
        "year": 2021,
        "stars": 4,
        "aop": 88, "cop": 82, "vru": 76, "sa": 65,
        "spec": {"Kerb weight": "1450 kg", "Ride height": "142 mm", "Length": "4591 mm"},
        "links": ["aldora-estate-2022"],
    },
    "corvento-city-2022": {
        "name": "Corvento City",
        "klass": "Supermini",
        "year": 2022,
        "stars": 4,
        "aop": 81, "cop": 78, "vru": 68, "sa": 60,
        "spec": {"Kerb weight": "1160 kg", "Ride height": "150 mm", "Length": "4053 mm"},
        "links": ["aldora-estate-2022"],
    },
}

PROTOCOL_URLS = [
    "https://fixtures.local/for-engineers/protocols/vulnerable-road-user-vru-protection/2020/tb-024.pdf",
    "https://fixtures.local/for-engineers/protocols/adult-occupant-protection-aop/2021/tb-021.pdf",
    "https://fixtures.local/for-engineers/protocols/child-occupant-protection-cop/2021/tb-023.pdf",
    "https://fixtures.local/for-engineers/protocols/safety-assist/2022/tb-029.pdf",
]


def render_ncap_page(slug: str) -> str:
    fixture = NCAP_FIXTURES[slug]
    spec_rows = "\n".join(
        f"  <tr><th>{key}</th><td>{value}</td></tr>" for key, value in fixture["spec"].items()
    )
    nav_links = "\n".join(
        f'  <a href="/ratings/{other}.html">{NCAP_FIXTURES[other]["name"]}</a>'
        for other in fixture["links"]
    )
    return _PAGE_TEMPLATE.format(
        slug=slug, spec_rows=spec_rows, nav_links=nav_links, **{
            k: fixture[k] for k in ("name", "klass", "year", "stars", "aop", "cop", "vru", "sa")
        }
    )


def write_ncap_fixtures(directory: Path) -> list[Path]:
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for slug in NCAP_FIXTURES:
        path = directory / f"{slug}.html"
        path.write_text(render_ncap_page(slug), encoding="utf-8")
        paths.append(path)
    (directory / "protocol_urls.txt").write_text(
        "\n".join(PROTOCOL_URLS) + "\n", encoding="utf-8"
    )
    return paths


# ---------------------------------------------------------------------------
# Full pipeline
# ---------------------------------------------------------------------------

@dataclass
class DemoBundle:
    graph: PropertyGraph
    blobs: BlobStore
    workdir: Path
    diffs: list[DiffReport]


def build_demo_graph(workdir: Path) -> DemoBundle:
    """Materialize the corpus under ``workdir`` and ingest all of it."""
    workdir = Path(workdir)
    ncap_dir = workdir / "ncap"
    model_dir = workdir / "models"
    sim_dir = workdir / "sims"
    write_ncap_fixtures(ncap_dir)
    write_model_fixtures(model_dir)
    write_sim_fixtures(sim_dir)

    g = create_graph(car_schema())
    blobs = BlobStore(workdir / "store" / "blobs")

    ingest_ncap_dir(g, ncap_dir)

    models = build_model_family()
    for model_id, fem in models.items():
        fem.meta = model_metadata(model_id)
        load_model(g, fem)

    diffs = [
        diff_models(models["m1"], models[other]) for other in ("m2", "m3", "m4")
    ]
    for report in diffs:
        load_diff(g, report)

    for sim_id in _SIM_SCHEDULE:
        result: SimResult = parse_sim_result(json.dumps(build_simres(sim_id)))
        load_sim(g, result, fem=models[result.model_id], blobs=blobs)

    # m3 reuses the baseline frontal result instead of re-running it
    mark_result_valid_for(g, "m3", "front_v1")

    # a part group with aggregated energy features
    if not g.has_node("grp:front-assembly"):
        g.add_node(NL.GRP, "grp:front-assembly", {"name": "front assembly"})
        g.add_edge(EL.GRP_MEM, "grp:front-assembly", "part:m1/4")
        g.add_edge(EL.GRP_MEM, "grp:front-assembly", "part:m1/5")
    from .analytics import group_features

    group_features(g, "grp:front-assembly", "sim:front_v1")

    projection = build_bipartite(g)
    similarity = simrank_pp(projection)
    load_similarity(g, similarity, top_k=2)

    cluster_entities(g, "des", tau=1.0)
    cluster_entities(g, "behav", tau=1.0)

    # an externally supplied cause/effect hint
    load_caused_to(g, [("change:thk:b-pillar:1.5->1.8", "sim:front_v2", 0.7)])

    return DemoBundle(graph=g, blobs=blobs, workdir=workdir, diffs=diffs)


def build_demo_store(workdir: Path) -> GraphStore:
    bundle = build_demo_graph(workdir)
    store = GraphStore(workdir / "store")
    store.save(bundle.graph)
    return store
