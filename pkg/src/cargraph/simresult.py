"""Simulation result ingestion: energy features, output channels, blobs.

The ``.simres`` format is a JSON document::

    {
      "sim_id": "s1", "model_id": "m1",
      "barrier_id": "odb" | "impactor_id": "upper-leg",
      "protocol_id": "tb-024",               // optional
      "global": {"total_mass": 1.4, "impact_energy": 120.0,
                 "termination_time": 100.0},
      "parts":    {"<pid>": {"t": [...], "ie": [...]}},
      "nodes":    {"<nid>": {"<channel>": {"t": [...], "v": [...]}}},
      "elements": {"<eid>": {"<channel>": {"t": [...], "v": [...]}}}
    }

Times are ms, energies kJ. Every time axis is strictly increasing and
starts at 0; internal energies are non-negative.

Raw series are persisted to the blob store keyed by
``(sim_id, entity, channel)``, never into graph properties.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import NamedTuple

from .blobstore import BlobStore
from .graph import Node, PropertyGraph
from .keyword import FEModel, model_node_id, part_node_id
from .schema import EL, NL

# absorption window thresholds, fractions of peak internal energy
START_FRACTION = 0.05
END_FRACTION = 0.95
RATE_SPAN = 0.9  # END_FRACTION - START_FRACTION, kept exact

NODE_CHANNELS = ("acceleration", "displacement")
ELMNT_CHANNELS = ("section_force",)


class Series(NamedTuple):
    t: list[float]
    v: list[float]


class SimResultError(Exception):
    pass


@dataclass(frozen=True)
class EnergyFeatures:
    ie_max: float
    t_start: float
    t_end: float
    rate: float


@dataclass
class SimResult:
    sim_id: str
    model_id: str
    barrier_id: str | None = None
    impactor_id: str | None = None
    protocol_id: str | None = None
    total_mass: float = 0.0
    impact_energy: float = 0.0
    termination_time: float = 0.0
    part_series: dict[int, Series] = field(default_factory=dict)
    node_series: dict[int, dict[str, Series]] = field(default_factory=dict)
    elmnt_series: dict[int, dict[str, Series]] = field(default_factory=dict)


def _check_axis(label: str, t: list[float], termination: float) -> None:
    if not t:
        raise SimResultError(f"{label}: empty time axis")
    if t[0] != 0.0:
        raise SimResultError(f"{label}: time axis must start at 0, got {t[0]}")
    for i in range(1, len(t)):
        if t[i] <= t[i - 1]:
            raise SimResultError(
                f"{label}: time axis not strictly increasing at index {i} ({t[i - 1]} -> {t[i]})"
            )
    if termination and t[-1] > termination:
        raise SimResultError(
            f"{label}: series runs past termination time ({t[-1]} > {termination})"
        )


def _read_series(label: str, raw: dict, value_key: str, termination: float) -> Series:
    t = [float(x) for x in raw["t"]]
    v = [float(x) for x in raw[value_key]]
    if len(t) != len(v):
        raise SimResultError(f"{label}: time and value lengths differ ({len(t)} vs {len(v)})")
    _check_axis(label, t, termination)
    return Series(t=t, v=v)


def parse_sim_result(data: bytes | str) -> SimResult:
    try:
        raw = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SimResultError(f"not valid JSON: {exc}") from None

    for key in ("sim_id", "model_id", "global"):
        if key not in raw:
            raise SimResultError(f"missing top-level field {key!r}")
    barrier = raw.get("barrier_id")
    impactor = raw.get("impactor_id")
    if (barrier is None) == (impactor is None):
        raise SimResultError("exactly one of barrier_id / impactor_id is required")

    glob = raw["global"]
    result = SimResult(
        sim_id=str(raw["sim_id"]),
        model_id=str(raw["model_id"]),
        barrier_id=barrier,
        impactor_id=impactor,
        protocol_id=raw.get("protocol_id"),
        total_mass=float(glob.get("total_mass", 0.0)),
        impact_energy=float(glob.get("impact_energy", 0.0)),
        termination_time=float(glob.get("termination_time", 0.0)),
    )

    for pid_text, series_raw in raw.get("parts", {}).items():
        pid = int(pid_text)
        series = _read_series(f"part {pid}", series_raw, "ie", result.termination_time)
        if any(value < 0 for value in series.v):
            raise SimResultError(f"part {pid}: negative internal energy")
        result.part_series[pid] = series

    for nid_text, channels in raw.get("nodes", {}).items():
        nid = int(nid_text)
        result.node_series[nid] = {
            channel: _read_series(f"node {nid}/{channel}", s, "v", result.termination_time)
            for channel, s in channels.items()
        }
    for eid_text, channels in raw.get("elements", {}).items():
        eid = int(eid_text)
        result.elmnt_series[eid] = {
            channel: _read_series(f"element {eid}/{channel}", s, "v", result.termination_time)
            for channel, s in channels.items()
        }
    return result


def energy_features(series: Series) -> EnergyFeatures:
    """Peak internal energy plus the 5%/95% absorption window and rate."""
    ie_max = max(series.v)
    if ie_max <= 0.0:
        return EnergyFeatures(0.0, 0.0, 0.0, 0.0)
    t_start = next(t for t, v in zip(series.t, series.v) if v >= START_FRACTION * ie_max)
    t_end = next(t for t, v in zip(series.t, series.v) if v >= END_FRACTION * ie_max)
    rate = RATE_SPAN * ie_max / (t_end - t_start) if t_end > t_start else 0.0
    return EnergyFeatures(ie_max=ie_max, t_start=t_start, t_end=t_end, rate=rate)


# ---------------------------------------------------------------------------
# Graph loading (segment: FE-simulation result)
# ---------------------------------------------------------------------------

def sim_node_id(sim_id: str) -> str:
    return f"sim:{sim_id}"


def load_sim(
    g: PropertyGraph,
    result: SimResult,
    fem: FEModel | None = None,
    blobs: BlobStore | None = None,
) -> Node:
    """Create the Sim node with its energy edges and output channels.

    ``fem`` supplies mesh ownership for PART_NODE / PART_ELMNT edges and is
    required whenever the result carries node or element channels.
    Re-ingesting the same result is idempotent.
    """
    model_id = model_node_id(result.model_id)
    if not g.has_node(model_id):
        raise SimResultError(f"model {result.model_id!r} not loaded")
    if (result.node_series or result.elmnt_series) and fem is None:
        raise SimResultError("node/element channels need the FEModel for part ownership")

    sid = sim_node_id(result.sim_id)
    props = {
        "run_id": result.sim_id,
        "total_mass": result.total_mass,
        "impact_energy": result.impact_energy,
        "termination_time": result.termination_time,
    }
    sim = g.set_node_props(sid, props) if g.has_node(sid) else g.add_node(NL.SIM, sid, props)

    if g.find_edge(EL.SIM_MODEL, sid, model_id) is None:
        g.add_edge(EL.SIM_MODEL, sid, model_id)

    if result.barrier_id:
        barr = f"barr:{result.barrier_id}"
        if not g.has_node(barr):
            g.add_node(NL.BARR, barr, {"name": result.barrier_id})
        if g.find_edge(EL.SIM_BARR, sid, barr) is None:
            g.add_edge(EL.SIM_BARR, sid, barr)
    if result.impactor_id:
        imp = f"imp:{result.impactor_id}"
        if not g.has_node(imp):
            g.add_node(NL.IMP, imp, {"name": result.impactor_id})
        if g.find_edge(EL.SIM_IMP, sid, imp) is None:
            g.add_edge(EL.SIM_IMP, sid, imp)
    if result.protocol_id:
        prtcl = f"prtcl:{result.protocol_id}"
        if not g.has_node(prtcl):
            g.add_node(NL.PRTCL, prtcl, {"name": result.protocol_id})
        if g.find_edge(EL.SIM_PRTCL, sid, prtcl) is None:
            g.add_edge(EL.SIM_PRTCL, sid, prtcl)

    for pid in sorted(result.part_series):
        part_id = part_node_id(result.model_id, pid)
        if not g.has_node(part_id):
            raise SimResultError(f"part {pid} absent from model {result.model_id!r}")
        series = result.part_series[pid]
        features = energy_features(series)
        if features.ie_max > 0.0:
            feature_props = {
                "t_start": features.t_start,
                "t_end": features.t_end,
                "rate": features.rate,
            }
            edge = g.find_edge(EL.NRG_PART, sid, part_id)
            if edge is None:
                g.add_edge(EL.NRG_PART, sid, part_id, features.ie_max, feature_props)
            else:
                edge.weight = features.ie_max
                edge.props.update(feature_props)
        if blobs is not None:
            blobs.put_series(result.sim_id, f"part:{pid}", "internal_energy", series.t, series.v)

    _load_mesh_channels(g, result, fem, blobs)
    return sim


def _load_mesh_channels(
    g: PropertyGraph, result: SimResult, fem: FEModel | None, blobs: BlobStore | None
) -> None:
    sid = sim_node_id(result.sim_id)

    def owners_of_node(nid: int) -> list[int]:
        assert fem is not None
        return sorted({shell.pid for shell in fem.elements.values() if nid in shell.nodes})

    for nid in sorted(result.node_series):
        out_id = f"node:{result.model_id}/{nid}"
        if not g.has_node(out_id):
            g.add_node(NL.NODE, out_id, {"nid": nid})
        if g.find_edge(EL.OUT_NODE, sid, out_id) is None:
            g.add_edge(EL.OUT_NODE, sid, out_id)
        for pid in owners_of_node(nid):
            part_id = part_node_id(result.model_id, pid)
            if g.has_node(part_id) and g.find_edge(EL.PART_NODE, part_id, out_id) is None:
                g.add_edge(EL.PART_NODE, part_id, out_id)
        if blobs is not None:
            for channel, series in result.node_series[nid].items():
                blobs.put_series(result.sim_id, f"node:{nid}", channel, series.t, series.v)

    for eid in sorted(result.elmnt_series):
        assert fem is not None
        if eid not in fem.elements:
            raise SimResultError(f"element {eid} absent from model {result.model_id!r}")
        out_id = f"elmnt:{result.model_id}/{eid}"
        if not g.has_node(out_id):
            g.add_node(NL.ELMNT, out_id, {"eid": eid})
        if g.find_edge(EL.OUT_ELMNT, sid, out_id) is None:
            g.add_edge(EL.OUT_ELMNT, sid, out_id)
        part_id = part_node_id(result.model_id, fem.elements[eid].pid)
        if g.has_node(part_id) and g.find_edge(EL.PART_ELMNT, part_id, out_id) is None:
            g.add_edge(EL.PART_ELMNT, part_id, out_id)
        if blobs is not None:
            for channel, series in result.elmnt_series[eid].items():
                blobs.put_series(result.sim_id, f"elmnt:{eid}", channel, series.t, series.v)


def mark_result_valid_for(g: PropertyGraph, model_id: str, sim_id: str) -> None:
    """Record that a simulation's outcome is reused for another model."""
    model = model_node_id(model_id)
    sim = sim_node_id(sim_id)
    if g.find_edge(EL.MODEL_STATUS, model, sim) is None:
        g.add_edge(EL.MODEL_STATUS, model, sim)
