"""Graph analytics: simulation similarity, degree ranking, clustering.

The similarity pipeline projects Sim nodes and their energy-absorbing
parts into a weighted bipartite graph, merging parts across models that
are linked by SAME_AS chains or share a (model-lineage, pid) identity.
Without that merge, simulations of different models would never share a
neighbor and every cross-model similarity would collapse to zero.

Scores come from the evidence-weighted similarity recursion

    s(a,b) = C * sum_{i in E(a)} sum_{j in E(b)} W(a,i) W(b,j) s(i,j)

with s(x,x) = 1, normalized weights W(a,i) = spread(i) * w(a,i) / sum_i' w(a,i'),
spread(i) = exp(-variance of i's incident weights), run alternately on both
sides until the largest per-pair delta drops below eps. The reported score
is evidence(a,b) * s(a,b) with evidence(a,b) = 1 - 2^-|E(a) ∩ E(b)|.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .graph import Edge, Node, PropertyGraph
from .schema import EL, NL

log = logging.getLogger(__name__)

DEFAULT_DECAY = 0.8
DEFAULT_MAX_ITER = 100
DEFAULT_EPS = 1e-6


# ---------------------------------------------------------------------------
# Bipartite projection
# ---------------------------------------------------------------------------

@dataclass
class BipartiteProjection:
    sims: list[str]
    parts: list[str]
    weights: dict[tuple[str, str], float]

    def weight_matrix(self) -> np.ndarray:
        sim_index = {s: i for i, s in enumerate(self.sims)}
        part_index = {p: j for j, p in enumerate(self.parts)}
        matrix = np.zeros((len(self.sims), len(self.parts)))
        for (sim, part), w in self.weights.items():
            matrix[sim_index[sim], part_index[part]] = w
        return matrix

    def scaled(self, factor: float) -> "BipartiteProjection":
        return BipartiteProjection(
            sims=list(self.sims),
            parts=list(self.parts),
            weights={k: w * factor for k, w in self.weights.items()},
        )


class _UnionFind:
    def __init__(self) -> None:
        self._parent: dict[str, str] = {}

    def find(self, item: str) -> str:
        parent = self._parent.setdefault(item, item)
        if parent != item:
            parent = self.find(parent)
            self._parent[item] = parent
        return parent

    def union(self, a: str, b: str) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # keep the lexicographically smaller id as canonical representative
            if rb < ra:
                ra, rb = rb, ra
            self._parent[rb] = ra


def _model_lineage_roots(g: PropertyGraph) -> dict[str, str]:
    roots: dict[str, str] = {}

    def root_of(model_id: str, trail: set[str]) -> str:
        if model_id in roots:
            return roots[model_id]
        if model_id in trail:  # defensive: MODEL_REF cycles would be data corruption
            return model_id
        parents = g.incident_edges(model_id, EL.MODEL_REF, "out")
        result = model_id if not parents else root_of(parents[0].dst, trail | {model_id})
        roots[model_id] = result
        return result

    for model in g.nodes(NL.MODEL):
        root_of(model.id, set())
    return roots


def part_identity_classes(g: PropertyGraph) -> dict[str, str]:
    """Map each Part node id to its merged identity key."""
    uf = _UnionFind()
    for part in g.nodes(NL.PART):
        uf.find(part.id)
    for edge in g.edges(EL.SAME_AS):
        uf.union(edge.src, edge.dst)

    roots = _model_lineage_roots(g)
    by_lineage_pid: dict[tuple[str, int], str] = {}
    for model in g.nodes(NL.MODEL):
        lineage = roots[model.id]
        for edge in g.incident_edges(model.id, EL.HAS_PART, "out"):
            part = g.node(edge.dst)
            key = (lineage, int(part.props["pid"]))  # type: ignore[arg-type]
            if key in by_lineage_pid:
                uf.union(by_lineage_pid[key], part.id)
            else:
                by_lineage_pid[key] = part.id

    return {part.id: uf.find(part.id) for part in g.nodes(NL.PART)}


def build_bipartite(
    g: PropertyGraph,
    sim_filter: Callable[[Node], bool] | Iterable[str] | None = None,
) -> BipartiteProjection:
    """Project Sim -> Part energy edges onto merged part identities."""
    if sim_filter is None:
        keep = lambda node: True
    elif callable(sim_filter):
        keep = sim_filter
    else:
        allowed = set(sim_filter)
        keep = lambda node: node.id in allowed

    identity = part_identity_classes(g)
    weights: dict[tuple[str, str], float] = {}
    sims: list[str] = []
    for sim in g.nodes(NL.SIM):
        if not keep(sim):
            continue
        edges = g.incident_edges(sim.id, EL.NRG_PART, "out")
        edges = [e for e in edges if (e.weight or 0.0) > 0.0]
        if not edges:
            log.warning("sim %s has no energy-absorbing parts; excluded", sim.id)
            continue
        sims.append(sim.id)
        for edge in edges:
            key = (sim.id, identity[edge.dst])
            weights[key] = weights.get(key, 0.0) + float(edge.weight or 0.0)

    if not sims:
        raise ValueError("empty simulation selection for bipartite projection")
    parts = sorted({part for _, part in weights})
    return BipartiteProjection(sims=sims, parts=parts, weights=weights)


# ---------------------------------------------------------------------------
# Similarity recursion
# ---------------------------------------------------------------------------

@dataclass
class SimilarityResult:
    sims: list[str]
    pairs: list[tuple[str, str, float]]
    part_scores: dict[tuple[str, str], float]
    params: dict[str, object]
    iterations: int
    converged: bool

    def score(self, sim_a: str, sim_b: str) -> float:
        if sim_a == sim_b:
            raise ValueError("self-pairs are not scored")
        a, b = (sim_a, sim_b) if sim_a < sim_b else (sim_b, sim_a)
        for pa, pb, score in self.pairs:
            if (pa, pb) == (a, b):
                return score
        raise KeyError(f"no score for ({sim_a}, {sim_b})")

    def params_key(self) -> str:
        return (
            f"C={self.params['C']},eps={self.params['eps']},"
            f"spread={'on' if self.params['spread'] else 'off'}"
        )


def _spread_factors(matrix: np.ndarray, axis: int, enabled: bool) -> np.ndarray:
    """exp(-variance) of the nonzero incident weights along one axis."""
    n = matrix.shape[1 - axis]
    if not enabled:
        return np.ones(n)
    out = np.ones(n)
    for k in range(n):
        column = matrix[:, k] if axis == 0 else matrix[k, :]
        nonzero = column[column > 0]
        if nonzero.size:
            out[k] = math.exp(-float(np.var(nonzero)))
    return out


def simrank_pp(
    projection: BipartiteProjection,
    decay: float = DEFAULT_DECAY,
    max_iter: int = DEFAULT_MAX_ITER,
    eps: float = DEFAULT_EPS,
    spread: bool = True,
) -> SimilarityResult:
    """Evidence-weighted similarity over the simulation/part bipartite graph."""
    matrix = projection.weight_matrix()
    if not np.isfinite(matrix).all():
        raise ValueError("projection contains non-finite weights")
    n_sims, n_parts = matrix.shape

    spread_parts = _spread_factors(matrix, axis=0, enabled=spread)  # over each part's sims
    spread_sims = _spread_factors(matrix, axis=1, enabled=spread)   # over each sim's parts

    row_sums = matrix.sum(axis=1, keepdims=True)
    col_sums = matrix.sum(axis=0, keepdims=True)
    # W matrices: rows normalized, then damped by the neighbor's spread
    w_sim = (matrix / row_sums) * spread_parts[None, :]          # (sims x parts)
    w_part = (matrix / col_sums).T * spread_sims[None, :]        # (parts x sims)

    s_sim = np.eye(n_sims)
    s_part = np.eye(n_parts)
    iterations = 0
    converged = False
    for iterations in range(1, max_iter + 1):
        new_sim = decay * (w_sim @ s_part @ w_sim.T)
        np.fill_diagonal(new_sim, 1.0)
        new_part = decay * (w_part @ s_sim @ w_part.T)
        np.fill_diagonal(new_part, 1.0)
        delta = max(
            float(np.abs(new_sim - s_sim).max()),
            float(np.abs(new_part - s_part).max()),
        )
        s_sim, s_part = new_sim, new_part
        if delta < eps:
            converged = True
            break

    incidence = matrix > 0
    common_sim = incidence.astype(np.int64) @ incidence.T.astype(np.int64)
    evidence_sim = 1.0 - np.power(2.0, -common_sim.astype(float))
    np.fill_diagonal(evidence_sim, 1.0)
    scores_sim = evidence_sim * s_sim

    common_part = incidence.T.astype(np.int64) @ incidence.astype(np.int64)
    evidence_part = 1.0 - np.power(2.0, -common_part.astype(float))
    np.fill_diagonal(evidence_part, 1.0)
    scores_part = evidence_part * s_part

    pairs: list[tuple[str, str, float]] = []
    for i in range(n_sims):
        for j in range(i + 1, n_sims):
            a, b = projection.sims[i], projection.sims[j]
            if b < a:
                a, b = b, a
            pairs.append((a, b, float(scores_sim[i, j])))
    pairs.sort()

    part_scores = {
        (projection.parts[i], projection.parts[j]): float(scores_part[i, j])
        for i in range(n_parts)
        for j in range(i + 1, n_parts)
    }

    return SimilarityResult(
        sims=list(projection.sims),
        pairs=pairs,
        part_scores=part_scores,
        params={"C": decay, "eps": eps, "max_iter": max_iter, "spread": spread},
        iterations=iterations,
        converged=converged,
    )


def load_similarity(g: PropertyGraph, result: SimilarityResult, top_k: int) -> int:
    """Write each sim's top-k partners as SIM_SIM edges; replaces any prior
    edges produced with the same parameter set."""
    params_key = result.params_key()
    for edge in list(g.edges(EL.SIM_SIM)):
        if edge.props.get("params") == params_key:
            g.remove_edge(edge.id)

    by_sim: dict[str, list[tuple[float, str]]] = {s: [] for s in result.sims}
    for a, b, score in result.pairs:
        if score <= 0.0:
            continue
        by_sim[a].append((score, b))
        by_sim[b].append((score, a))

    selected: set[tuple[str, str]] = set()
    for sim, partners in by_sim.items():
        # descending score; lower partner id wins ties
        partners.sort(key=lambda item: (-item[0], item[1]))
        for score, other in partners[: max(top_k, 0)]:
            selected.add((sim, other) if sim < other else (other, sim))

    count = 0
    for a, b in sorted(selected):
        # same-label parallels are rejected, so a pair scored under another
        # parameter set is overwritten rather than duplicated
        existing = g.find_edge(EL.SIM_SIM, a, b)
        if existing is not None:
            existing.weight = result.score(a, b)
            existing.props["params"] = params_key
        else:
            g.add_edge(EL.SIM_SIM, a, b, result.score(a, b), {"params": params_key})
        count += 1
    return count


def load_caused_to(
    g: PropertyGraph, rows: Iterable[tuple[str, str, float]]
) -> int:
    """Load externally supplied cause/effect strengths as CAUSED_TO edges.

    The edge type is storable and queryable; no inference is run here.
    """
    count = 0
    for change_id, sim_id, weight in rows:
        edge = g.find_edge(EL.CAUSED_TO, change_id, sim_id)
        if edge is None:
            g.add_edge(EL.CAUSED_TO, change_id, sim_id, float(weight))
            count += 1
        else:
            edge.weight = float(weight)
    return count


# ---------------------------------------------------------------------------
# Degree ranking
# ---------------------------------------------------------------------------

def rank_by_degree(
    g: PropertyGraph, label: str, edge_label: str | None = None, k: int = 10
) -> list[tuple[str, int]]:
    """Top-k nodes of a label by incident-edge count; ties broken by id."""
    ranked = [
        (node.id, g.degree(node.id, edge_label, "both")) for node in g.nodes(label)
    ]
    ranked.sort(key=lambda item: (-item[1], item[0]))
    return ranked[: max(k, 0)]


# ---------------------------------------------------------------------------
# Leader clustering of design / behavior features
# ---------------------------------------------------------------------------

TARGET_DES = "des"
TARGET_BEHAV = "behav"


@dataclass
class _Observation:
    key: tuple[str, ...]
    vector: np.ndarray
    part_ids: tuple[str, ...]
    sim_ids: tuple[str, ...] = ()


def _des_observations(g: PropertyGraph) -> list[_Observation]:
    parts = g.nodes(NL.PART)
    mids = sorted({int(p.props.get("material_id", 0)) for p in parts})  # type: ignore[arg-type]
    mid_index = {m: i for i, m in enumerate(mids)}
    out = []
    for part in parts:
        bbox = list(part.props.get("bbox", [0.0] * 6))
        dims = [bbox[3] - bbox[0], bbox[4] - bbox[1], bbox[5] - bbox[2]]
        one_hot = [0.0] * len(mids)
        one_hot[mid_index[int(part.props.get("material_id", 0))]] = 1.0  # type: ignore[arg-type]
        vector = np.array(
            [float(part.props.get("thickness", 0.0))]  # type: ignore[arg-type]
            + one_hot
            + [float(part.props.get("n_elements", 0))]  # type: ignore[arg-type]
            + dims
        )
        out.append(_Observation(key=(part.id,), vector=vector, part_ids=(part.id,)))
    return out


def _behav_observations(g: PropertyGraph) -> list[_Observation]:
    out = []
    for edge in g.edges(EL.NRG_PART):
        vector = np.array(
            [
                float(edge.weight or 0.0),
                float(edge.props.get("t_start", 0.0)),  # type: ignore[arg-type]
                float(edge.props.get("t_end", 0.0)),  # type: ignore[arg-type]
                float(edge.props.get("rate", 0.0)),  # type: ignore[arg-type]
            ]
        )
        out.append(
            _Observation(
                key=(edge.src, edge.dst),
                vector=vector,
                part_ids=(edge.dst,),
                sim_ids=(edge.src,),
            )
        )
    return out


def _standardize(vectors: list[np.ndarray]) -> list[np.ndarray]:
    stacked = np.vstack(vectors)
    mean = stacked.mean(axis=0)
    std = stacked.std(axis=0)
    std[std == 0.0] = 1.0  # constant columns carry no distance
    normalized = (stacked - mean) / std
    return [normalized[i] for i in range(len(vectors))]


def cluster_entities(
    g: PropertyGraph,
    target: str,
    tau: float,
    features: dict[tuple[str, ...], Sequence[float]] | None = None,
) -> list[Node]:
    """Deterministic leader clustering; emits Des or Behav nodes.

    Entities are visited in ascending id order and join the first cluster
    whose leader lies within ``tau`` (standardized Euclidean distance),
    otherwise they found a new cluster. Re-running a target replaces its
    previous cluster nodes.
    """
    if target == TARGET_DES:
        observations = _des_observations(g)
        label, edge_label, prefix = NL.DES, EL.DES_OF, "des"
    elif target == TARGET_BEHAV:
        observations = _behav_observations(g)
        label, edge_label, prefix = NL.BEHAV, EL.BEHAV_OF, "behav"
    else:
        raise ValueError(f"unknown cluster target {target!r} (expected des or behav)")

    if features is not None:
        for obs in observations:
            if obs.key in features:
                obs.vector = np.asarray(features[obs.key], dtype=float)
        observations = [o for o in observations if o.key in features]
    if not observations:
        raise ValueError(f"no entities to cluster for target {target!r}")

    observations.sort(key=lambda o: o.key)
    vectors = _standardize([o.vector for o in observations])

    leaders: list[np.ndarray] = []
    members: list[list[_Observation]] = []
    for obs, vector in zip(observations, vectors):
        for ci, leader in enumerate(leaders):
            if float(np.linalg.norm(vector - leader)) <= tau:
                members[ci].append(obs)
                break
        else:
            leaders.append(vector)
            members.append([obs])

    # replacement semantics: drop previous cluster nodes for this target
    for node in g.nodes(label):
        for edge in g.incident_edges(node.id, direction="both"):
            g.remove_edge(edge.id)
        g.remove_node(node.id)

    created: list[Node] = []
    for ci, (leader, group) in enumerate(zip(leaders, members)):
        node = g.add_node(
            label,
            f"{prefix}:{ci}",
            {"size": len(group), "leader": [float(x) for x in leader]},
        )
        part_ids = sorted({p for obs in group for p in obs.part_ids})
        sim_ids = sorted({s for obs in group for s in obs.sim_ids})
        for part in part_ids:
            g.add_edge(edge_label, node.id, part)
        for sim in sim_ids:
            g.add_edge(edge_label, node.id, sim)
        created.append(node)
    return created


# ---------------------------------------------------------------------------
# Grouped feature aggregation
# ---------------------------------------------------------------------------

def group_features(g: PropertyGraph, grp_id: str, sim_id: str) -> Edge:
    """Aggregate member part energies of a group for one simulation."""
    grp = g.node(grp_id)
    if grp.label != NL.GRP:
        raise ValueError(f"{grp_id!r} is not a Grp node")
    sim = g.node(sim_id)
    if sim.label != NL.SIM:
        raise ValueError(f"{sim_id!r} is not a Sim node")

    member_parts = [
        e.dst for e in g.incident_edges(grp_id, EL.GRP_MEM, "out")
        if g.node(e.dst).label == NL.PART
    ]
    rows: list[tuple[float, float, float]] = []
    for part in member_parts:
        edge = g.find_edge(EL.NRG_PART, sim_id, part)
        if edge is not None:
            rows.append(
                (
                    float(edge.weight or 0.0),
                    float(edge.props.get("t_start", 0.0)),  # type: ignore[arg-type]
                    float(edge.props.get("t_end", 0.0)),  # type: ignore[arg-type]
                )
            )
    if not rows:
        raise ValueError(f"no member of {grp_id!r} absorbs energy in {sim_id!r}")

    weight = sum(r[0] for r in rows)
    props = {"t_start": min(r[1] for r in rows), "t_end": max(r[2] for r in rows)}
    existing = g.find_edge(EL.GRP_FTS, grp_id, sim_id)
    if existing is not None:
        existing.weight = weight
        existing.props.update(props)
        return existing
    return g.add_edge(EL.GRP_FTS, grp_id, sim_id, weight, props)
