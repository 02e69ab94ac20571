"""cargraph: a typed property graph for crash CAE and assessment data."""

from .graph import (
    Edge,
    EdgeLabelSpec,
    GraphError,
    Node,
    NodeLabelSpec,
    PropertyGraph,
    PropertySpec,
    SchemaDef,
    SchemaError,
    create_graph,
)
from .schema import EL, NL, Violation, car_schema, validate_graph
from .keyword import FEModel, Metadata, parse_keyword_file, parse_model, part_connectivity, load_model
from .diff import DiffReport, Tolerances, change_key, diff_models, load_diff
from .simresult import EnergyFeatures, SimResult, energy_features, load_sim, parse_sim_result
from .ncap import NcapRecord, load_ncap, load_protocols, parse_protocol_url, parse_result_page
from .analytics import (
    BipartiteProjection,
    SimilarityResult,
    build_bipartite,
    cluster_entities,
    group_features,
    load_similarity,
    rank_by_degree,
    simrank_pp,
)
from .serialize import export_graph, graphs_equal, import_graph

__version__ = "0.1.0"

__all__ = [
    "BipartiteProjection",
    "DiffReport",
    "Edge",
    "EdgeLabelSpec",
    "EnergyFeatures",
    "EL",
    "FEModel",
    "GraphError",
    "Metadata",
    "NcapRecord",
    "NL",
    "Node",
    "NodeLabelSpec",
    "PropertyGraph",
    "PropertySpec",
    "SchemaDef",
    "SchemaError",
    "SimResult",
    "SimilarityResult",
    "Tolerances",
    "Violation",
    "build_bipartite",
    "car_schema",
    "change_key",
    "cluster_entities",
    "create_graph",
    "diff_models",
    "energy_features",
    "export_graph",
    "graphs_equal",
    "group_features",
    "import_graph",
    "load_diff",
    "load_model",
    "load_ncap",
    "load_protocols",
    "load_sim",
    "load_similarity",
    "parse_keyword_file",
    "parse_model",
    "parse_protocol_url",
    "parse_result_page",
    "parse_sim_result",
    "part_connectivity",
    "rank_by_degree",
    "simrank_pp",
    "validate_graph",
]
