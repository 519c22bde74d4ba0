"""Cluster repair for entity-resolution similarity graphs.

Pipeline: ingest a weighted similarity graph, prune weak links, split it
into connected-component clusters, describe every intra-cluster edge with
graph-metric features, train a bootstrap tree ensemble through active
learning against a labeling oracle, classify edges as match / non-match and
re-partition each cluster by iterative support-based merging.
"""

from .errors import (
    DuplicateEdge,
    DuplicateRecordId,
    GraphRepairError,
    InsufficientTraining,
    InvalidSimilarity,
    MissingEdge,
    MissingFeature,
    MissingGold,
    OracleUnavailable,
    ParseError,
    SelfLoopEdge,
    UnknownRecord,
)
from .graph import (
    Cluster,
    LinkCategory,
    Record,
    SimilarityGraph,
    build_graph,
    categorize_link,
    connected_components,
    prune_weak_edges,
    source_map,
)

__all__ = [
    "Cluster",
    "DuplicateEdge",
    "DuplicateRecordId",
    "GraphRepairError",
    "InsufficientTraining",
    "InvalidSimilarity",
    "LinkCategory",
    "MissingEdge",
    "MissingFeature",
    "MissingGold",
    "OracleUnavailable",
    "ParseError",
    "Record",
    "SelfLoopEdge",
    "SimilarityGraph",
    "UnknownRecord",
    "build_graph",
    "categorize_link",
    "connected_components",
    "prune_weak_edges",
    "source_map",
]

__version__ = "0.1.0"
