"""Edge feature vectors: assembly, deduplication and min-max scaling.

Every intra-cluster edge is described by a fixed 13-dimensional vector:
two 4-value endpoint blocks (pagerank, closeness, betweenness, clustering
coefficient) in canonicalized order, then similarity, link category,
bridge flag, edge betweenness and the cluster's complete ratio. Vectors are
rounded to six decimals and deduplicated; one vector may describe many
structurally identical edges across clusters.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import MissingFeature
from .graph import Cluster
from .metrics import compute_cluster_metrics

DIMENSIONS = 13
ROUND_DECIMALS = 6

IDX_SIMILARITY = 8
IDX_LINK_CATEGORY = 9
IDX_IS_BRIDGE = 10
IDX_EDGE_BETWEENNESS = 11
IDX_COMPLETE_RATIO = 12

COLUMN_NAMES = (
    "pagerank_a",
    "closeness_a",
    "betweenness_a",
    "clustering_coefficient_a",
    "pagerank_b",
    "closeness_b",
    "betweenness_b",
    "clustering_coefficient_b",
    "similarity",
    "link_category",
    "is_bridge",
    "edge_betweenness",
    "complete_ratio",
)

EdgeRef = tuple[int, tuple[str, str]]


def _round6(x: float) -> float:
    return round(float(x), ROUND_DECIMALS) + 0.0


def canonical_block_order(
    block_u: Sequence[float], block_v: Sequence[float]
) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """Order two endpoint blocks lexicographically by their rounded values.

    Equal blocks keep the input order, so swapping the inputs always yields
    the same output pair and the assembled vector is orientation-free.
    """
    a = tuple(_round6(x) for x in block_u)
    b = tuple(_round6(x) for x in block_v)
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class EdgeFeatureVector:
    vector_id: int
    values: tuple[float, ...]
    member_edges: frozenset[EdgeRef]

    def __post_init__(self):
        if len(self.values) != DIMENSIONS:
            raise ValueError(f"expected {DIMENSIONS} values, got {len(self.values)}")


class FeatureSpace:
    """All unique edge vectors plus the edge/cluster bookkeeping around them."""

    def __init__(self, vectors: list[EdgeFeatureVector]):
        self.vectors = vectors
        self._by_edge: dict[EdgeRef, int] = {}
        for vec in vectors:
            for ref in vec.member_edges:
                self._by_edge[ref] = vec.vector_id
        if vectors:
            matrix = np.array([v.values for v in vectors], dtype=np.float64)
        else:
            matrix = np.zeros((0, DIMENSIONS), dtype=np.float64)
        self._matrix = matrix
        self.dim_min = matrix.min(axis=0) if len(vectors) else np.zeros(DIMENSIONS)
        self.dim_max = matrix.max(axis=0) if len(vectors) else np.zeros(DIMENSIONS)

    def __len__(self) -> int:
        return len(self.vectors)

    def vector(self, vector_id: int) -> EdgeFeatureVector:
        return self.vectors[vector_id]

    def vector_for_edge(self, cluster_id: int, edge: tuple[str, str]) -> EdgeFeatureVector:
        pair = tuple(sorted(edge))
        vid = self._by_edge.get((cluster_id, pair))
        if vid is None:
            raise MissingFeature(f"no feature vector for edge {pair} in cluster {cluster_id}")
        return self.vectors[vid]

    def matrix(self) -> np.ndarray:
        """Raw values, one row per vector, row index == vector_id."""
        return self._matrix

    def clusters_of_vector(self, vector_id: int) -> tuple[int, ...]:
        return tuple(sorted({cid for cid, _ in self.vectors[vector_id].member_edges}))

    def representative_edge(self, vector_id: int) -> EdgeRef:
        """The member edge with the smallest (cluster_id, pair); used when a
        concrete record pair must be shown to an oracle."""
        return min(self.vectors[vector_id].member_edges)

    def normalize(self, values: Sequence[float]) -> np.ndarray:
        """Min-max scale a 13-vector to [0, 1]; constant dimensions map to 0."""
        return self.normalize_matrix(np.asarray(values, dtype=np.float64)[None, :])[0]

    def normalize_matrix(self, rows: np.ndarray) -> np.ndarray:
        span = self.dim_max - self.dim_min
        safe = np.where(span > 0, span, 1.0)
        out = (rows - self.dim_min) / safe
        out[:, span == 0] = 0.0
        return out

    def total_member_edges(self) -> int:
        return sum(len(v.member_edges) for v in self.vectors)

    def export_matrix(self, path) -> None:
        """Write the unique vectors as CSV: 13 feature columns + vector_id."""
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(",".join(COLUMN_NAMES + ("vector_id",)) + "\n")
            for vec in self.vectors:
                cells = [repr(x) for x in vec.values] + [str(vec.vector_id)]
                fh.write(",".join(cells) + "\n")


def edge_feature_values(
    cluster_metrics, cluster: Cluster, edge: tuple[str, str]
) -> tuple[float, ...]:
    """The rounded 13-tuple describing one edge of a cluster."""
    u, v = sorted(edge)
    nm_u = cluster_metrics.nodes[u]
    nm_v = cluster_metrics.nodes[v]
    em = cluster_metrics.edges[(u, v)]
    block_u = (nm_u.pagerank, nm_u.closeness, nm_u.betweenness, nm_u.clustering_coefficient)
    block_v = (nm_v.pagerank, nm_v.closeness, nm_v.betweenness, nm_v.clustering_coefficient)
    first, second = canonical_block_order(block_u, block_v)
    return first + second + (
        _round6(em.similarity),
        float(int(em.link_category)),
        1.0 if em.is_bridge else 0.0,
        _round6(em.edge_betweenness),
        _round6(cluster_metrics.graph.complete_ratio),
    )


def build_features(
    clusters: Iterable[Cluster], sources: Mapping[str, str]
) -> FeatureSpace:
    """Compute one deduplicated vector per unique rounded 13-tuple.

    Vector ids follow first appearance over clusters in ascending id order
    and edges in ascending pair order, so construction is deterministic.
    """
    by_tuple: dict[tuple[float, ...], int] = {}
    members: list[set[EdgeRef]] = []
    for cluster in sorted(clusters, key=lambda c: c.cluster_id):
        if cluster.edge_count == 0:
            continue
        cm = compute_cluster_metrics(cluster, sources)
        for u, v, _ in cluster.edges():
            values = edge_feature_values(cm, cluster, (u, v))
            vid = by_tuple.get(values)
            if vid is None:
                vid = len(members)
                by_tuple[values] = vid
                members.append(set())
            members[vid].add((cluster.cluster_id, (u, v)))
    vectors = [
        EdgeFeatureVector(vid, values, frozenset(members[vid]))
        for values, vid in sorted(by_tuple.items(), key=lambda kv: kv[1])
    ]
    return FeatureSpace(vectors)
