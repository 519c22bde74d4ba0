"""Per-cluster graph metrics: PageRank, centralities, bridges, density.

All metrics are computed on a cluster's induced subgraph. PageRank consumes
edge similarities as transition weights; closeness and betweenness use
unweighted hop distances. Betweenness is exact and unnormalized, counted
over unordered node pairs.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from . import kernels
from .graph import Cluster, LinkCategory, categorize_link

PAGERANK_DAMPING = 0.85
PAGERANK_TOLERANCE = 1e-10
PAGERANK_MAX_ITERATIONS = 200


@dataclass(frozen=True)
class NodeMetrics:
    pagerank: float
    closeness: float
    betweenness: float
    clustering_coefficient: float


@dataclass(frozen=True)
class EdgeMetrics:
    similarity: float
    link_category: LinkCategory
    is_bridge: bool
    edge_betweenness: float


@dataclass(frozen=True)
class GraphMetrics:
    complete_ratio: float


@dataclass(frozen=True)
class ClusterMetrics:
    nodes: dict[str, NodeMetrics]
    edges: dict[tuple[str, str], EdgeMetrics]
    graph: GraphMetrics
    pagerank_converged: bool


def _csr(cluster: Cluster):
    """CSR arrays for the induced subgraph; rows sorted by neighbor index."""
    ids = cluster.member_ids
    index = {rid: i for i, rid in enumerate(ids)}
    n = len(ids)
    pairs = cluster.edge_pairs()
    m = len(pairs)
    rows = np.empty(2 * m, dtype=np.int64)
    cols = np.empty(2 * m, dtype=np.int64)
    wts = np.empty(2 * m, dtype=np.float64)
    eids = np.empty(2 * m, dtype=np.int64)
    for eid, (u, v) in enumerate(pairs):
        sim = cluster.similarity(u, v)
        iu, iv = index[u], index[v]
        rows[2 * eid] = iu
        cols[2 * eid] = iv
        rows[2 * eid + 1] = iv
        cols[2 * eid + 1] = iu
        wts[2 * eid] = sim
        wts[2 * eid + 1] = sim
        eids[2 * eid] = eid
        eids[2 * eid + 1] = eid
    sort = np.lexsort((cols, rows))
    rows, cols, wts, eids = rows[sort], cols[sort], wts[sort], eids[sort]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, rows + 1, 1)
    indptr = np.cumsum(indptr)
    return indptr, cols, wts, eids, pairs, index


def pagerank(
    cluster: Cluster,
    damping: float = PAGERANK_DAMPING,
    tolerance: float = PAGERANK_TOLERANCE,
    max_iterations: int = PAGERANK_MAX_ITERATIONS,
) -> dict[str, float]:
    scores, _ = pagerank_with_status(cluster, damping, tolerance, max_iterations)
    return scores


def pagerank_with_status(
    cluster: Cluster,
    damping: float = PAGERANK_DAMPING,
    tolerance: float = PAGERANK_TOLERANCE,
    max_iterations: int = PAGERANK_MAX_ITERATIONS,
) -> tuple[dict[str, float], bool]:
    if cluster.size == 1:
        return {cluster.member_ids[0]: 1.0}, True
    indptr, cols, wts, _, _, _ = _csr(cluster)
    ranks, _, converged = kernels.pagerank_csr(
        indptr, cols, wts, damping, tolerance, max_iterations
    )
    if not converged:
        warnings.warn(
            f"pagerank did not converge within {max_iterations} iterations "
            f"for cluster {cluster.cluster_id}",
            RuntimeWarning,
            stacklevel=2,
        )
    return dict(zip(cluster.member_ids, ranks.tolist())), converged


def closeness(cluster: Cluster) -> dict[str, float]:
    if cluster.size == 1:
        return {cluster.member_ids[0]: 0.0}
    indptr, cols, _, eids, pairs, _ = _csr(cluster)
    n = cluster.size
    _, _, dist_sum = kernels.shortest_path_stats(indptr, cols, eids, n, len(pairs))
    vals = [(n - 1) / s if s > 0 else 0.0 for s in dist_sum.tolist()]
    return dict(zip(cluster.member_ids, vals))


def betweenness(
    cluster: Cluster,
) -> tuple[dict[str, float], dict[tuple[str, str], float]]:
    if cluster.size == 1:
        return {cluster.member_ids[0]: 0.0}, {}
    indptr, cols, _, eids, pairs, _ = _csr(cluster)
    n = cluster.size
    node_bt, edge_bt, _ = kernels.shortest_path_stats(indptr, cols, eids, n, len(pairs))
    return (
        dict(zip(cluster.member_ids, node_bt.tolist())),
        dict(zip(pairs, edge_bt.tolist())),
    )


def clustering_coefficient(cluster: Cluster) -> dict[str, float]:
    if cluster.size == 1:
        return {cluster.member_ids[0]: 0.0}
    indptr, cols, _, _, _, _ = _csr(cluster)
    n = cluster.size
    tri = kernels.triangle_counts(indptr, cols, n)
    deg = np.diff(indptr)
    out = {}
    for i, rid in enumerate(cluster.member_ids):
        d = int(deg[i])
        out[rid] = 2.0 * tri[i] / (d * (d - 1)) if d >= 2 else 0.0
    return out


def bridges(cluster: Cluster) -> set[tuple[str, str]]:
    if cluster.edge_count == 0:
        return set()
    indptr, cols, _, eids, pairs, _ = _csr(cluster)
    flags = kernels.find_bridges(indptr, cols, eids, cluster.size, len(pairs))
    return {pair for pair, flag in zip(pairs, flags.tolist()) if flag}


def complete_ratio(cluster: Cluster) -> float:
    n = cluster.size
    if n < 2:
        return 1.0
    return cluster.edge_count / (n * (n - 1) / 2)


def compute_cluster_metrics(
    cluster: Cluster, sources: Mapping[str, str]
) -> ClusterMetrics:
    """All metrics of a cluster in one pass over its CSR form.

    Link categories are computed on the induced subgraph, which for a
    connected component carries every incident edge of its members.
    """
    if cluster.size == 1:
        rid = cluster.member_ids[0]
        return ClusterMetrics(
            nodes={rid: NodeMetrics(1.0, 0.0, 0.0, 0.0)},
            edges={},
            graph=GraphMetrics(complete_ratio=1.0),
            pagerank_converged=True,
        )

    indptr, cols, wts, eids, pairs, _ = _csr(cluster)
    n = cluster.size
    m = len(pairs)

    ranks, _, converged = kernels.pagerank_csr(
        indptr, cols, wts, PAGERANK_DAMPING, PAGERANK_TOLERANCE, PAGERANK_MAX_ITERATIONS
    )
    if not converged:
        warnings.warn(
            f"pagerank did not converge for cluster {cluster.cluster_id}",
            RuntimeWarning,
            stacklevel=2,
        )
    node_bt, edge_bt, dist_sum = kernels.shortest_path_stats(indptr, cols, eids, n, m)
    tri = kernels.triangle_counts(indptr, cols, n)
    bridge_flags = kernels.find_bridges(indptr, cols, eids, n, m)
    deg = np.diff(indptr)

    subgraph = cluster.subgraph()
    nodes = {}
    for i, rid in enumerate(cluster.member_ids):
        d = int(deg[i])
        nodes[rid] = NodeMetrics(
            pagerank=float(ranks[i]),
            closeness=(n - 1) / float(dist_sum[i]) if dist_sum[i] > 0 else 0.0,
            betweenness=float(node_bt[i]),
            clustering_coefficient=2.0 * tri[i] / (d * (d - 1)) if d >= 2 else 0.0,
        )
    edges = {}
    for eid, pair in enumerate(pairs):
        edges[pair] = EdgeMetrics(
            similarity=cluster.similarity(*pair),
            link_category=categorize_link(subgraph, sources, pair),
            is_bridge=bool(bridge_flags[eid]),
            edge_betweenness=float(edge_bt[eid]),
        )
    return ClusterMetrics(
        nodes=nodes,
        edges=edges,
        graph=GraphMetrics(complete_ratio=complete_ratio(cluster)),
        pagerank_converged=converged,
    )
