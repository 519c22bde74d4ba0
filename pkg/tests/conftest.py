import numpy as np
import pytest

from graphrepair import kernels
from graphrepair.graph import Cluster, Record, SimilarityGraph, build_graph


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile every kernel once so timed tests never pay JIT cost."""
    kernels.warm_up()


def make_records(spec):
    """spec: iterable of (record_id, source_id)."""
    return [Record(rid, src, {"name": rid}) for rid, src in spec]


def make_graph(record_spec, edges) -> SimilarityGraph:
    return build_graph(make_records(record_spec), edges)


def make_cluster(edges, cluster_id=0, extra_nodes=()) -> Cluster:
    """Cluster from (u, v, sim) triples plus optional isolated nodes."""
    nodes = set(extra_nodes)
    edge_map = {}
    for u, v, sim in edges:
        nodes.update((u, v))
        edge_map[(u, v)] = sim
    return Cluster(cluster_id, nodes, edge_map)


def random_connected_cluster(rng: np.random.Generator, n: int, extra_edge_prob=0.3):
    """Random connected graph over n nodes: a random spanning tree plus
    Bernoulli extra edges, uniform similarities."""
    ids = [f"n{i:02d}" for i in range(n)]
    edges = {}
    for i in range(1, n):
        j = int(rng.integers(0, i))
        edges[(ids[j], ids[i])] = float(rng.random())
    for i in range(n):
        for j in range(i + 1, n):
            key = (ids[i], ids[j])
            if key not in edges and rng.random() < extra_edge_prob:
                edges[key] = float(rng.random())
    return Cluster(0, ids, edges)
