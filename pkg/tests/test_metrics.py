"""Metric implementations against independent brute-force oracles."""

import itertools
from collections import deque

import numpy as np
import pytest

from graphrepair.graph import Cluster
from graphrepair.metrics import (
    betweenness,
    bridges,
    closeness,
    clustering_coefficient,
    complete_ratio,
    compute_cluster_metrics,
    pagerank,
    pagerank_with_status,
)

from conftest import make_cluster, random_connected_cluster


# --- oracles -----------------------------------------------------------


def oracle_pagerank(cluster, damping=0.85, iterations=20000, tol=1e-14):
    """Dense-matrix power iteration, independent of the CSR kernel."""
    ids = cluster.member_ids
    n = len(ids)
    idx = {r: i for i, r in enumerate(ids)}
    W = np.zeros((n, n))
    for u, v, sim in cluster.edges():
        W[idx[u], idx[v]] = sim
        W[idx[v], idx[u]] = sim
    out = W.sum(axis=1)
    x = np.full(n, 1.0 / n)
    for _ in range(iterations):
        contrib = np.zeros(n)
        dangling = 0.0
        for u in range(n):
            if out[u] > 0:
                contrib += x[u] * W[u] / out[u]
            else:
                dangling += x[u]
        new = (1 - damping) / n + damping * (contrib + dangling / n)
        if np.abs(new - x).sum() < tol:
            x = new
            break
        x = new
    return dict(zip(ids, (x / x.sum()).tolist()))


def _bfs_dist(adj, start):
    dist = {start: 0}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def _adjacency(cluster):
    adj = {rid: set() for rid in cluster.member_ids}
    for u, v, _ in cluster.edges():
        adj[u].add(v)
        adj[v].add(u)
    return adj


def oracle_closeness(cluster):
    adj = _adjacency(cluster)
    n = cluster.size
    out = {}
    for v in cluster.member_ids:
        total = sum(_bfs_dist(adj, v).values())
        out[v] = (n - 1) / total if total else 0.0
    return out


def _all_shortest_paths(adj, s, t, dist):
    """Enumerate every shortest s->t path (node sequences)."""
    if s == t:
        return [[s]]
    paths = []

    def extend(path):
        u = path[-1]
        if u == t:
            paths.append(list(path))
            return
        for v in adj[u]:
            if dist.get(v) == dist[u] + 1 and dist.get(t, np.inf) >= dist[v]:
                path.append(v)
                extend(path)
                path.pop()

    extend([s])
    return [p for p in paths if len(p) - 1 == dist[t]]


def oracle_betweenness(cluster):
    """Exhaustive path enumeration over unordered pairs."""
    adj = _adjacency(cluster)
    node_bt = {rid: 0.0 for rid in cluster.member_ids}
    edge_bt = {pair: 0.0 for pair in cluster.edge_pairs()}
    ids = cluster.member_ids
    for i, s in enumerate(ids):
        dist = _bfs_dist(adj, s)
        for t in ids[i + 1 :]:
            if t not in dist:
                continue
            paths = _all_shortest_paths(adj, s, t, dist)
            share = 1.0 / len(paths)
            for path in paths:
                for node in path[1:-1]:
                    node_bt[node] += share
                for a, b in zip(path, path[1:]):
                    edge_bt[tuple(sorted((a, b)))] += share
    return node_bt, edge_bt


def oracle_clustering_coefficient(cluster):
    adj = _adjacency(cluster)
    out = {}
    for v in cluster.member_ids:
        nbrs = sorted(adj[v])
        d = len(nbrs)
        if d < 2:
            out[v] = 0.0
            continue
        links = sum(
            1 for a, b in itertools.combinations(nbrs, 2) if b in adj[a]
        )
        out[v] = 2.0 * links / (d * (d - 1))
    return out


def _component_count(nodes, edges):
    adj = {n: set() for n in nodes}
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    seen = set()
    count = 0
    for start in nodes:
        if start in seen:
            continue
        count += 1
        queue = deque([start])
        seen.add(start)
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
    return count


def oracle_bridges(cluster):
    pairs = cluster.edge_pairs()
    nodes = cluster.member_ids
    base = _component_count(nodes, pairs)
    return {
        pair
        for pair in pairs
        if _component_count(nodes, [p for p in pairs if p != pair]) > base
    }


# --- trivial cases ------------------------------------------------------


def test_pagerank_singleton():
    c = make_cluster([], extra_nodes=["a"])
    assert pagerank(c) == {"a": 1.0}


def test_pagerank_symmetric_triangle():
    c = make_cluster([("a", "b", 0.6), ("b", "c", 0.6), ("a", "c", 0.6)])
    scores = pagerank(c)
    for v in scores.values():
        assert v == pytest.approx(1 / 3, abs=1e-8)


def test_pagerank_path_matches_oracle():
    c = make_cluster([("a", "b", 1.0), ("b", "c", 1.0)])
    expected = oracle_pagerank(c)
    actual = pagerank(c, tolerance=1e-12)
    for rid in expected:
        assert actual[rid] == pytest.approx(expected[rid], abs=1e-9)


def test_pagerank_nonconvergence_warns():
    c = make_cluster([("a", "b", 1.0), ("b", "c", 1.0)])
    with pytest.warns(RuntimeWarning):
        scores, converged = pagerank_with_status(c, tolerance=1e-15, max_iterations=2)
    assert not converged
    assert sum(scores.values()) == pytest.approx(1.0, abs=1e-8)


def test_closeness_path():
    c = make_cluster([("a", "b", 1.0), ("b", "c", 1.0)])
    vals = closeness(c)
    assert vals["b"] == pytest.approx(1.0)
    assert vals["a"] == pytest.approx(2 / 3)
    assert vals["c"] == pytest.approx(2 / 3)


def test_closeness_singleton_zero():
    assert closeness(make_cluster([], extra_nodes=["x"])) == {"x": 0.0}


def test_betweenness_star():
    c = make_cluster([("c0", "l1", 1.0), ("c0", "l2", 1.0), ("c0", "l3", 1.0)])
    node_bt, edge_bt = betweenness(c)
    assert node_bt["c0"] == pytest.approx(3.0)
    assert all(node_bt[f"l{i}"] == 0.0 for i in (1, 2, 3))
    # each star edge carries its leaf's paths to the other two + the pair to c0
    assert all(v == pytest.approx(3.0) for v in edge_bt.values())


def test_betweenness_triangle_zero():
    c = make_cluster([("a", "b", 1.0), ("b", "c", 1.0), ("a", "c", 1.0)])
    node_bt, _ = betweenness(c)
    assert all(v == 0.0 for v in node_bt.values())


def test_tree_edge_betweenness_counts_side_products():
    # path of 5: edge (i, i+1) separates (i+1) * (n-i-1) pairs
    ids = [f"n{i}" for i in range(5)]
    c = make_cluster([(ids[i], ids[i + 1], 1.0) for i in range(4)])
    _, edge_bt = betweenness(c)
    for i in range(4):
        expected = (i + 1) * (5 - i - 1)
        assert edge_bt[tuple(sorted((ids[i], ids[i + 1])))] == pytest.approx(expected)


def test_clustering_coefficient_triangle_and_star():
    tri = make_cluster([("a", "b", 1.0), ("b", "c", 1.0), ("a", "c", 1.0)])
    assert all(v == 1.0 for v in clustering_coefficient(tri).values())
    star = make_cluster([("c0", "l1", 1.0), ("c0", "l2", 1.0), ("c0", "l3", 1.0)])
    assert clustering_coefficient(star)["c0"] == 0.0


def test_bridges_tree_and_cycle():
    tree = make_cluster([("a", "b", 1.0), ("b", "c", 1.0), ("b", "d", 1.0)])
    assert bridges(tree) == set(tree.edge_pairs())
    cycle = make_cluster([("a", "b", 1.0), ("b", "c", 1.0), ("a", "c", 1.0)])
    assert bridges(cycle) == set()


def test_complete_ratio_cases():
    tri = make_cluster([("a", "b", 1.0), ("b", "c", 1.0), ("a", "c", 1.0)])
    assert complete_ratio(tri) == pytest.approx(1.0)
    path3 = make_cluster([("a", "b", 1.0), ("b", "c", 1.0)])
    assert complete_ratio(path3) == pytest.approx(2 / 3)
    four = make_cluster([("a", "b", 1.0), ("b", "c", 1.0), ("c", "d", 1.0)])
    assert complete_ratio(four) == pytest.approx(0.5)
    assert complete_ratio(make_cluster([], extra_nodes=["x"])) == 1.0


# --- randomized oracle equivalence ---------------------------------------


def test_metrics_match_oracles_on_random_graphs():
    rng = np.random.default_rng(101)
    for _ in range(60):
        n = int(rng.integers(2, 9))
        c = random_connected_cluster(rng, n)

        node_bt, edge_bt = betweenness(c)
        exp_node, exp_edge = oracle_betweenness(c)
        for rid in c.member_ids:
            assert node_bt[rid] == pytest.approx(exp_node[rid], abs=1e-9)
        for pair in c.edge_pairs():
            assert edge_bt[pair] == pytest.approx(exp_edge[pair], abs=1e-9)

        close = closeness(c)
        exp_close = oracle_closeness(c)
        for rid in c.member_ids:
            assert close[rid] == pytest.approx(exp_close[rid], abs=1e-9)

        cc = clustering_coefficient(c)
        exp_cc = oracle_clustering_coefficient(c)
        for rid in c.member_ids:
            assert cc[rid] == pytest.approx(exp_cc[rid], abs=1e-9)

        assert bridges(c) == oracle_bridges(c)

        assert sum(pagerank(c).values()) == pytest.approx(1.0, abs=1e-8)


def test_metrics_invariant_under_relabeling():
    rng = np.random.default_rng(31)
    for _ in range(10):
        n = int(rng.integers(3, 8))
        c = random_connected_cluster(rng, n)
        perm = rng.permutation(n)
        mapping = {
            rid: f"z{perm[i]:02d}" for i, rid in enumerate(c.member_ids)
        }
        edges = {
            (mapping[u], mapping[v]): sim for u, v, sim in c.edges()
        }
        relabeled = Cluster(0, mapping.values(), edges)

        for metric in (pagerank, closeness, clustering_coefficient):
            left = metric(c)
            right = metric(relabeled)
            for rid in c.member_ids:
                assert left[rid] == pytest.approx(right[mapping[rid]], abs=1e-12)
        node_l, edge_l = betweenness(c)
        node_r, edge_r = betweenness(relabeled)
        for rid in c.member_ids:
            assert node_l[rid] == pytest.approx(node_r[mapping[rid]], abs=1e-12)
        for u, v in c.edge_pairs():
            mapped = tuple(sorted((mapping[u], mapping[v])))
            assert edge_l[(u, v)] == pytest.approx(edge_r[mapped], abs=1e-12)
        assert {tuple(sorted((mapping[u], mapping[v]))) for u, v in bridges(c)} == bridges(
            relabeled
        )
        assert complete_ratio(c) == complete_ratio(relabeled)


def test_cluster_metrics_bundle_consistent():
    rng = np.random.default_rng(41)
    c = random_connected_cluster(rng, 7)
    sources = {rid: "s1" for rid in c.member_ids}
    cm = compute_cluster_metrics(c, sources)
    pr = pagerank(c)
    close = closeness(c)
    node_bt, edge_bt = betweenness(c)
    cc = clustering_coefficient(c)
    br = bridges(c)
    for rid in c.member_ids:
        assert cm.nodes[rid].pagerank == pytest.approx(pr[rid], abs=1e-12)
        assert cm.nodes[rid].closeness == pytest.approx(close[rid], abs=1e-12)
        assert cm.nodes[rid].betweenness == pytest.approx(node_bt[rid], abs=1e-12)
        assert cm.nodes[rid].clustering_coefficient == pytest.approx(cc[rid], abs=1e-12)
    for pair in c.edge_pairs():
        assert cm.edges[pair].edge_betweenness == pytest.approx(edge_bt[pair], abs=1e-12)
        assert cm.edges[pair].is_bridge == (pair in br)
        assert cm.edges[pair].similarity == c.similarity(*pair)
    assert cm.graph.complete_ratio == complete_ratio(c)


def test_singleton_bundle_defaults():
    c = make_cluster([], extra_nodes=["only"])
    cm = compute_cluster_metrics(c, {"only": "s1"})
    nm = cm.nodes["only"]
    assert (nm.pagerank, nm.closeness, nm.betweenness, nm.clustering_coefficient) == (
        1.0,
        0.0,
        0.0,
        0.0,
    )
    assert cm.graph.complete_ratio == 1.0
    assert cm.edges == {}
