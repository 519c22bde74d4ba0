"""Loop-level numeric kernels behind the graph metrics and the tree ensemble.

Every kernel is plain loop code over numpy arrays, written so the exact same
source runs in two modes:

* compiled with numba's ``@njit`` (the default whenever numba imports), or
* as pure Python/numpy when the ``GRAPHREPAIR_NUMBA`` environment variable is
  set to ``0``/``false``/``off`` (or numba is not installed).

Both paths execute identical arithmetic, so results are bit-identical; the
compiled path is just much faster. ``benchmarks/kernel_bench.py`` measures the
difference. ``python_impl(fn)`` returns the uncompiled twin of a kernel.

Graphs are passed in CSR form: ``indptr`` (n+1), ``indices`` (2m neighbor
ids), and parallel per-entry arrays ``weights`` / ``edge_ids`` where both
directions of an undirected edge carry the same edge id.
"""

from __future__ import annotations

import os

import numpy as np


def _numba_requested() -> bool:
    flag = os.environ.get("GRAPHREPAIR_NUMBA", "1").strip().lower()
    return flag not in ("0", "false", "no", "off")


NUMBA_ENABLED = False
if _numba_requested():
    try:
        from numba import njit

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - exercised via env flag instead
        pass

if not NUMBA_ENABLED:

    def njit(*args, **kwargs):  # noqa: F811 - fallback decorator
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap


def python_impl(fn):
    """Return the pure-Python twin of a (possibly jitted) kernel."""
    return getattr(fn, "py_func", fn)


@njit(cache=True)
def shortest_path_stats(indptr, indices, edge_ids, n, m):
    """Single pass of Brandes' algorithm over every source node.

    Returns node betweenness, edge betweenness (both over unordered pairs,
    endpoints excluded for nodes) and the per-node sum of hop distances used
    for closeness. Assumes a connected graph.
    """
    node_bt = np.zeros(n, dtype=np.float64)
    edge_bt = np.zeros(m, dtype=np.float64)
    dist_sum = np.zeros(n, dtype=np.float64)

    dist = np.empty(n, dtype=np.int64)
    sigma = np.empty(n, dtype=np.float64)
    delta = np.empty(n, dtype=np.float64)
    order = np.empty(n, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)

    for s in range(n):
        for i in range(n):
            dist[i] = -1
            sigma[i] = 0.0
            delta[i] = 0.0
        dist[s] = 0
        sigma[s] = 1.0
        head = 0
        tail = 0
        queue[tail] = s
        tail += 1
        cnt = 0
        while head < tail:
            u = queue[head]
            head += 1
            order[cnt] = u
            cnt += 1
            du = dist[u]
            for e in range(indptr[u], indptr[u + 1]):
                v = indices[e]
                if dist[v] < 0:
                    dist[v] = du + 1
                    queue[tail] = v
                    tail += 1
                if dist[v] == du + 1:
                    sigma[v] += sigma[u]
        total = 0.0
        for i in range(cnt):
            total += dist[order[i]]
        dist_sum[s] = total
        for i in range(cnt - 1, -1, -1):
            w = order[i]
            coeff = (1.0 + delta[w]) / sigma[w]
            dw = dist[w]
            for e in range(indptr[w], indptr[w + 1]):
                v = indices[e]
                if dist[v] == dw - 1:
                    c = sigma[v] * coeff
                    delta[v] += c
                    edge_bt[edge_ids[e]] += c
            if w != s:
                node_bt[w] += delta[w]

    for i in range(n):
        node_bt[i] *= 0.5
    for j in range(m):
        edge_bt[j] *= 0.5
    return node_bt, edge_bt, dist_sum


@njit(cache=True)
def triangle_counts(indptr, indices, n):
    """Triangles through each node; adjacency rows must be sorted."""
    tri = np.zeros(n, dtype=np.int64)
    for u in range(n):
        start = indptr[u]
        end = indptr[u + 1]
        for a in range(start, end):
            v = indices[a]
            for b in range(a + 1, end):
                w = indices[b]
                lo = indptr[v]
                hi = indptr[v + 1]
                while lo < hi:
                    mid = (lo + hi) // 2
                    if indices[mid] < w:
                        lo = mid + 1
                    else:
                        hi = mid
                if lo < indptr[v + 1] and indices[lo] == w:
                    tri[u] += 1
    return tri


@njit(cache=True)
def find_bridges(indptr, indices, edge_ids, n, m):
    """Mark bridge edges with an iterative low-link traversal."""
    is_bridge = np.zeros(m, dtype=np.bool_)
    disc = np.full(n, -1, dtype=np.int64)
    low = np.zeros(n, dtype=np.int64)
    parent = np.full(n, -1, dtype=np.int64)
    parent_eid = np.full(n, -1, dtype=np.int64)
    ptr = np.zeros(n, dtype=np.int64)
    stack = np.empty(n, dtype=np.int64)
    timer = 0
    for root in range(n):
        if disc[root] >= 0:
            continue
        top = 0
        stack[0] = root
        disc[root] = timer
        low[root] = timer
        timer += 1
        ptr[root] = indptr[root]
        while top >= 0:
            u = stack[top]
            if ptr[u] < indptr[u + 1]:
                e = ptr[u]
                ptr[u] += 1
                v = indices[e]
                eid = edge_ids[e]
                if eid == parent_eid[u]:
                    continue
                if disc[v] < 0:
                    disc[v] = timer
                    low[v] = timer
                    timer += 1
                    parent[v] = u
                    parent_eid[v] = eid
                    ptr[v] = indptr[v]
                    top += 1
                    stack[top] = v
                elif disc[v] < low[u]:
                    low[u] = disc[v]
            else:
                top -= 1
                p = parent[u]
                if p >= 0:
                    if low[u] < low[p]:
                        low[p] = low[u]
                    if low[u] > disc[p]:
                        is_bridge[parent_eid[u]] = True
    return is_bridge


@njit(cache=True)
def pagerank_csr(indptr, indices, weights, damping, tol, max_iter):
    """Similarity-weighted PageRank by power iteration.

    Nodes whose incident weights sum to zero distribute their mass uniformly.
    Stops when the L1 change drops below ``tol``; the final vector is
    renormalized to sum exactly to one.
    """
    n = indptr.shape[0] - 1
    x = np.full(n, 1.0 / n, dtype=np.float64)
    new = np.empty(n, dtype=np.float64)
    out_sum = np.zeros(n, dtype=np.float64)
    for u in range(n):
        s = 0.0
        for e in range(indptr[u], indptr[u + 1]):
            s += weights[e]
        out_sum[u] = s

    iterations = 0
    converged = False
    for _ in range(max_iter):
        iterations += 1
        dangling = 0.0
        for u in range(n):
            if out_sum[u] <= 0.0:
                dangling += x[u]
        base = (1.0 - damping) / n + damping * dangling / n
        for v in range(n):
            new[v] = base
        for u in range(n):
            if out_sum[u] > 0.0:
                scale = damping * x[u] / out_sum[u]
                for e in range(indptr[u], indptr[u + 1]):
                    new[indices[e]] += scale * weights[e]
        diff = 0.0
        for v in range(n):
            diff += abs(new[v] - x[v])
            x[v] = new[v]
        if diff < tol:
            converged = True
            break

    total = 0.0
    for v in range(n):
        total += x[v]
    if total > 0.0:
        for v in range(n):
            x[v] /= total
    return x, iterations, converged


@njit(cache=True)
def fit_tree(X, y, max_depth, min_leaf):
    """Grow a binary Gini decision tree, returned as flat node tables.

    Splits are axis-aligned with midpoint thresholds between consecutive
    distinct values; ties in impurity resolve to the lowest feature index and
    then the lowest threshold (guaranteed by the ascending scan order).
    Leaves are produced at purity, at ``max_depth``, or when no valid split
    exists; leaf label ties resolve to 0.
    """
    n, f = X.shape
    max_nodes = 2 * n
    feature = np.full(max_nodes, -1, dtype=np.int64)
    threshold = np.zeros(max_nodes, dtype=np.float64)
    left = np.full(max_nodes, -1, dtype=np.int64)
    right = np.full(max_nodes, -1, dtype=np.int64)
    value = np.zeros(max_nodes, dtype=np.int64)

    order = np.arange(n)
    tmp = np.empty(n, dtype=np.int64)
    vals = np.empty(n, dtype=np.float64)

    stack = np.empty((max_nodes, 4), dtype=np.int64)
    stack[0, 0] = 0
    stack[0, 1] = 0
    stack[0, 2] = n
    stack[0, 3] = 0
    top = 0
    n_nodes = 1

    while top >= 0:
        node = stack[top, 0]
        start = stack[top, 1]
        end = stack[top, 2]
        depth = stack[top, 3]
        top -= 1
        size = end - start

        c1 = 0
        for i in range(start, end):
            c1 += y[order[i]]
        c0 = size - c1

        if c1 == 0 or c0 == 0 or depth >= max_depth or size < 2 * min_leaf:
            value[node] = 1 if 2 * c1 > size else 0
            continue

        best_imp = np.inf
        best_feat = -1
        best_thr = 0.0
        for j in range(f):
            for i in range(size):
                vals[i] = X[order[start + i], j]
            srt = np.argsort(vals[:size])
            run_c1 = 0
            for pos in range(size - 1):
                o = srt[pos]
                run_c1 += y[order[start + o]]
                v = vals[o]
                v2 = vals[srt[pos + 1]]
                if v == v2:
                    continue
                n_l = pos + 1
                n_r = size - n_l
                if n_l < min_leaf or n_r < min_leaf:
                    continue
                c1_l = run_c1
                c0_l = n_l - c1_l
                c1_r = c1 - c1_l
                c0_r = n_r - c1_r
                gl = 1.0 - (c0_l * c0_l + c1_l * c1_l) / (n_l * n_l)
                gr = 1.0 - (c0_r * c0_r + c1_r * c1_r) / (n_r * n_r)
                imp = (n_l * gl + n_r * gr) / size
                if imp < best_imp:
                    best_imp = imp
                    best_feat = j
                    best_thr = (v + v2) / 2.0

        if best_feat < 0:
            value[node] = 1 if 2 * c1 > size else 0
            continue

        nl = 0
        nr = 0
        for i in range(start, end):
            idx = order[i]
            if X[idx, best_feat] <= best_thr:
                order[start + nl] = idx
                nl += 1
            else:
                tmp[nr] = idx
                nr += 1
        for i in range(nr):
            order[start + nl + i] = tmp[i]

        lid = n_nodes
        rid = n_nodes + 1
        n_nodes += 2
        feature[node] = best_feat
        threshold[node] = best_thr
        left[node] = lid
        right[node] = rid
        top += 1
        stack[top, 0] = rid
        stack[top, 1] = start + nl
        stack[top, 2] = end
        stack[top, 3] = depth + 1
        top += 1
        stack[top, 0] = lid
        stack[top, 1] = start
        stack[top, 2] = start + nl
        stack[top, 3] = depth + 1

    return (
        feature[:n_nodes],
        threshold[:n_nodes],
        left[:n_nodes],
        right[:n_nodes],
        value[:n_nodes],
    )


@njit(cache=True)
def tree_votes(feature, threshold, left, right, value, offsets, X):
    """Sum the 0/1 votes of every tree in a flattened forest over rows of X."""
    k = offsets.shape[0] - 1
    rows = X.shape[0]
    votes = np.zeros(rows, dtype=np.int64)
    for t in range(k):
        root = offsets[t]
        for i in range(rows):
            node = root
            while feature[node] >= 0:
                if X[i, feature[node]] <= threshold[node]:
                    node = left[node]
                else:
                    node = right[node]
            votes[i] += value[node]
    return votes


def warm_up():
    """Compile (or no-op) every kernel on tiny inputs."""
    indptr = np.array([0, 1, 2], dtype=np.int64)
    indices = np.array([1, 0], dtype=np.int64)
    eids = np.array([0, 0], dtype=np.int64)
    w = np.array([1.0, 1.0])
    shortest_path_stats(indptr, indices, eids, 2, 1)
    triangle_counts(indptr, indices, 2)
    find_bridges(indptr, indices, eids, 2, 1)
    pagerank_csr(indptr, indices, w, 0.85, 1e-10, 50)
    X = np.array([[0.0, 0.0], [1.0, 1.0]])
    y = np.array([0, 1], dtype=np.int64)
    feat, thr, lft, rgt, val = fit_tree(X, y, 12, 1)
    offsets = np.array([0, feat.shape[0]], dtype=np.int64)
    tree_votes(feat, thr, lft, rgt, val, offsets, X)
