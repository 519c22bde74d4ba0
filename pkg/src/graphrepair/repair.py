"""Split clusters at predicted non-match edges and regroup records by support.

Both endpoints of every non-match edge seed their own repaired cluster and
never move. Remaining records join, via predicted-match adjacency, the
cluster where their support (matches minus non-matches toward currently
assigned members) is highest; reassignment requires strictly higher support,
so ties keep the current cluster. The sweep repeats until stable, capped at
one pass per cluster record. Records unreachable from any seed through
match edges stay grouped as the connected components they form among
themselves.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .ensemble import EnsembleModel, Label
from .features import FeatureSpace
from .graph import Cluster, edge_key


@dataclass(frozen=True)
class EdgePartition:
    match: frozenset[tuple[str, str]]
    non_match: frozenset[tuple[str, str]]

    def __post_init__(self):
        overlap = self.match & self.non_match
        if overlap:
            raise ValueError(f"edges classified both ways: {sorted(overlap)[:3]}")


@dataclass(frozen=True)
class TraceEvent:
    iteration: int
    record_id: str
    action: str  # "seed" | "assign" | "move" | "keep"
    cluster: int
    support: int
    other_cluster: int | None = None
    other_support: int | None = None


@dataclass
class RepairedClustering:
    clusters: list[tuple[str, ...]]
    provenance: dict[str, tuple[int, int]]  # record -> (origin cluster, local id)
    trace: list[TraceEvent] = field(default_factory=list)
    cap_triggered: bool = False


def partition_edges(
    cluster: Cluster, model: EnsembleModel, space: FeatureSpace, threshold: float = 0.5
) -> EdgePartition:
    """Classify every induced edge of a cluster as match or non-match."""
    match, non_match = set(), set()
    for pair in cluster.edge_pairs():
        vec = space.vector_for_edge(cluster.cluster_id, pair)
        if model.classify(vec.values, threshold) is Label.MATCH:
            match.add(pair)
        else:
            non_match.add(pair)
    return EdgePartition(frozenset(match), frozenset(non_match))


def repair_cluster(cluster: Cluster, partition: EdgePartition) -> RepairedClustering:
    members = cluster.member_ids
    if not partition.non_match:
        return RepairedClustering(
            clusters=[members],
            provenance={rid: (cluster.cluster_id, 0) for rid in members},
        )

    match_adj: dict[str, list[str]] = {rid: [] for rid in members}
    for u, v in partition.match:
        match_adj[u].append(v)
        match_adj[v].append(u)
    for rid in match_adj:
        match_adj[rid].sort()
    nm_adj: dict[str, set[str]] = {rid: set() for rid in members}
    for u, v in partition.non_match:
        nm_adj[u].add(v)
        nm_adj[v].add(u)

    seeds = sorted({rid for pair in partition.non_match for rid in pair})
    seed_ids = {rid: idx for idx, rid in enumerate(seeds)}
    assignment: dict[str, int] = dict(seed_ids)
    trace: list[TraceEvent] = [
        TraceEvent(0, rid, "seed", cid, 0) for rid, cid in seed_ids.items()
    ]

    def support(rid: str, cid: int) -> int:
        total = 0
        for v in match_adj[rid]:
            if assignment.get(v) == cid:
                total += 1
        for v in nm_adj[rid]:
            if assignment.get(v) == cid:
                total -= 1
        return total

    cap_triggered = False
    n_clusters = len(seeds)
    for iteration in range(1, len(members) + 1):
        changed = False
        snapshot: dict[int, list[str]] = {cid: [] for cid in range(n_clusters)}
        for rid, cid in assignment.items():
            snapshot[cid].append(rid)
        for cid in range(n_clusters):
            candidates = sorted(
                {
                    u
                    for v in snapshot[cid]
                    for u in match_adj[v]
                    if u not in seed_ids and assignment.get(u) != cid
                }
            )
            for u in candidates:
                sup_new = support(u, cid)
                current = assignment.get(u)
                if current is None:
                    assignment[u] = cid
                    changed = True
                    trace.append(TraceEvent(iteration, u, "assign", cid, sup_new))
                else:
                    sup_cur = support(u, current)
                    if sup_new > sup_cur:
                        assignment[u] = cid
                        changed = True
                        trace.append(
                            TraceEvent(
                                iteration, u, "move", cid, sup_new, current, sup_cur
                            )
                        )
                    else:
                        trace.append(
                            TraceEvent(
                                iteration, u, "keep", current, sup_cur, cid, sup_new
                            )
                        )
        if not changed:
            break
    else:
        cap_triggered = True

    orphan_clusters = _orphan_components(members, match_adj, assignment)
    for comp in orphan_clusters:
        cid = n_clusters
        n_clusters += 1
        for rid in comp:
            assignment[rid] = cid

    grouped: list[list[str]] = [[] for _ in range(n_clusters)]
    for rid in members:
        grouped[assignment[rid]].append(rid)
    clusters = [tuple(sorted(group)) for group in grouped]
    provenance = {rid: (cluster.cluster_id, assignment[rid]) for rid in members}
    return RepairedClustering(clusters, provenance, trace, cap_triggered)


def _orphan_components(
    members: Sequence[str],
    match_adj: dict[str, list[str]],
    assignment: dict[str, int],
) -> list[list[str]]:
    """Match-edge components among records no seed ever reached, ordered by
    smallest member id."""
    orphans = [rid for rid in members if rid not in assignment]
    orphan_set = set(orphans)
    seen: set[str] = set()
    components: list[list[str]] = []
    for start in orphans:
        if start in seen:
            continue
        comp = [start]
        seen.add(start)
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v in match_adj[u]:
                if v in orphan_set and v not in seen:
                    seen.add(v)
                    comp.append(v)
                    queue.append(v)
        components.append(sorted(comp))
    components.sort(key=lambda comp: comp[0])
    return components


@dataclass
class RepairResult:
    clusters: list[tuple[str, ...]]
    assignments: dict[str, int]
    per_cluster: list[RepairedClustering]
    non_match_edges: list[tuple[str, str]]

    @property
    def any_cap_triggered(self) -> bool:
        return any(rc.cap_triggered for rc in self.per_cluster)


def repair_all(
    clusters: Iterable[Cluster],
    model: EnsembleModel,
    space: FeatureSpace,
    threshold: float = 0.5,
) -> RepairResult:
    """Repair every cluster independently; global repaired-cluster ids are
    assigned sequentially over clusters in ascending id order."""
    flat: list[tuple[str, ...]] = []
    assignments: dict[str, int] = {}
    per_cluster: list[RepairedClustering] = []
    non_match: list[tuple[str, str]] = []
    for cluster in sorted(clusters, key=lambda c: c.cluster_id):
        if cluster.edge_count == 0:
            partition = EdgePartition(frozenset(), frozenset())
        else:
            partition = partition_edges(cluster, model, space, threshold)
        repaired = repair_cluster(cluster, partition)
        per_cluster.append(repaired)
        non_match.extend(sorted(partition.non_match))
        base = len(flat)
        for local_id, group in enumerate(repaired.clusters):
            flat.append(group)
            for rid in group:
                assignments[rid] = base + local_id
    return RepairResult(flat, assignments, per_cluster, non_match)


def repair_partition(
    cluster: Cluster, labels: dict[tuple[str, str], Label]
) -> RepairedClustering:
    """Repair from explicit per-edge labels (useful for tests and replays)."""
    match, non_match = set(), set()
    for pair in cluster.edge_pairs():
        key = edge_key(*pair)
        if labels[key] is Label.MATCH:
            match.add(key)
        else:
            non_match.add(key)
    return repair_cluster(cluster, EdgePartition(frozenset(match), frozenset(non_match)))
