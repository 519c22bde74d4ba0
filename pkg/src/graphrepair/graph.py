"""Similarity graph, records, link categorization and connected-component clusters.

The graph is an undirected, weighted graph over record ids. Links are
categorized as strong / normal / weak depending on whether an edge attains
the maximum similarity among each endpoint's edges toward the other
endpoint's source; weak edges (neither side attains its maximum) can be
pruned before clusters are formed.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterable, Iterator, Mapping

from .errors import (
    DuplicateEdge,
    InvalidSimilarity,
    MissingEdge,
    SelfLoopEdge,
    UnknownRecord,
)


@dataclass(frozen=True)
class Record:
    record_id: str
    source_id: str
    attributes: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.source_id:
            raise ValueError(f"record {self.record_id!r} has an empty source_id")


class LinkCategory(IntEnum):
    WEAK = 0
    NORMAL = 1
    STRONG = 2


def edge_key(u: str, v: str) -> tuple[str, str]:
    """Canonical unordered form of an edge: endpoints in ascending id order."""
    if u == v:
        raise SelfLoopEdge(f"self-loop on record {u!r}")
    return (u, v) if u < v else (v, u)


class SimilarityGraph:
    """Undirected weighted graph over record ids.

    Immutable after construction; all mutating operations return new graphs.
    Edge iteration order is deterministic (ascending canonical pairs).
    """

    __slots__ = ("_nodes", "_adj")

    def __init__(self, nodes: Iterable[str], edges: Mapping[tuple[str, str], float]):
        self._nodes = frozenset(nodes)
        adj: dict[str, dict[str, float]] = {}
        for (u, v), sim in edges.items():
            adj.setdefault(u, {})[v] = sim
            adj.setdefault(v, {})[u] = sim
        self._adj = adj

    @property
    def nodes(self) -> frozenset[str]:
        return self._nodes

    @property
    def node_count(self) -> int:
        return len(self._nodes)

    @property
    def edge_count(self) -> int:
        return sum(len(nbrs) for nbrs in self._adj.values()) // 2

    def has_edge(self, u: str, v: str) -> bool:
        return v in self._adj.get(u, ())

    def similarity(self, u: str, v: str) -> float:
        try:
            return self._adj[u][v]
        except KeyError:
            raise MissingEdge(f"no edge between {u!r} and {v!r}") from None

    def neighbors(self, u: str) -> Mapping[str, float]:
        return self._adj.get(u, {})

    def edges(self) -> Iterator[tuple[str, str, float]]:
        """Yield (u, v, similarity) with u < v, in ascending pair order."""
        for u in sorted(self._adj):
            for v in sorted(self._adj[u]):
                if u < v:
                    yield u, v, self._adj[u][v]

    def edge_pairs(self) -> list[tuple[str, str]]:
        return [(u, v) for u, v, _ in self.edges()]

    def without_edges(self, drop: Iterable[tuple[str, str]]) -> "SimilarityGraph":
        dropped = {edge_key(u, v) for u, v in drop}
        kept = {
            (u, v): sim for u, v, sim in self.edges() if (u, v) not in dropped
        }
        return SimilarityGraph(self._nodes, kept)

    def with_similarities(
        self, overrides: Mapping[tuple[str, str], float]
    ) -> "SimilarityGraph":
        canon = {edge_key(u, v): sim for (u, v), sim in overrides.items()}
        edges = {}
        for u, v, sim in self.edges():
            edges[(u, v)] = canon.get((u, v), sim)
        return SimilarityGraph(self._nodes, edges)

    def __eq__(self, other):
        if not isinstance(other, SimilarityGraph):
            return NotImplemented
        return self._nodes == other._nodes and self._adj == other._adj

    def __repr__(self):
        return f"SimilarityGraph(nodes={len(self._nodes)}, edges={self.edge_count})"


class Cluster:
    """One connected component together with its induced subgraph."""

    __slots__ = ("cluster_id", "member_ids", "_edges")

    def __init__(
        self,
        cluster_id: int,
        member_ids: Iterable[str],
        induced_edges: Mapping[tuple[str, str], float],
    ):
        self.cluster_id = cluster_id
        self.member_ids: tuple[str, ...] = tuple(sorted(member_ids))
        self._edges = {edge_key(u, v): sim for (u, v), sim in induced_edges.items()}

    @property
    def size(self) -> int:
        return len(self.member_ids)

    @property
    def member_set(self) -> frozenset[str]:
        return frozenset(self.member_ids)

    def edges(self) -> list[tuple[str, str, float]]:
        return [(u, v, self._edges[(u, v)]) for u, v in sorted(self._edges)]

    def edge_pairs(self) -> list[tuple[str, str]]:
        return sorted(self._edges)

    @property
    def edge_count(self) -> int:
        return len(self._edges)

    def similarity(self, u: str, v: str) -> float:
        try:
            return self._edges[edge_key(u, v)]
        except KeyError:
            raise MissingEdge(f"no edge between {u!r} and {v!r}") from None

    def subgraph(self) -> SimilarityGraph:
        return SimilarityGraph(self.member_ids, self._edges)

    def __repr__(self):
        return f"Cluster(id={self.cluster_id}, size={self.size}, edges={len(self._edges)})"


def build_graph(
    records: Iterable[Record],
    weighted_pairs: Iterable[tuple[str, str, float]],
) -> SimilarityGraph:
    """Construct a similarity graph, validating every pair.

    Rejects pairs referencing unknown records, self-loops, similarities
    outside [0, 1] and duplicate unordered pairs.
    """
    known = {r.record_id for r in records}
    edges: dict[tuple[str, str], float] = {}
    for u, v, sim in weighted_pairs:
        if u not in known:
            raise UnknownRecord(f"edge references unknown record {u!r}")
        if v not in known:
            raise UnknownRecord(f"edge references unknown record {v!r}")
        key = edge_key(u, v)
        if not (0.0 <= sim <= 1.0):
            raise InvalidSimilarity(f"similarity {sim!r} for {key} outside [0, 1]")
        if key in edges:
            raise DuplicateEdge(f"duplicate edge {key}")
        edges[key] = float(sim)
    return SimilarityGraph(known, edges)


def source_map(records: Iterable[Record]) -> dict[str, str]:
    return {r.record_id: r.source_id for r in records}


def _attains_source_max(
    graph: SimilarityGraph, sources: Mapping[str, str], u: str, v: str
) -> bool:
    """True when sim(u, v) ties or exceeds every edge of u toward source(v)."""
    sim = graph.similarity(u, v)
    target = sources[v]
    for w, other in graph.neighbors(u).items():
        if sources[w] == target and other > sim:
            return False
    return True


def categorize_link(
    graph: SimilarityGraph, sources: Mapping[str, str], edge: tuple[str, str]
) -> LinkCategory:
    """Categorize an edge as strong, normal or weak.

    Strong: the edge attains the maximum similarity among u's edges toward
    source(v) and among v's edges toward source(u). Normal: exactly one of
    the two maxima holds. Weak: neither. Ties count as attaining the maximum.
    """
    u, v = edge
    if not graph.has_edge(u, v):
        raise MissingEdge(f"no edge between {u!r} and {v!r}")
    holds_u = _attains_source_max(graph, sources, u, v)
    holds_v = _attains_source_max(graph, sources, v, u)
    if holds_u and holds_v:
        return LinkCategory.STRONG
    if holds_u or holds_v:
        return LinkCategory.NORMAL
    return LinkCategory.WEAK


def prune_weak_edges(
    graph: SimilarityGraph, sources: Mapping[str, str]
) -> SimilarityGraph:
    """Remove every weak edge in a single categorize-then-remove pass.

    Categories are computed once on the input graph; removing weak edges can
    only relax the remaining maxima, so the operation is idempotent.
    """
    weak = [
        (u, v)
        for u, v, _ in graph.edges()
        if categorize_link(graph, sources, (u, v)) is LinkCategory.WEAK
    ]
    if not weak:
        return graph
    return graph.without_edges(weak)


def connected_components(graph: SimilarityGraph) -> list[Cluster]:
    """Partition nodes into clusters, ids ascending by smallest member id."""
    seen: set[str] = set()
    components: list[list[str]] = []
    for start in sorted(graph.nodes):
        if start in seen:
            continue
        comp = [start]
        seen.add(start)
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v in graph.neighbors(u):
                if v not in seen:
                    seen.add(v)
                    comp.append(v)
                    queue.append(v)
        components.append(sorted(comp))
    components.sort(key=lambda members: members[0])
    comp_of = {}
    for cid, members in enumerate(components):
        for m in members:
            comp_of[m] = cid
    induced: list[dict[tuple[str, str], float]] = [{} for _ in components]
    for u, v, sim in graph.edges():
        induced[comp_of[u]][(u, v)] = sim
    return [
        Cluster(cid, members, induced[cid]) for cid, members in enumerate(components)
    ]
