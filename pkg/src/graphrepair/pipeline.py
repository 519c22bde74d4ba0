"""Shared orchestration: raw graph -> optional threshold filter -> optional
noise -> weak-edge pruning -> clusters -> feature space."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .evaluation import filter_by_threshold, inject_noise
from .features import FeatureSpace, build_features
from .graph import (
    Cluster,
    Record,
    SimilarityGraph,
    connected_components,
    prune_weak_edges,
    source_map,
)


@dataclass
class PipelineData:
    records: dict[str, Record]
    sources: Mapping[str, str]
    input_graph: SimilarityGraph
    working_graph: SimilarityGraph
    pruned_graph: SimilarityGraph
    clusters: list[Cluster]
    space: FeatureSpace


def prepare(
    records: Sequence[Record],
    graph: SimilarityGraph,
    *,
    threshold: float | None = None,
    noise_ratio: float = 0.0,
    noise_seed: int = 0,
) -> PipelineData:
    """Apply the ingest stages in their fixed order. The threshold filter
    simulates upstream graph generation and therefore runs before noise."""
    sources = source_map(records)
    working = graph
    if threshold is not None:
        working = filter_by_threshold(working, threshold)
    if noise_ratio:
        working = inject_noise(working, noise_ratio, noise_seed)
    pruned = prune_weak_edges(working, sources)
    clusters = connected_components(pruned)
    space = build_features(clusters, sources)
    return PipelineData(
        records={r.record_id: r for r in records},
        sources=sources,
        input_graph=graph,
        working_graph=working,
        pruned_graph=pruned,
        clusters=clusters,
        space=space,
    )
