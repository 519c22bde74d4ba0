"""Desk-scale synthetic multi-source dataset with a by-construction gold标准.

Entities get two-token names from a small vocabulary; a configurable share
of entities are near-duplicates (one to two character edits) of an earlier
entity, which is what produces wrongly merged clusters for repair to split.
Each source holds a record for most entities, duplicated inside the source
with the given ratio, and record strings are corrupted at the given rate.
Similarities are the Dice coefficient over character trigrams of the name
attribute; pairs at or above the edge threshold become graph edges.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .graph import Record, SimilarityGraph, build_graph

_ALPHABET = "abcdefghijklmnopqrstuvwxyz"


def trigrams(text: str) -> frozenset[str]:
    text = text.lower()
    if len(text) < 3:
        return frozenset((text,))
    return frozenset(text[i : i + 3] for i in range(len(text) - 2))


def trigram_similarity(a: str, b: str) -> float:
    """Dice coefficient of the two trigram sets."""
    ta, tb = trigrams(a), trigrams(b)
    if not ta and not tb:
        return 1.0
    return 2.0 * len(ta & tb) / (len(ta) + len(tb))


@dataclass
class SyntheticDataset:
    records: list[Record]
    graph: SimilarityGraph
    gold: dict[str, str]


def _random_token(rng: np.random.Generator, lo=5, hi=8) -> str:
    length = int(rng.integers(lo, hi + 1))
    return "".join(_ALPHABET[i] for i in rng.integers(0, len(_ALPHABET), length))


def _edit(name: str, rng: np.random.Generator) -> str:
    if not name:
        return name
    op = int(rng.integers(0, 4))
    pos = int(rng.integers(0, len(name)))
    ch = _ALPHABET[int(rng.integers(0, len(_ALPHABET)))]
    if op == 0:  # substitute
        return name[:pos] + ch + name[pos + 1 :]
    if op == 1:  # delete
        return name[:pos] + name[pos + 1 :]
    if op == 2:  # insert
        return name[:pos] + ch + name[pos:]
    if pos + 1 < len(name):  # transpose
        return name[:pos] + name[pos + 1] + name[pos] + name[pos + 2 :]
    return name


def _corrupt(name: str, rng: np.random.Generator, max_edits=3) -> str:
    for _ in range(1 + int(rng.integers(0, max_edits))):
        name = _edit(name, rng)
    return name


def generate_dataset(
    n_entities: int = 200,
    n_sources: int = 5,
    duplicate_ratio: float = 0.5,
    corruption: float = 0.2,
    seed: int = 0,
    *,
    edge_threshold: float = 0.55,
    coverage: float = 0.85,
    vocabulary_size: int = 40,
    confusable_ratio: float = 0.35,
) -> SyntheticDataset:
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x5D5]))

    vocab = [_random_token(rng) for _ in range(vocabulary_size)]
    names: list[str] = []
    for i in range(n_entities):
        if names and rng.random() < confusable_ratio:
            base = names[int(rng.integers(0, len(names)))]
            variant = _edit(base, rng)
            if rng.random() < 0.5:
                variant = _edit(variant, rng)
            names.append(variant)
        else:
            t1 = vocab[int(rng.integers(0, len(vocab)))]
            t2 = vocab[int(rng.integers(0, len(vocab)))]
            names.append(f"{t1} {t2}")

    records: list[Record] = []
    gold: dict[str, str] = {}
    counter = 0
    for ent in range(n_entities):
        entity_id = f"e{ent:05d}"
        for src in range(n_sources):
            if rng.random() > coverage:
                continue
            copies = 2 if rng.random() < duplicate_ratio else 1
            for _ in range(copies):
                name = names[ent]
                if rng.random() < corruption:
                    name = _corrupt(name, rng)
                rid = f"s{src}-{counter:05d}"
                counter += 1
                records.append(
                    Record(rid, f"src{src}", {"name": name, "entity_hint": ""})
                )
                gold[rid] = entity_id

    pairs = _similarity_pairs(records, edge_threshold)
    graph = build_graph(records, pairs)
    return SyntheticDataset(records, graph, gold)


def _similarity_pairs(
    records: list[Record], threshold: float
) -> list[tuple[str, str, float]]:
    """All record pairs sharing a trigram, kept when Dice >= threshold."""
    grams = {r.record_id: trigrams(r.attributes["name"]) for r in records}
    postings: dict[str, list[str]] = defaultdict(list)
    for r in records:
        for g in grams[r.record_id]:
            postings[g].append(r.record_id)

    candidates: set[tuple[str, str]] = set()
    for ids in postings.values():
        if len(ids) > 400:
            continue
        for i, u in enumerate(ids):
            for v in ids[i + 1 :]:
                candidates.add((u, v) if u < v else (v, u))

    pairs = []
    for u, v in sorted(candidates):
        ta, tb = grams[u], grams[v]
        sim = 2.0 * len(ta & tb) / (len(ta) + len(tb))
        if sim >= threshold:
            pairs.append((u, v, sim))
    return pairs
