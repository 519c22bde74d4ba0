"""Bootstrap ensemble of Gini decision trees over edge feature vectors.

``k`` trees are each fit on a with-replacement resample of the training set;
the fraction of trees voting match yields both the prediction and the
selection uncertainty p * (1 - p). Trees grow to purity (depth-capped),
which keeps bootstrap disagreement meaningful on small training sets.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .errors import InsufficientTraining

MAX_DEPTH = 12
MIN_LEAF = 1
_BOOTSTRAP_RETRIES = 10

SERIAL_FORMAT = "graphrepair-ensemble-v1"


class Label(IntEnum):
    NON_MATCH = 0
    MATCH = 1


@dataclass(frozen=True)
class LabeledExample:
    vector_id: int
    values: tuple[float, ...]
    label: Label


class TrainingSet:
    """Labeled edge vectors; at most one example per vector id."""

    def __init__(self, examples: Iterable[LabeledExample] = ()):
        self.examples: list[LabeledExample] = []
        self._ids: set[int] = set()
        for ex in examples:
            self.add(ex)

    def add(self, example: LabeledExample) -> None:
        if example.vector_id in self._ids:
            raise ValueError(f"vector {example.vector_id} already labeled")
        self._ids.add(example.vector_id)
        self.examples.append(example)

    def __len__(self) -> int:
        return len(self.examples)

    def __contains__(self, vector_id: int) -> bool:
        return vector_id in self._ids

    @property
    def vector_ids(self) -> set[int]:
        return set(self._ids)

    def matrix(self) -> np.ndarray:
        return np.array([ex.values for ex in self.examples], dtype=np.float64)

    def labels(self) -> np.ndarray:
        return np.array([int(ex.label) for ex in self.examples], dtype=np.int64)

    def has_both_classes(self) -> bool:
        labels = {ex.label for ex in self.examples}
        return Label.MATCH in labels and Label.NON_MATCH in labels


@dataclass
class _Tree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray


class EnsembleModel:
    """k trained trees plus the flattened node tables for batch voting."""

    def __init__(self, trees: list[_Tree], k: int, seed: int):
        if len(trees) != k:
            raise ValueError(f"expected {k} trees, got {len(trees)}")
        self.trees = trees
        self.k = k
        self.seed = seed
        sizes = [t.feature.shape[0] for t in trees]
        self._offsets = np.concatenate(([0], np.cumsum(sizes))).astype(np.int64)
        self._feature = np.concatenate([t.feature for t in trees])
        self._threshold = np.concatenate([t.threshold for t in trees])
        self._value = np.concatenate([t.value for t in trees])
        left_parts, right_parts = [], []
        for t, base in zip(trees, self._offsets[:-1]):
            left_parts.append(np.where(t.left >= 0, t.left + base, -1))
            right_parts.append(np.where(t.right >= 0, t.right + base, -1))
        self._left = np.concatenate(left_parts).astype(np.int64)
        self._right = np.concatenate(right_parts).astype(np.int64)

    def predict_fractions(self, rows: np.ndarray) -> np.ndarray:
        """Fraction of trees voting match, for each row."""
        rows = np.ascontiguousarray(rows, dtype=np.float64)
        if rows.ndim != 2:
            raise ValueError("expected a 2-d matrix of feature rows")
        votes = kernels.tree_votes(
            self._feature,
            self._threshold,
            self._left,
            self._right,
            self._value,
            self._offsets,
            rows,
        )
        return votes / self.k

    def predict_fraction(self, values: Sequence[float]) -> float:
        return float(self.predict_fractions(np.asarray(values, dtype=np.float64)[None, :])[0])

    def classify(self, values: Sequence[float], threshold: float = 0.5) -> Label:
        return fraction_to_label(self.predict_fraction(values), threshold)

    def classify_rows(self, rows: np.ndarray, threshold: float = 0.5) -> np.ndarray:
        return (self.predict_fractions(rows) >= threshold).astype(np.int64)

    def to_json(self) -> str:
        payload = {
            "format": SERIAL_FORMAT,
            "k": self.k,
            "seed": self.seed,
            "trees": [
                {
                    "feature": t.feature.tolist(),
                    "threshold": t.threshold.tolist(),
                    "left": t.left.tolist(),
                    "right": t.right.tolist(),
                    "value": t.value.tolist(),
                }
                for t in self.trees
            ],
        }
        return json.dumps(payload, sort_keys=True)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())

    @classmethod
    def from_json(cls, text: str) -> "EnsembleModel":
        payload = json.loads(text)
        if payload.get("format") != SERIAL_FORMAT:
            raise ValueError(f"unsupported model format {payload.get('format')!r}")
        trees = [
            _Tree(
                feature=np.asarray(t["feature"], dtype=np.int64),
                threshold=np.asarray(t["threshold"], dtype=np.float64),
                left=np.asarray(t["left"], dtype=np.int64),
                right=np.asarray(t["right"], dtype=np.int64),
                value=np.asarray(t["value"], dtype=np.int64),
            )
            for t in payload["trees"]
        ]
        return cls(trees, payload["k"], payload["seed"])

    @classmethod
    def load(cls, path) -> "EnsembleModel":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json(fh.read())


def fraction_to_label(fraction: float, threshold: float = 0.5) -> Label:
    return Label.MATCH if fraction >= threshold else Label.NON_MATCH


def uncertainty(p: float) -> float:
    """Bootstrap disagreement p * (1 - p); maximal 0.25 at p = 0.5."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"fraction {p!r} outside [0, 1]")
    return p * (1.0 - p)


def train(training_set: TrainingSet, k: int, seed: int) -> EnsembleModel:
    """Fit k trees on bootstrap resamples of the training set.

    Resamples missing one class are redrawn a bounded number of times and
    then fall back to the full training set. Per-tree randomness comes from
    child streams of a single splittable seed sequence, so results do not
    depend on evaluation order.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if not training_set.has_both_classes():
        raise InsufficientTraining(
            "training set must contain at least one match and one non-match"
        )
    X = training_set.matrix()
    y = training_set.labels()
    n = len(training_set)
    trees: list[_Tree] = []
    for child in np.random.SeedSequence(seed).spawn(k):
        rng = np.random.default_rng(child)
        idx = None
        for _ in range(_BOOTSTRAP_RETRIES):
            candidate = rng.integers(0, n, size=n)
            picked = y[candidate]
            if picked.min() != picked.max():
                idx = candidate
                break
        if idx is None:
            Xb, yb = X, y
        else:
            Xb, yb = np.ascontiguousarray(X[idx]), y[idx]
        feature, thr, left, right, value = kernels.fit_tree(Xb, yb, MAX_DEPTH, MIN_LEAF)
        trees.append(_Tree(feature, thr, left, right, value))
    return EnsembleModel(trees, k, seed)
