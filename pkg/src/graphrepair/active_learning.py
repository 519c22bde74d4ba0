"""Iterative labeling over unique edge vectors with a bootstrap ensemble.

Selection strategies:

* ``bootstrap``: rank unlabeled vectors by ensemble disagreement p(1-p).
* ``bootstrap-ext``: additionally rank by how under-represented the vectors'
  cluster sizes are in the training data (difference of the cluster-size
  distribution and the training-data distribution) and by the average cosine
  distance to already-labeled vectors; the three measures are min-max
  rescaled over the candidate pool and averaged.

The session is an explicit-state stepper: it exposes a pending batch of
questions and advances whenever every question in the batch has an answer.
This lets the same code drive a blocking oracle (batch runs) and an HTTP
labeling service that suspends between answers.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np

from .ensemble import EnsembleModel, Label, LabeledExample, TrainingSet, train
from .errors import InsufficientTraining
from .features import IDX_SIMILARITY, FeatureSpace
from .graph import Cluster
from .oracles import Oracle

DEFAULT_ITER_BUDGET = 20
DEFAULT_K = 100


class Strategy(Enum):
    BOOTSTRAP = "bootstrap"
    BOOTSTRAP_EXT = "bootstrap-ext"


@dataclass(frozen=True)
class SelectionConfig:
    budget: int
    iter_budget: int = DEFAULT_ITER_BUDGET
    strategy: Strategy = Strategy.BOOTSTRAP_EXT
    k: int = DEFAULT_K
    seed: int = 0

    def __post_init__(self):
        if self.budget < 1:
            raise ValueError("budget must be at least 1")
        if self.iter_budget < 1:
            raise ValueError("iter_budget must be at least 1")
        if self.iter_budget > self.budget:
            raise ValueError("iter_budget cannot exceed the total budget")
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


def cluster_size_distribution(clusters: Iterable[Cluster]) -> np.ndarray:
    """entry[s] = share of clusters having exactly s members (index 0 unused)."""
    clusters = list(clusters)
    if not clusters:
        raise ValueError("no clusters")
    max_size = max(c.size for c in clusters)
    dist = np.zeros(max_size + 1, dtype=np.float64)
    for c in clusters:
        dist[c.size] += 1.0
    return dist / len(clusters)


def training_distribution(
    labeled_vector_ids: Iterable[int],
    space: FeatureSpace,
    size_of_cluster: Mapping[int, int],
    length: int,
) -> np.ndarray:
    """Share of (labeled vector, cluster) assignments per cluster size.

    Each distinct cluster holding a member edge of a labeled vector counts
    once per vector. All-zero when nothing is labeled yet.
    """
    dist = np.zeros(length, dtype=np.float64)
    total = 0
    for vid in labeled_vector_ids:
        for cid in space.clusters_of_vector(vid):
            dist[size_of_cluster[cid]] += 1.0
            total += 1
    if total:
        dist /= total
    return dist


def cluster_weight(
    vector_id: int,
    weight_by_size: np.ndarray,
    space: FeatureSpace,
    size_of_cluster: Mapping[int, int],
) -> float:
    """Mean of the size-distribution difference over the vector's clusters."""
    sizes = [size_of_cluster[cid] for cid in space.clusters_of_vector(vector_id)]
    return float(np.mean([weight_by_size[s] for s in sizes]))


def avg_cosine_distances(candidates: np.ndarray, labeled: np.ndarray) -> np.ndarray:
    """Mean (1 - cosine) of each candidate row against every labeled row.

    Rows are expected min-max normalized. An empty labeled matrix yields the
    maximal distance 1 for every candidate; zero-magnitude rows contribute
    distance 1 as well.
    """
    if labeled.shape[0] == 0:
        return np.ones(candidates.shape[0], dtype=np.float64)
    cand_norm = np.linalg.norm(candidates, axis=1)
    lab_norm = np.linalg.norm(labeled, axis=1)
    denom = cand_norm[:, None] * lab_norm[None, :]
    dots = candidates @ labeled.T
    cos = np.divide(dots, denom, out=np.zeros_like(dots), where=denom > 0)
    return (1.0 - cos).mean(axis=1)


def rescale(values: np.ndarray) -> np.ndarray:
    """Min-max rescale over the candidate pool; constant pools map to 0."""
    values = np.asarray(values, dtype=np.float64)
    lo, hi = values.min(), values.max()
    if hi <= lo:
        return np.zeros_like(values)
    return (values - lo) / (hi - lo)


def combine_measures(
    unc: np.ndarray, weight: np.ndarray, cos: np.ndarray
) -> np.ndarray:
    """Informativeness of the extended strategy: mean of rescaled measures."""
    return (rescale(unc) + rescale(weight) + rescale(cos)) / 3.0


@dataclass(frozen=True)
class Question:
    question_id: str
    vector_id: int
    cluster_id: int
    edge: tuple[str, str]
    similarity: float


@dataclass(frozen=True)
class AuditRecord:
    iteration: int
    vector_id: int
    record_a: str
    record_b: str
    unc: float | None
    weight: float | None
    cos: float | None
    score: float | None
    label: str
    elapsed: float

    def to_json(self) -> str:
        return json.dumps(
            {
                "iteration": self.iteration,
                "vector_id": self.vector_id,
                "record_a": self.record_a,
                "record_b": self.record_b,
                "unc": self.unc,
                "weight": self.weight,
                "cos": self.cos,
                "score": self.score,
                "label": self.label,
                "elapsed": self.elapsed,
            },
            sort_keys=True,
        )


def write_audit(path, records: Iterable[AuditRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(rec.to_json() + "\n")


@dataclass
class _PendingMeasures:
    unc: float | None = None
    weight: float | None = None
    cos: float | None = None
    score: float | None = None


class LabelSession:
    """Explicit-state labeling loop over a feature space.

    Iteration 0 is the cold-start batch: the ``iter_budget/2`` highest- and
    lowest-similarity vectors, extended one vector at a time (alternating
    ends) if the labels come back single-class. Every later iteration trains
    the ensemble, scores the remaining vectors and selects the next batch.
    """

    def __init__(
        self,
        clusters: Sequence[Cluster],
        space: FeatureSpace,
        config: SelectionConfig,
    ):
        self.config = config
        self.space = space
        self.clusters = sorted(clusters, key=lambda c: c.cluster_id)
        if not self.clusters:
            raise ValueError("no clusters")
        self.size_of_cluster = {c.cluster_id: c.size for c in self.clusters}
        self.d_C = cluster_size_distribution(self.clusters)
        self.training = TrainingSet()
        self.labeled: set[int] = set()
        self.iteration = 0
        self.model: EnsembleModel | None = None
        self.audit: list[AuditRecord] = []
        self.done = False

        self._question_seq = 0
        self._pending: list[Question] = []
        self._answers: dict[str, Label] = {}
        self._measures: dict[int, _PendingMeasures] = {}
        self._batch_issued_at = time.monotonic()
        self._seed_order = self._seeding_order()
        self._seed_cursor = 0

        if len(space) == 0:
            self.done = True
        else:
            first = min(config.iter_budget, config.budget, len(space))
            self._issue_batch(self._seed_order[:first], seeding=True)
            self._seed_cursor = first

    # -- seeding ---------------------------------------------------------

    def _seeding_order(self) -> list[int]:
        """Alternate highest- and lowest-similarity vectors, deduplicated."""
        sims = self.space.matrix()[:, IDX_SIMILARITY]
        ids = np.arange(len(self.space))
        high = sorted(ids, key=lambda v: (-sims[v], v))
        low = sorted(ids, key=lambda v: (sims[v], v))
        order: list[int] = []
        seen: set[int] = set()
        for h, l in zip(high, low):
            for vid in (int(h), int(l)):
                if vid not in seen:
                    seen.add(vid)
                    order.append(vid)
        return order

    # -- stepper surface --------------------------------------------------

    @property
    def pending_questions(self) -> tuple[Question, ...]:
        return tuple(self._pending)

    @property
    def remaining_budget(self) -> int:
        return self.config.budget - len(self.training)

    def submit_labels(self, answers: Mapping[str, Label | int | str]) -> int:
        """Record answers for pending questions; advance when the batch is
        complete. Returns the number of answers accepted. Unknown or
        already-answered question ids raise KeyError."""
        pending_ids = {q.question_id for q in self._pending}
        for qid in answers:
            if qid not in pending_ids:
                raise KeyError(f"unknown question id {qid!r}")
            if qid in self._answers:
                raise KeyError(f"question {qid!r} already answered")
        for qid, raw in answers.items():
            self._answers[qid] = _coerce_label(raw)
        accepted = len(answers)
        if len(self._answers) == len(self._pending):
            self._advance()
        return accepted

    # -- internals --------------------------------------------------------

    def _issue_batch(self, vector_ids: Sequence[int], seeding: bool) -> None:
        questions = []
        for vid in vector_ids:
            cid, pair = self.space.representative_edge(vid)
            cluster = self.clusters[_index_of(self.clusters, cid)]
            questions.append(
                Question(
                    question_id=f"q{self._question_seq:06d}",
                    vector_id=vid,
                    cluster_id=cid,
                    edge=pair,
                    similarity=cluster.similarity(*pair),
                )
            )
            self._question_seq += 1
        self._pending = questions
        self._answers = {}
        self._batch_issued_at = time.monotonic()
        if seeding:
            self._measures = {vid: _PendingMeasures() for vid in vector_ids}

    def _advance(self) -> None:
        elapsed = time.monotonic() - self._batch_issued_at
        for q in self._pending:
            label = self._answers[q.question_id]
            vec = self.space.vector(q.vector_id)
            self.training.add(LabeledExample(q.vector_id, vec.values, label))
            self.labeled.add(q.vector_id)
            m = self._measures.get(q.vector_id, _PendingMeasures())
            self.audit.append(
                AuditRecord(
                    iteration=self.iteration,
                    vector_id=q.vector_id,
                    record_a=q.edge[0],
                    record_b=q.edge[1],
                    unc=m.unc,
                    weight=m.weight,
                    cos=m.cos,
                    score=m.score,
                    label=label.name,
                    elapsed=elapsed,
                )
            )
        self._pending = []
        self._answers = {}
        self._measures = {}

        if not self.training.has_both_classes():
            if self.remaining_budget > 0 and self._seed_cursor < len(self._seed_order):
                nxt = self._seed_order[self._seed_cursor]
                self._seed_cursor += 1
                self._issue_batch([nxt], seeding=True)
                return
            raise InsufficientTraining(
                "seeding exhausted without observing both classes"
            )

        model_seed = _derive_seed(self.config.seed, len(self.training))
        self.model = train(self.training, self.config.k, model_seed)

        unlabeled = [v for v in range(len(self.space)) if v not in self.labeled]
        batch_size = min(self.config.iter_budget, self.remaining_budget, len(unlabeled))
        if batch_size <= 0:
            self.done = True
            return
        selected = self._select(unlabeled, batch_size)
        self.iteration += 1
        self._issue_batch(selected, seeding=False)

    def _select(self, unlabeled: list[int], batch_size: int) -> list[int]:
        rows = self.space.matrix()[unlabeled]
        fractions = self.model.predict_fractions(rows)
        unc = fractions * (1.0 - fractions)
        if self.config.strategy is Strategy.BOOTSTRAP:
            scores = unc
            self._measures = {
                vid: _PendingMeasures(unc=float(u), score=float(u))
                for vid, u in zip(unlabeled, unc)
            }
        else:
            d_T = training_distribution(
                self.labeled, self.space, self.size_of_cluster, len(self.d_C)
            )
            weight_by_size = self.d_C - d_T
            weights = np.array(
                [
                    cluster_weight(vid, weight_by_size, self.space, self.size_of_cluster)
                    for vid in unlabeled
                ]
            )
            cand_norm = self.space.normalize_matrix(rows)
            labeled_rows = self.space.matrix()[sorted(self.labeled)]
            cos = avg_cosine_distances(cand_norm, self.space.normalize_matrix(labeled_rows))
            scores = combine_measures(unc, weights, cos)
            self._measures = {
                vid: _PendingMeasures(
                    unc=float(u), weight=float(w), cos=float(c), score=float(s)
                )
                for vid, u, w, c, s in zip(unlabeled, unc, weights, cos, scores)
            }
        ranked = sorted(zip(unlabeled, scores), key=lambda t: (-t[1], t[0]))
        chosen = [vid for vid, _ in ranked[:batch_size]]
        self._measures = {vid: self._measures[vid] for vid in chosen}
        return chosen


def _index_of(clusters: Sequence[Cluster], cluster_id: int) -> int:
    lo, hi = 0, len(clusters)
    while lo < hi:
        mid = (lo + hi) // 2
        if clusters[mid].cluster_id < cluster_id:
            lo = mid + 1
        else:
            hi = mid
    return lo


def _coerce_label(raw) -> Label:
    if isinstance(raw, Label):
        return raw
    if isinstance(raw, str):
        return Label[raw]
    return Label(int(raw))


def _derive_seed(root_seed: int, counter: int) -> int:
    return int(np.random.SeedSequence([root_seed, counter]).generate_state(1)[0])


@dataclass
class RunResult:
    model: EnsembleModel | None
    training: TrainingSet
    audit: list[AuditRecord]
    iterations: int
    session: LabelSession = field(repr=False, default=None)


def run(
    clusters: Sequence[Cluster],
    space: FeatureSpace,
    oracle: Oracle,
    config: SelectionConfig,
    audit_path=None,
) -> RunResult:
    """Drive a full labeling session against a blocking oracle."""
    session = LabelSession(clusters, space, config)
    while not session.done:
        answers = {
            q.question_id: oracle.label(q.edge) for q in session.pending_questions
        }
        session.submit_labels(answers)
    if audit_path is not None:
        write_audit(audit_path, session.audit)
    return RunResult(
        model=session.model,
        training=session.training,
        audit=session.audit,
        iterations=session.iteration,
        session=session,
    )
