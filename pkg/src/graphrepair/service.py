"""HTTP session API bridging human labelers into the active-learning loop.

Each session owns a deterministic labeling stepper over a dataset loaded
server-side. Answers may arrive in any number of partial POSTs; once a batch
is complete the ensemble trains on a background thread (status TRAINING)
and the next batch becomes available. Every state transition persists a
snapshot (the ordered answer history), so a restarted process rebuilds the
exact session by replaying the answers over the rebuilt pipeline.
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import dataset_io
from .active_learning import LabelSession, SelectionConfig, Strategy
from .ensemble import Label
from .errors import GraphRepairError
from .pipeline import PipelineData, prepare
from .repair import repair_all

SCHEMA_VERSION = 1
STATE_DIR_ENV = "GRAPHREPAIR_STATE_DIR"

AWAITING_LABELS = "AWAITING_LABELS"
TRAINING = "TRAINING"
REPAIRING = "REPAIRING"
DONE = "DONE"


class ManagedSession:
    """One labeling session: stepper + dataset + persistence + status."""

    def __init__(
        self,
        session_id: str,
        records_path: str,
        edges_path: str,
        gold_path: str | None,
        config: SelectionConfig,
        threshold: float | None,
        data: PipelineData,
        snapshot_path: Path,
    ):
        self.session_id = session_id
        self.records_path = records_path
        self.edges_path = edges_path
        self.gold_path = gold_path
        self.config = config
        self.threshold = threshold
        self.data = data
        self.snapshot_path = snapshot_path
        self.lock = threading.RLock()
        self.stepper = LabelSession(data.clusters, data.space, config)
        self.status = DONE if self.stepper.done else AWAITING_LABELS
        self.partial: dict[str, Label] = {}
        self.answered: list[tuple[int, str]] = []  # (vector_id, label name)
        self.repaired: dict | None = None
        self.error: str | None = None

    # -- views -----------------------------------------------------------

    def open_questions(self):
        if self.status != AWAITING_LABELS:
            return []
        return [q for q in self.stepper.pending_questions if q.question_id not in self.partial]

    def question_payload(self, q) -> dict:
        rec_a = self.data.records[q.edge[0]]
        rec_b = self.data.records[q.edge[1]]
        as_obj = lambda r: {
            "record_id": r.record_id,
            "source_id": r.source_id,
            "attributes": r.attributes,
        }
        return {
            "question_id": q.question_id,
            "record_a": as_obj(rec_a),
            "record_b": as_obj(rec_b),
            "similarity": q.similarity,
        }

    def status_payload(self) -> dict:
        labeled = len(self.stepper.training) + len(self.partial)
        return {
            "schema_version": SCHEMA_VERSION,
            "session_id": self.session_id,
            "status": self.status,
            "budget": self.config.budget,
            "iter_budget": self.config.iter_budget,
            "labeled": labeled,
            "remaining_budget": self.config.budget - labeled,
            "iteration": self.stepper.iteration,
            "pending_count": len(self.open_questions()),
            "done_labeling": self.stepper.done,
            "repaired": self.repaired is not None,
            "error": self.error,
        }

    def clusters_payload(self) -> dict:
        if self.repaired is None:
            return {
                "schema_version": SCHEMA_VERSION,
                "repaired": False,
                "clusters": [],
                "non_match_edges": [],
            }
        return {
            "schema_version": SCHEMA_VERSION,
            "repaired": True,
            "clusters": self.repaired["clusters"],
            "non_match_edges": self.repaired["non_match_edges"],
        }

    # -- labeling ---------------------------------------------------------

    def accept_labels(self, answers: list[dict]) -> dict:
        with self.lock:
            if self.status == TRAINING:
                raise HTTPException(409, "training in progress; no open questions")
            pending_ids = {q.question_id for q in self.stepper.pending_questions}
            incoming: dict[str, Label] = {}
            for item in answers:
                qid = item.get("question_id")
                raw = item.get("label")
                if qid is None or raw is None:
                    raise HTTPException(400, "answers need question_id and label")
                if raw not in ("MATCH", "NON_MATCH"):
                    raise HTTPException(400, f"label must be MATCH or NON_MATCH, got {raw!r}")
                if qid not in pending_ids:
                    raise HTTPException(409, f"question {qid!r} is not pending")
                if qid in self.partial or qid in incoming:
                    raise HTTPException(409, f"question {qid!r} already answered")
                incoming[qid] = Label[raw]
            self.partial.update(incoming)
            committed = len(self.stepper.training) + len(self.partial)
            remaining = self.config.budget - committed
            complete = len(self.partial) == len(self.stepper.pending_questions)
            if complete:
                self.status = TRAINING
                batch = dict(self.partial)
                self.partial = {}
                thread = threading.Thread(
                    target=self._train_on, args=(batch,), daemon=True
                )
                thread.start()
            else:
                self.save_snapshot()
            return {
                "schema_version": SCHEMA_VERSION,
                "accepted": len(incoming),
                "remaining_budget": remaining,
            }

    def _train_on(self, batch: dict[str, Label]) -> None:
        try:
            by_qid = {q.question_id: q for q in self.stepper.pending_questions}
            ordered = [
                (by_qid[qid].vector_id, batch[qid].name)
                for qid in sorted(batch, key=lambda q: by_qid[q].question_id)
            ]
            self.stepper.submit_labels(batch)
            with self.lock:
                self.answered.extend(ordered)
                self.status = DONE if self.stepper.done else AWAITING_LABELS
                self.save_snapshot()
        except GraphRepairError as exc:
            with self.lock:
                self.error = str(exc)
                self.status = DONE
                self.save_snapshot()

    # -- repair -----------------------------------------------------------

    def run_repair(self) -> dict:
        with self.lock:
            if self.status in (TRAINING, REPAIRING):
                raise HTTPException(409, f"session is busy ({self.status})")
            if self.stepper.model is None:
                raise HTTPException(409, "no trained model yet; label the first batch")
            self.status = REPAIRING
        try:
            result = repair_all(self.data.clusters, self.stepper.model, self.data.space)
            clusters = [
                {"cluster_id": cid, "records": list(group)}
                for cid, group in enumerate(result.clusters)
            ]
            early = not self.stepper.done
            with self.lock:
                self.repaired = {
                    "clusters": clusters,
                    "non_match_edges": [list(p) for p in result.non_match_edges],
                }
                self.status = DONE
                self.save_snapshot()
            sizes: dict[int, int] = {}
            for group in result.clusters:
                sizes[len(group)] = sizes.get(len(group), 0) + 1
            return {
                "schema_version": SCHEMA_VERSION,
                "cluster_count": len(result.clusters),
                "record_count": sum(len(g) for g in result.clusters),
                "early": early,
                "size_histogram": {str(k): v for k, v in sorted(sizes.items())},
            }
        except GraphRepairError as exc:
            with self.lock:
                self.status = DONE if self.stepper.done else AWAITING_LABELS
            raise HTTPException(500, f"repair failed: {exc}") from None

    # -- persistence ------------------------------------------------------

    def save_snapshot(self) -> None:
        snapshot = {
            "schema_version": SCHEMA_VERSION,
            "session_id": self.session_id,
            "records_path": self.records_path,
            "edges_path": self.edges_path,
            "gold_path": self.gold_path,
            "threshold": self.threshold,
            "config": {
                "budget": self.config.budget,
                "iter_budget": self.config.iter_budget,
                "k": self.config.k,
                "seed": self.config.seed,
                "strategy": self.config.strategy.value,
            },
            "answered": [[vid, name] for vid, name in self.answered],
            "partial": {qid: lbl.name for qid, lbl in self.partial.items()},
            "repaired": self.repaired,
            "error": self.error,
        }
        tmp = self.snapshot_path.with_suffix(".tmp")
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(snapshot, fh, sort_keys=True)
        tmp.replace(self.snapshot_path)

    @classmethod
    def restore(cls, snapshot_path: Path) -> "ManagedSession":
        with open(snapshot_path, "r", encoding="utf-8") as fh:
            snap = json.load(fh)
        config = SelectionConfig(
            budget=snap["config"]["budget"],
            iter_budget=snap["config"]["iter_budget"],
            k=snap["config"]["k"],
            seed=snap["config"]["seed"],
            strategy=Strategy(snap["config"]["strategy"]),
        )
        data = _load_pipeline(snap["records_path"], snap["edges_path"], snap["threshold"])
        session = cls(
            snap["session_id"],
            snap["records_path"],
            snap["edges_path"],
            snap.get("gold_path"),
            config,
            snap.get("threshold"),
            data,
            snapshot_path,
        )
        pos = 0
        answered = [(int(vid), name) for vid, name in snap["answered"]]
        while pos < len(answered) and not session.stepper.done:
            pending = session.stepper.pending_questions
            chunk = answered[pos : pos + len(pending)]
            if len(chunk) < len(pending):
                break
            by_vid = {vid: name for vid, name in chunk}
            if set(by_vid) != {q.vector_id for q in pending}:
                raise GraphRepairError(
                    f"snapshot {snapshot_path} does not replay over the dataset"
                )
            session.stepper.submit_labels(
                {q.question_id: Label[by_vid[q.vector_id]] for q in pending}
            )
            session.answered.extend(chunk)
            pos += len(pending)
        session.partial = {
            qid: Label[name] for qid, name in snap.get("partial", {}).items()
        }
        session.repaired = snap.get("repaired")
        session.error = snap.get("error")
        session.status = DONE if session.stepper.done else AWAITING_LABELS
        return session


def _load_pipeline(records_path, edges_path, threshold) -> PipelineData:
    records = dataset_io.load_records(records_path)
    graph = dataset_io.load_edges(edges_path, records)
    return prepare(records, graph, threshold=threshold)


class SessionStore:
    def __init__(self, state_dir: Path):
        self.state_dir = state_dir
        self.state_dir.mkdir(parents=True, exist_ok=True)
        self.sessions: dict[str, ManagedSession] = {}
        self.lock = threading.Lock()

    def create(self, body: dict) -> ManagedSession:
        config_body = body.get("config") or {}
        try:
            config = SelectionConfig(
                budget=int(config_body["budget"]),
                iter_budget=int(config_body.get("iter_budget", 20)),
                k=int(config_body.get("k", 100)),
                seed=int(config_body.get("seed", 0)),
                strategy=Strategy(config_body.get("strategy", "bootstrap-ext")),
            )
        except (KeyError, ValueError) as exc:
            raise HTTPException(400, f"bad config: {exc}") from None
        records_path = body.get("records_path")
        edges_path = body.get("edges_path")
        if not records_path or not edges_path:
            raise HTTPException(400, "records_path and edges_path are required")
        threshold = body.get("threshold")
        try:
            data = _load_pipeline(records_path, edges_path, threshold)
        except (GraphRepairError, OSError) as exc:
            raise HTTPException(400, f"cannot load dataset: {exc}") from None
        session_id = uuid.uuid4().hex
        session = ManagedSession(
            session_id,
            records_path,
            edges_path,
            body.get("gold_path"),
            config,
            threshold,
            data,
            self.state_dir / f"{session_id}.json",
        )
        session.save_snapshot()
        with self.lock:
            self.sessions[session_id] = session
        return session

    def get(self, session_id: str) -> ManagedSession:
        with self.lock:
            session = self.sessions.get(session_id)
        if session is not None:
            return session
        snapshot = self.state_dir / f"{session_id}.json"
        if not snapshot.exists():
            raise HTTPException(404, f"unknown session {session_id!r}")
        try:
            session = ManagedSession.restore(snapshot)
        except (GraphRepairError, OSError, KeyError) as exc:
            raise HTTPException(500, f"cannot restore session: {exc}") from None
        with self.lock:
            self.sessions[session_id] = session
        return session


def create_app(state_dir: str | os.PathLike | None = None) -> FastAPI:
    directory = Path(
        state_dir
        or os.environ.get(STATE_DIR_ENV)
        or Path.cwd() / ".graphrepair_sessions"
    )
    app = FastAPI(title="graphrepair labeling service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    store = SessionStore(directory)
    app.state.store = store

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.post("/sessions", status_code=201)
    def create_session(body: dict):
        session = store.create(body)
        return {"schema_version": SCHEMA_VERSION, "session_id": session.session_id}

    @app.get("/sessions/{session_id}/status")
    def session_status(session_id: str):
        return store.get(session_id).status_payload()

    @app.get("/sessions/{session_id}/next")
    def next_questions(session_id: str):
        session = store.get(session_id)
        with session.lock:
            questions = [session.question_payload(q) for q in session.open_questions()]
        return {
            "schema_version": SCHEMA_VERSION,
            "session_id": session_id,
            "status": session.status,
            "questions": questions,
        }

    @app.post("/sessions/{session_id}/labels")
    def post_labels(session_id: str, body: dict):
        session = store.get(session_id)
        answers = body.get("answers")
        if not isinstance(answers, list):
            raise HTTPException(400, "body must carry an answers list")
        return session.accept_labels(answers)

    @app.post("/sessions/{session_id}/repair")
    def post_repair(session_id: str):
        return store.get(session_id).run_repair()

    @app.get("/sessions/{session_id}/clusters")
    def get_clusters(session_id: str):
        return store.get(session_id).clusters_payload()

    return app
