"""Labeling oracles: gold standard, replay file and interactive queue."""

from __future__ import annotations

import json
import queue
import threading
from typing import Mapping, Protocol

from .ensemble import Label
from .errors import MissingGold, OracleUnavailable
from .graph import edge_key


class Oracle(Protocol):
    def label(self, edge: tuple[str, str]) -> Label: ...


class GoldOracle:
    """Answers from ground-truth entity ids: match iff both records share one."""

    def __init__(self, gold: Mapping[str, str]):
        self._gold = dict(gold)

    def label(self, edge: tuple[str, str]) -> Label:
        u, v = edge
        try:
            eu, ev = self._gold[u], self._gold[v]
        except KeyError as exc:
            raise MissingGold(f"record {exc.args[0]!r} has no gold entity") from None
        return Label.MATCH if eu == ev else Label.NON_MATCH


class ReplayOracle:
    """Answers recorded in an earlier session's audit log (or a plain map)."""

    def __init__(self, answers: Mapping[tuple[str, str], Label]):
        self._answers = {edge_key(u, v): Label(lbl) for (u, v), lbl in answers.items()}

    @classmethod
    def from_audit_file(cls, path) -> "ReplayOracle":
        answers = {}
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                rec = json.loads(line)
                answers[(rec["record_a"], rec["record_b"])] = Label[rec["label"]]
        return cls(answers)

    def label(self, edge: tuple[str, str]) -> Label:
        key = edge_key(*edge)
        if key not in self._answers:
            raise OracleUnavailable(f"replay file has no answer for {key}")
        return self._answers[key]


class QueueOracle:
    """Bridges a labeling loop running in one thread to answers arriving from
    another (e.g. an HTTP handler). ``label`` blocks until ``answer`` is
    called; closing the oracle or exceeding the timeout raises
    OracleUnavailable in the waiting loop."""

    def __init__(self, timeout: float | None = None):
        self._timeout = timeout
        self._questions: queue.Queue = queue.Queue()
        self._answers: queue.Queue = queue.Queue()
        self._pending: tuple[str, str] | None = None
        self._closed = threading.Event()
        self._lock = threading.Lock()

    def label(self, edge: tuple[str, str]) -> Label:
        if self._closed.is_set():
            raise OracleUnavailable("oracle closed")
        with self._lock:
            self._pending = edge_key(*edge)
            self._questions.put(self._pending)
        try:
            answer = self._answers.get(timeout=self._timeout)
        except queue.Empty:
            raise OracleUnavailable(f"no answer within {self._timeout}s") from None
        if answer is None:
            raise OracleUnavailable("oracle closed while waiting")
        return Label(answer)

    def next_question(self, timeout: float | None = None) -> tuple[str, str] | None:
        """The edge currently awaiting an answer, or None on timeout/close."""
        try:
            return self._questions.get(timeout=timeout)
        except queue.Empty:
            return None

    def answer(self, label: Label) -> None:
        self._answers.put(int(label))

    def close(self) -> None:
        self._closed.set()
        self._answers.put(None)
