"""CSV loaders and writers for records, edges, gold standards, clusters and
the JSON-lines report.

All files are UTF-8 with LF line endings, a header line and minimal CSV
quoting. Writers emit rows in a fixed sort order so identical inputs always
produce identical bytes. Loaders reject malformed rows with the offending
line number instead of repairing them.
"""

from __future__ import annotations

import csv
import io
import json
from typing import Iterable, Mapping, Sequence

from .errors import (
    DuplicateRecordId,
    InvalidSimilarity,
    ParseError,
    UnknownRecord,
)
from .graph import Record, SimilarityGraph, build_graph


def _open_rows(path):
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        for row in reader:
            yield reader.line_num, row


def load_records(path) -> list[Record]:
    """Parse records.csv: record_id, source_id, then one column per attribute."""
    rows = _open_rows(path)
    try:
        _, header = next(rows)
    except StopIteration:
        raise ParseError(path, 1, "missing header") from None
    if len(header) < 2 or header[0] != "record_id" or header[1] != "source_id":
        raise ParseError(path, 1, "header must start with record_id,source_id")
    attr_names = header[2:]
    records: list[Record] = []
    seen: set[str] = set()
    for line_no, row in rows:
        if not row:
            continue
        if len(row) != len(header):
            raise ParseError(path, line_no, f"expected {len(header)} cells, got {len(row)}")
        rid, source = row[0], row[1]
        if rid in seen:
            raise DuplicateRecordId(f"{path}:{line_no}: duplicate record id {rid!r}")
        if not source:
            raise ParseError(path, line_no, f"record {rid!r} has an empty source_id")
        seen.add(rid)
        records.append(Record(rid, source, dict(zip(attr_names, row[2:]))))
    return records


def write_records(path, records: Sequence[Record]) -> None:
    attr_names: list[str] = []
    for r in records:
        for key in r.attributes:
            if key not in attr_names:
                attr_names.append(key)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["record_id", "source_id", *attr_names])
        for r in sorted(records, key=lambda r: r.record_id):
            writer.writerow(
                [r.record_id, r.source_id, *(r.attributes.get(a, "") for a in attr_names)]
            )


def load_edges(path, records: Sequence[Record]) -> SimilarityGraph:
    """Parse edges.csv (source_record_id, target_record_id, similarity) and
    build the validated graph."""
    rows = _open_rows(path)
    try:
        _, header = next(rows)
    except StopIteration:
        raise ParseError(path, 1, "missing header") from None
    if header != ["source_record_id", "target_record_id", "similarity"]:
        raise ParseError(
            path, 1, "header must be source_record_id,target_record_id,similarity"
        )
    known = {r.record_id for r in records}
    pairs: list[tuple[str, str, float]] = []
    for line_no, row in rows:
        if not row:
            continue
        if len(row) != 3:
            raise ParseError(path, line_no, f"expected 3 cells, got {len(row)}")
        u, v, text = row
        if u not in known:
            raise UnknownRecord(f"{path}:{line_no}: unknown record {u!r}")
        if v not in known:
            raise UnknownRecord(f"{path}:{line_no}: unknown record {v!r}")
        try:
            sim = float(text)
        except ValueError:
            raise ParseError(path, line_no, f"similarity {text!r} is not a number") from None
        if not 0.0 <= sim <= 1.0:
            raise InvalidSimilarity(
                f"{path}:{line_no}: similarity {sim!r} outside [0, 1]"
            )
        pairs.append((u, v, sim))
    return build_graph(records, pairs)


def write_edges(path, graph: SimilarityGraph) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["source_record_id", "target_record_id", "similarity"])
        for u, v, sim in graph.edges():
            writer.writerow([u, v, repr(sim)])


def load_gold(path) -> dict[str, str]:
    """Parse gold.csv: record_id, entity_id."""
    rows = _open_rows(path)
    try:
        _, header = next(rows)
    except StopIteration:
        raise ParseError(path, 1, "missing header") from None
    if header != ["record_id", "entity_id"]:
        raise ParseError(path, 1, "header must be record_id,entity_id")
    gold: dict[str, str] = {}
    for line_no, row in rows:
        if not row:
            continue
        if len(row) != 2:
            raise ParseError(path, line_no, f"expected 2 cells, got {len(row)}")
        rid, entity = row
        if rid in gold:
            raise ParseError(path, line_no, f"duplicate record id {rid!r}")
        gold[rid] = entity
    return gold


def write_gold(path, gold: Mapping[str, str]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["record_id", "entity_id"])
        for rid in sorted(gold):
            writer.writerow([rid, gold[rid]])


def write_clusters(path, assignments: Mapping[str, int]) -> None:
    """Write clusters.csv (record_id, cluster_id) sorted by (cluster, record)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["record_id", "cluster_id"])
        for rid, cid in sorted(assignments.items(), key=lambda kv: (kv[1], kv[0])):
            writer.writerow([rid, str(cid)])


def load_clusters(path) -> dict[str, int]:
    rows = _open_rows(path)
    try:
        _, header = next(rows)
    except StopIteration:
        raise ParseError(path, 1, "missing header") from None
    if header != ["record_id", "cluster_id"]:
        raise ParseError(path, 1, "header must be record_id,cluster_id")
    out: dict[str, int] = {}
    for line_no, row in rows:
        if not row:
            continue
        if len(row) != 2:
            raise ParseError(path, line_no, f"expected 2 cells, got {len(row)}")
        try:
            out[row[0]] = int(row[1])
        except ValueError:
            raise ParseError(path, line_no, f"cluster id {row[1]!r} is not an integer") from None
    return out


def write_report(path, reports: Iterable[Mapping]) -> None:
    """One JSON object per line, keys sorted: byte-deterministic for equal input."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for report in reports:
            fh.write(json.dumps(report, sort_keys=True) + "\n")


def load_report(path) -> list[dict]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(json.loads(line))
    return out


def dumps_report(reports: Iterable[Mapping]) -> str:
    buf = io.StringIO()
    for report in reports:
        buf.write(json.dumps(report, sort_keys=True) + "\n")
    return buf.getvalue()
