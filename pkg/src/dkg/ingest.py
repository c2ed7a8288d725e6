"""Build decision graphs from the guideline CSV formats.

Two formats exist. The parser-output format has two columns (head entity,
tail entity: the texts of an arrow's tail and head boxes). The builder format
adds a constraint column after each entity:

    Head entity, Head Constraints, Tail entity, Tail Constraints

Constraint cells hold ``NULL`` or comma-separated constraint fragments in the
canonical syntax of :mod:`dkg.constraints`. ``annotate`` lifts the 2-column
format to the 4-column one by running the keyword extractor over each entity.
``load_csv`` turns 4-column rows into a graph: one node per distinct
normalized entity text, one ``next_step`` relationship per row, node ids in
first-appearance order (heads before tails).
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from importlib import resources

from . import constraints as cs
from .graph import DecisionGraph, DuplicateRelationship

logger = logging.getLogger("dkg.ingest")

HEADER4 = ["Head entity", "Head Constraints", "Tail entity", "Tail Constraints"]
HEADER2 = ["Head entity", "Tail entity"]
NULL = "NULL"


class IngestError(Exception):
    pass


class MalformedRow(IngestError):
    def __init__(self, line: int, reason: str):
        self.line = line
        super().__init__(f"line {line}: {reason}")


class ConstraintConflict(IngestError):
    def __init__(self, entity: str, key: str):
        self.entity = entity
        self.key = key
        super().__init__(f"conflicting values for constraint {key!r} on entity {entity!r}")


@dataclass(frozen=True)
class CsvRow2:
    head: str
    tail: str


@dataclass(frozen=True)
class CsvRow4:
    head: str
    head_constraints: str
    tail: str
    tail_constraints: str


class LabelRules:
    """Content-pattern to node-label table (see data/labels.txt).

    First matching pattern wins; unmatched entities become ``decision_node``
    when they carry constraints and ``node`` otherwise.
    """

    def __init__(self, rules: list[tuple[str, str]]):
        self.rules = rules

    @classmethod
    def load(cls, name: str = "labels.txt") -> "LabelRules":
        rules = []
        text = resources.files("dkg.data").joinpath(name).read_text(encoding="utf-8")
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            pattern, label = (p.strip() for p in line.split("\t"))
            rules.append((pattern.lower(), label))
        return cls(rules)

    def assign(self, content: str, has_constraints: bool) -> str:
        normalized = " ".join(content.lower().split())
        for pattern, label in self.rules:
            if pattern in normalized:
                return label
        return "decision_node" if has_constraints else "node"


_default_labels: LabelRules | None = None


def default_labels() -> LabelRules:
    global _default_labels
    if _default_labels is None:
        _default_labels = LabelRules.load()
    return _default_labels


def split_fragments(text: str) -> list[str]:
    """Split a constraint cell on commas, ignoring commas inside interval
    brackets ("age in [15, 39]")."""
    out, buf, depth = [], [], 0
    for ch in text:
        if ch in "[(":
            depth += 1
        elif ch in "])":
            depth -= 1
        if ch == "," and depth == 0:
            out.append("".join(buf).strip())
            buf = []
        else:
            buf.append(ch)
    tail = "".join(buf).strip()
    if tail:
        out.append(tail)
    return [f for f in out if f]


def render_fragments(exprs: list[cs.ConstraintExpr]) -> str:
    """Inverse of the cell format: NULL for none, comma-joined otherwise."""
    if not exprs:
        return NULL
    return ", ".join(cs.render_constraint(e) for e in exprs)


def annotate(
    rows: list[CsvRow2],
    keywords: cs.KeywordTable | None = None,
    diagnostics: list[str] | None = None,
) -> list[CsvRow4]:
    """Run constraint extraction over every entity of 2-column rows."""
    out = []
    for i, row in enumerate(rows):
        line = i + 2  # 1-based, after the header row
        if not row.head.strip() or not row.tail.strip():
            raise MalformedRow(line, "empty entity text")
        head_exprs = cs.extract_constraints(row.head, keywords, diagnostics=diagnostics)
        tail_exprs = cs.extract_constraints(row.tail, keywords, diagnostics=diagnostics)
        out.append(
            CsvRow4(row.head, render_fragments(head_exprs), row.tail, render_fragments(tail_exprs))
        )
    return out


def _parse_cell(cell: str, line: int) -> list[cs.ConstraintExpr]:
    cell = cell.strip()
    if not cell or cell.upper() == NULL:
        return []
    exprs = []
    for fragment in split_fragments(cell):
        try:
            exprs.append(cs.parse_constraint(fragment))
        except cs.UnparsableConstraint as exc:
            raise MalformedRow(line, f"bad constraint fragment {fragment!r}") from exc
    return exprs


def load_csv(
    rows: list[CsvRow4],
    graph: DecisionGraph | None = None,
    labels: LabelRules | None = None,
    diagnostics: list[str] | None = None,
) -> DecisionGraph:
    """Build (or extend) a graph from 4-column rows.

    Identical normalized entity texts dedupe to one node. Re-stating an
    entity with the same constraints is fine; a different value for an
    already-set key raises ConstraintConflict. Duplicate relationships are
    skipped with a diagnostic during bulk load.
    """
    if graph is None:
        graph = DecisionGraph()
    if labels is None:
        labels = default_labels()

    def note(msg: str) -> None:
        logger.debug(msg)
        if diagnostics is not None:
            diagnostics.append(msg)

    def ensure(text: str, cell: str, line: int) -> int:
        text = text.strip()
        exprs = _parse_cell(cell, line)
        node_id = graph.find_node_by_content(text)
        if node_id is None:
            return graph.add_node(labels.assign(text, bool(exprs)), text, [(e.key, e.value) for e in exprs])
        node = graph.get_node(node_id)
        for expr in exprs:
            current = node.constraints.get(expr.key)
            if current is None:
                graph.set_constraint(node_id, expr.key, expr.value)
            elif current != expr.value:
                raise ConstraintConflict(text, expr.key)
        return node_id

    for i, row in enumerate(rows):
        line = i + 2
        if not row.head.strip() or not row.tail.strip():
            raise MalformedRow(line, "empty entity text")
        head_id = ensure(row.head, row.head_constraints, line)
        tail_id = ensure(row.tail, row.tail_constraints, line)
        try:
            graph.add_relationship(head_id, tail_id, "next_step")
        except DuplicateRelationship:
            note(f"ingest: skipped duplicate relationship at line {line}: ({head_id})-[:next_step]->({tail_id})")
    return graph


def export_csv(graph: DecisionGraph) -> list[CsvRow4]:
    """Rows that rebuild an isomorphic graph via load_csv.

    One row per ``next_step`` relationship; constraint cells use the canonical
    fragment syntax, so they reparse to the original values. Isolated nodes
    and non-default relationship types are outside the row format.
    """
    rows = []
    for rel in graph.relationships():
        if rel.rel_type != "next_step":
            continue
        head = graph.get_node(rel.src)
        tail = graph.get_node(rel.dst)
        rows.append(
            CsvRow4(
                head.content,
                cs.render_constraint_map(head.constraints) or NULL,
                tail.content,
                cs.render_constraint_map(tail.constraints) or NULL,
            )
        )
    return rows


# -- file I/O ------------------------------------------------------------------


def read_rows(path) -> list[CsvRow2] | list[CsvRow4]:
    """Read a guideline CSV; the header row decides the format."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedRow(1, "missing header row") from None
        header = [h.strip() for h in header]
        if header == HEADER4:
            width, cls = 4, CsvRow4
        elif header == HEADER2:
            width, cls = 2, CsvRow2
        else:
            raise MalformedRow(1, f"unrecognized header {header!r}")
        rows = []
        for line, record in enumerate(reader, start=2):
            if not record or all(not c.strip() for c in record):
                continue
            if len(record) != width:
                raise MalformedRow(line, f"expected {width} columns, got {len(record)}")
            rows.append(cls(*[c.strip() for c in record]))
    return rows


def write_rows(path, rows: list[CsvRow4]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(HEADER4)
        for row in rows:
            writer.writerow([row.head, row.head_constraints, row.tail, row.tail_constraints])


def load_csv_file(
    path,
    graph: DecisionGraph | None = None,
    diagnostics: list[str] | None = None,
) -> tuple[DecisionGraph, int]:
    """LOAD CSV entry point: read, annotate if 2-column, load. Returns the
    graph and the number of rows applied."""
    rows = read_rows(path)
    if rows and isinstance(rows[0], CsvRow2):
        rows = annotate(rows, diagnostics=diagnostics)
    graph = load_csv(rows, graph=graph, diagnostics=diagnostics)
    return graph, len(rows)
