"""HTTP service over a decision graph snapshot.

JSON in, JSON out. Every response echoes the operation name; every error body
carries a machine-readable code (and a ``line:col`` position for query syntax
errors). Mutations run on one exclusive writer lane: each takes a private
copy of the current graph, applies the change, persists the snapshot, then
swaps the graph reference atomically, so concurrent readers always observe a
complete state, never a torn one.

Endpoints are documented in docs/http_api.md. The question-answering endpoint
always returns the generated query alongside the answer, and an empty match is
an explicit no_matching_guideline error, never a made-up recommendation.
"""

from __future__ import annotations

import threading
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import cql, fixtures, metrics, qa
from .constraints import ConstraintExpr, TypeMismatch, satisfies
from .graph import (
    ConstraintValue,
    DecisionGraph,
    GraphError,
    Node,
    UnknownNode,
    value_from_json,
    value_to_json,
)
from .ingest import IngestError


class GraphStore:
    """Single-writer holder: readers take the current reference, writers
    copy-mutate-swap under the lock."""

    def __init__(self, graph: DecisionGraph, snapshot_path: str | None = None):
        self._graph = graph
        self._lock = threading.Lock()
        self.snapshot_path = snapshot_path

    @property
    def graph(self) -> DecisionGraph:
        return self._graph

    def mutate(self, fn):
        with self._lock:
            draft = self._graph.copy()
            result = fn(draft)
            if self.snapshot_path:
                draft.save(self.snapshot_path)
            self._graph = draft
            return result


class QueryBody(BaseModel):
    query: str
    precanonicalize: bool = False


class AskBody(BaseModel):
    question: str


class StepBody(BaseModel):
    node_id: int | None = None
    params: dict[str, float | int | str] = {}


class SetConstraintBody(BaseModel):
    node_id: int
    key: str
    value: dict


class RemoveConstraintBody(BaseModel):
    node_id: int
    key: str


class EvaluateBody(BaseModel):
    records: list[dict] | None = None


def _error(operation: str, code: str, message: str, status: int, **extra) -> JSONResponse:
    body = {"operation": operation, "error": {"code": code, "message": message, **extra}}
    return JSONResponse(status_code=status, content=body)


def _node_payload(node: Node) -> dict:
    return {
        "id": node.id,
        "label": node.label,
        "content": node.content,
        "constraints": {k: value_to_json(v) for k, v in node.constraints.items()},
        "is_decision_node": node.is_decision_node,
    }


def derive_params(params: dict) -> dict:
    """Service-side param enrichment: a numeric age implies its age_cat
    token, so category-constrained branches light up from raw ages."""
    out = dict(params)
    age = out.get("age")
    if isinstance(age, (int, float)) and "age_cat" not in out:
        out["age_cat"] = qa.age_category(float(age))
    return out


def _branch_options(graph: DecisionGraph, node_id: int, params: dict) -> list[dict]:
    options = []
    enriched = derive_params(params)
    for succ_id in graph.neighbors(node_id, "next_step", "outgoing"):
        succ = graph.get_node(succ_id)
        satisfied = True
        failed: list[str] = []
        for key, value in succ.constraints.items():
            try:
                ok = satisfies(enriched, ConstraintExpr(key, value))
            except TypeMismatch:
                ok = False
            if not ok:
                satisfied = False
                failed.append(key)
        options.append(
            {**_node_payload(succ), "satisfied": satisfied, "unsatisfied_keys": failed}
        )
    return options


def create_app(
    graph: DecisionGraph | None = None,
    snapshot_path: str | None = None,
    ui_dir: str | None = None,
) -> FastAPI:
    if graph is None:
        graph = fixtures.load_guideline()
    store = GraphStore(graph, snapshot_path)
    app = FastAPI(title="dkg", docs_url=None, redoc_url=None)
    app.state.store = store

    @app.exception_handler(UnknownNode)
    async def _unknown_node(request: Request, exc: UnknownNode):
        return _error(request.url.path, "unknown_node", str(exc), 404)

    @app.get("/api/stats")
    def stats():
        s = store.graph.stats()
        return {
            "operation": "stats",
            "total_nodes": s.total_nodes,
            "decision_nodes": s.decision_nodes,
            "relations": s.relations,
        }

    @app.get("/api/root")
    def root():
        roots = store.graph.root_ids()
        return {"operation": "root", "node_id": roots[0] if roots else None}

    @app.get("/api/nodes/{node_id}")
    def node_detail(node_id: int):
        return {"operation": "node", "node": _node_payload(store.graph.get_node(node_id))}

    @app.post("/api/step")
    def step(body: StepBody):
        g = store.graph
        node_id = body.node_id
        if node_id is None:
            roots = g.root_ids()
            if not roots:
                return _error("step", "empty_graph", "graph has no nodes", 404)
            node_id = roots[0]
        node = g.get_node(node_id)
        return {
            "operation": "step",
            "node": _node_payload(node),
            "options": _branch_options(g, node_id, body.params),
        }

    @app.post("/api/query")
    def query(body: QueryBody):
        text = body.query
        if body.precanonicalize:
            text = cql.precanonicalize(text)
        try:
            ast = cql.parse_query(text)
        except cql.CqlSyntaxError as exc:
            return _error(
                "query", "syntax_error", str(exc), 400, position=f"{exc.line}:{exc.col}"
            )
        except cql.CqlError as exc:
            return _error("query", "bad_query", str(exc), 400)
        if isinstance(ast, cql.MatchReturn):
            result = cql.execute(store.graph, ast)
            return {
                "operation": "query",
                "columns": result.columns,
                "rows": [{"cells": r.cells, "nodes": r.nodes} for r in result.rows],
                "rendered": result.render(),
            }
        try:
            summary = store.mutate(lambda g: cql.execute(g, ast))
        except (GraphError, IngestError) as exc:
            return _error("query", "mutation_failed", str(exc), 400)
        return {"operation": "query", "kind": summary.kind, "modified": summary.modified}

    @app.post("/api/ask")
    def ask(body: AskBody):
        try:
            ans = qa.answer(store.graph, body.question)
        except qa.NoMatchingGuideline as exc:
            return _error("ask", exc.code, str(exc), 404, query=exc.query)
        except qa.QaError as exc:
            return _error("ask", exc.code, str(exc), 422)
        return {
            "operation": "ask",
            "answer": ans.text,
            "node_id": ans.node_id,
            "query": ans.query,
        }

    @app.post("/api/constraints/set")
    def set_constraint(body: SetConstraintBody):
        try:
            value: ConstraintValue = value_from_json(body.value)
        except (KeyError, ValueError) as exc:
            return _error("set_constraint", "bad_value", str(exc), 422)
        store.mutate(lambda g: g.set_constraint(body.node_id, body.key, value))
        return {
            "operation": "set_constraint",
            "node": _node_payload(store.graph.get_node(body.node_id)),
        }

    @app.post("/api/constraints/remove")
    def remove_constraint(body: RemoveConstraintBody):
        removed = store.mutate(lambda g: g.remove_constraint(body.node_id, body.key))
        return {
            "operation": "remove_constraint",
            "removed": removed,
            "node": _node_payload(store.graph.get_node(body.node_id)),
        }

    @app.post("/api/evaluate")
    def run_evaluation(body: EvaluateBody):
        if body.records is None:
            records = fixtures.load_bundled_dataset()
        else:
            records = [qa.QaRecord.from_json(r) for r in body.records]
        try:
            report = metrics.evaluate(store.graph, records)
        except metrics.EmptyDataset as exc:
            return _error("evaluate", "empty_dataset", str(exc), 422)
        return {"operation": "evaluate", "report": report.to_json()}

    ui = Path(ui_dir) if ui_dir else Path(__file__).resolve().parents[2] / "frontend" / "dist"
    if ui.is_dir():
        app.mount("/", StaticFiles(directory=str(ui), html=True), name="ui")
    return app
