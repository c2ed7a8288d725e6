"""Command-line shell: build snapshots from guideline CSVs, run queries,
evaluate datasets, and serve the HTTP API.

Set DKG_LOG=debug (or info/warning) to control log verbosity.
"""

from __future__ import annotations

import logging
import os
import sys

import click

from . import cql, ingest, metrics, qa
from .graph import DecisionGraph, GraphError


def _setup_logging() -> None:
    level = os.environ.get("DKG_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))


@click.group()
def main() -> None:
    """Decision knowledge graph engine."""
    _setup_logging()


@main.command()
@click.option("--input", "input_path", required=True, help="Guideline CSV (2 or 4 columns).")
@click.option("--snapshot", "snapshot_path", required=True, help="Snapshot file to write.")
def build(input_path: str, snapshot_path: str) -> None:
    """Build a graph snapshot from a guideline CSV."""
    if not os.path.isfile(input_path):
        click.echo(f"cannot read {input_path}", err=True)
        sys.exit(2)
    diagnostics: list[str] = []
    try:
        graph, rows = ingest.load_csv_file(input_path, diagnostics=diagnostics)
    except ingest.IngestError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    for line in diagnostics:
        click.echo(line, err=True)
    graph.save(snapshot_path)
    s = graph.stats()
    click.echo(f"rows={rows} total={s.total_nodes} decision={s.decision_nodes} relations={s.relations}")


def _load_snapshot(path: str) -> DecisionGraph:
    if not os.path.isfile(path):
        click.echo(f"cannot read {path}", err=True)
        sys.exit(2)
    try:
        return DecisionGraph.load(path)
    except (GraphError, ValueError) as exc:
        click.echo(f"bad snapshot: {exc}", err=True)
        sys.exit(2)


@main.command()
@click.option("--snapshot", "snapshot_path", required=True, help="Snapshot file.")
@click.option(
    "--precanonicalize",
    is_flag=True,
    help="Rewrite the legacy 'WHERE ... -[:rel]->var' form before parsing.",
)
@click.argument("query_text")
def query(snapshot_path: str, precanonicalize: bool, query_text: str) -> None:
    """Run one query; rows print tab-separated, mutations rewrite the snapshot."""
    graph = _load_snapshot(snapshot_path)
    if precanonicalize:
        query_text = cql.precanonicalize(query_text)
    try:
        ast = cql.parse_query(query_text)
    except cql.CqlError as exc:
        click.echo(str(exc), err=True)
        sys.exit(1)
    try:
        result = cql.execute(graph, ast)
    except (GraphError, ingest.IngestError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    if isinstance(result, cql.ResultSet):
        rendered = result.render()
        if rendered:
            click.echo(rendered)
    else:
        graph.save(snapshot_path)
        click.echo(f"modified: {result.modified}")


@main.command("eval")
@click.option("--snapshot", "snapshot_path", required=True, help="Snapshot file.")
@click.option("--dataset", "dataset_path", required=True, help="QA dataset JSON.")
@click.option("--report", "report_path", required=True, help="Report JSON to write.")
@click.option("--csv", "csv_path", default=None, help="Optional per-record CSV.")
def eval_cmd(snapshot_path: str, dataset_path: str, report_path: str, csv_path: str | None) -> None:
    """Answer every dataset record and write the evaluation report."""
    graph = _load_snapshot(snapshot_path)
    if not os.path.isfile(dataset_path):
        click.echo(f"cannot read {dataset_path}", err=True)
        sys.exit(2)
    try:
        records = qa.load_dataset(dataset_path)
        report = metrics.evaluate(graph, records)
    except metrics.EmptyDataset as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    except (ValueError, KeyError) as exc:
        click.echo(f"bad dataset: {exc}", err=True)
        sys.exit(1)
    report.save(report_path)
    if csv_path:
        report.save_csv(csv_path)
    click.echo(report.summary_line())


@main.command()
@click.option("--snapshot", "snapshot_path", required=True, help="Snapshot file.")
@click.option("--bind", default="127.0.0.1:8000", help="host:port to listen on.")
@click.option("--ui-dir", default=None, help="Directory of built UI assets to serve.")
def serve(snapshot_path: str, bind: str, ui_dir: str | None) -> None:
    """Serve the HTTP API (and the UI, when built) over a snapshot."""
    import uvicorn

    from .service import create_app

    graph = _load_snapshot(snapshot_path)
    host, _, port = bind.rpartition(":")
    app = create_app(graph, snapshot_path=snapshot_path, ui_dir=ui_dir)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))


if __name__ == "__main__":
    main()
