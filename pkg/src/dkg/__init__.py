"""Decision knowledge graph engine for clinical practice guidelines.

Store guideline flowcharts as a property graph whose nodes carry static text
plus a dynamic map of patient constraints, query it with a Cypher-subset
language, and answer natural-language treatment questions by deterministic
template translation.
"""

from .constraints import (
    Categorical,
    ConstraintExpr,
    Interval,
    Numeric,
    Presence,
    extract_constraints,
    normalize_fragment,
    parse_constraint,
    render_constraint,
    satisfies,
)
from .cql import execute, parse_query, pretty_print
from .graph import DecisionGraph, GraphStats
from .ingest import annotate, export_csv, load_csv, load_csv_file
from .metrics import bleu, evaluate, jaccard, rouge1
from .qa import Answer, QaRecord, answer

__version__ = "0.1.0"

__all__ = [
    "Answer",
    "Categorical",
    "ConstraintExpr",
    "DecisionGraph",
    "GraphStats",
    "Interval",
    "Numeric",
    "Presence",
    "QaRecord",
    "annotate",
    "answer",
    "bleu",
    "evaluate",
    "execute",
    "export_csv",
    "extract_constraints",
    "jaccard",
    "load_csv",
    "load_csv_file",
    "normalize_fragment",
    "parse_constraint",
    "parse_query",
    "pretty_print",
    "render_constraint",
    "rouge1",
    "satisfies",
]
