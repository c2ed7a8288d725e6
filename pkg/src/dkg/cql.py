"""Cypher-subset query language for the decision graph.

Statement forms: MATCH ... RETURN / SET / REMOVE, and LOAD CSV FROM '<path>'.
The full grammar ships in docs/query_language.md as EBNF. Parsing is a hand
written recursive descent over a small token stream; errors carry ``line:col``
positions. ``pretty_print`` emits the canonical rendering (``:`` in property
maps, single quotes, one space after commas, uppercase keywords), and
``parse_query(pretty_print(ast)) == ast`` for every well-formed tree.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from . import constraints as cs
from .graph import DecisionGraph, Node

CONTENT_ALIASES = ("treatment", "treatments")

Literal = str | int | float


class CqlError(Exception):
    pass


class CqlSyntaxError(CqlError):
    def __init__(self, line: int, col: int, expected: str):
        self.line = line
        self.col = col
        self.expected = expected
        super().__init__(f"{line}:{col}: expected {expected}")


class UnboundVariable(CqlError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unbound variable {name!r}")


# -- AST ---------------------------------------------------------------------


@dataclass(frozen=True)
class Traversal:
    rel_type: str
    direction: str  # "outgoing" | "incoming"
    target_var: str


@dataclass(frozen=True)
class Condition:
    var: str
    key: str
    op: str  # = < > <= >= <> contains
    literal: Literal


@dataclass(frozen=True)
class MatchPart:
    var: str
    label: str | None = None
    filters: tuple[tuple[str, Literal], ...] = ()
    traversal: Traversal | None = None
    where: tuple[Condition, ...] = ()

    def bound_vars(self) -> tuple[str, ...]:
        if self.traversal:
            return (self.var, self.traversal.target_var)
        return (self.var,)


@dataclass(frozen=True)
class Projection:
    var: str
    key: str | None = None  # None projects the node's content


@dataclass(frozen=True)
class MatchReturn:
    match: MatchPart
    projection: tuple[Projection, ...]


@dataclass(frozen=True)
class MatchSet:
    match: MatchPart
    assignments: tuple[tuple[str, str, Literal], ...]  # (var, key, literal)


@dataclass(frozen=True)
class MatchRemove:
    match: MatchPart
    keys: tuple[tuple[str, str], ...]  # (var, key)


@dataclass(frozen=True)
class LoadCsv:
    source: str


QueryAst = MatchReturn | MatchSet | MatchRemove | LoadCsv


# -- lexer --------------------------------------------------------------------

_KEYWORDS = {"match", "where", "return", "set", "remove", "and", "contains", "load", "csv", "from"}

_TOKEN_SPEC = [
    ("ARROW_R", r"->"),
    ("ARROW_L", r"<-(?=\s*\[)"),
    ("LE", r"<="),
    ("GE", r">="),
    ("NE", r"<>"),
    ("NUMBER", r"\d+(?:\.\d+)?"),
    ("IDENT", r"[A-Za-z_][A-Za-z0-9_]*"),
    ("LT", r"<"),
    ("GT", r">"),
    ("EQ", r"="),
    ("LPAREN", r"\("),
    ("RPAREN", r"\)"),
    ("LBRACE", r"\{"),
    ("RBRACE", r"\}"),
    ("LBRACKET", r"\["),
    ("RBRACKET", r"\]"),
    ("COLON", r":"),
    ("COMMA", r","),
    ("DOT", r"\."),
    ("DASH", r"-"),
    ("WS", r"\s+"),
]
_TOKEN_RE = re.compile("|".join(f"(?P<{name}>{pattern})" for name, pattern in _TOKEN_SPEC))


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def _lex(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    line, col = 1, 1
    n = len(text)
    while pos < n:
        ch = text[pos]
        if ch == "'" or ch == "`":
            # single-quoted string; typographic backtick-open accepted and
            # normalized, closing quote is always '
            start_line, start_col = line, col
            pos += 1
            col += 1
            buf = []
            while pos < n and text[pos] != "'":
                if text[pos] == "\\" and pos + 1 < n:
                    buf.append(text[pos + 1])
                    pos += 2
                    col += 2
                    continue
                if text[pos] == "\n":
                    line += 1
                    col = 1
                else:
                    col += 1
                buf.append(text[pos])
                pos += 1
            if pos >= n:
                raise CqlSyntaxError(start_line, start_col, "closing quote")
            pos += 1
            col += 1
            tokens.append(Token("STRING", "".join(buf), start_line, start_col))
            continue
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise CqlSyntaxError(line, col, f"valid token (got {ch!r})")
        kind = m.lastgroup
        value = m.group()
        if kind == "WS":
            newlines = value.count("\n")
            if newlines:
                line += newlines
                col = len(value) - value.rfind("\n")
            else:
                col += len(value)
            pos = m.end()
            continue
        if kind == "IDENT" and value.lower() in _KEYWORDS:
            tokens.append(Token(value.upper() + "_KW", value, line, col))
        else:
            tokens.append(Token(kind, value, line, col))
        col += len(value)
        pos = m.end()
    tokens.append(Token("EOF", "", line, col))
    return tokens


# -- parser -------------------------------------------------------------------


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    @property
    def cur(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        tok = self.cur
        self.i += 1
        return tok

    def accept(self, kind: str) -> Token | None:
        if self.cur.kind == kind:
            return self.advance()
        return None

    def expect(self, kind: str, what: str) -> Token:
        tok = self.accept(kind)
        if tok is None:
            raise CqlSyntaxError(self.cur.line, self.cur.col, what)
        return tok

    def parse_statement(self) -> QueryAst:
        if self.cur.kind == "LOAD_KW":
            return self.parse_load()
        self.expect("MATCH_KW", "MATCH or LOAD CSV")
        var, label, filters = self.parse_node_pattern()
        traversal = self.parse_traversal_opt()
        where: list[Condition] = []
        if self.cur.kind == "WHERE_KW":
            where.extend(self.parse_where())
        while self.cur.kind == "MATCH_KW":
            self.advance()
            tok = self.expect("LPAREN", "(")
            ref = self.expect("IDENT", "variable name").text
            if ref != var:
                raise UnboundVariable(ref)
            self.expect("RPAREN", ")")
            extra = self.parse_traversal_opt()
            if extra is None:
                raise CqlSyntaxError(tok.line, tok.col, "traversal after repeated MATCH")
            if traversal is not None:
                raise CqlSyntaxError(tok.line, tok.col, "a single traversal (one hop supported)")
            traversal = extra
            if self.cur.kind == "WHERE_KW":
                where.extend(self.parse_where())
        match = MatchPart(var, label, tuple(filters), traversal, tuple(where))
        for cond in match.where:
            if cond.var not in match.bound_vars():
                raise UnboundVariable(cond.var)
        if self.cur.kind == "RETURN_KW":
            self.advance()
            projection = self.parse_projection(match)
            self.expect("EOF", "end of query")
            return MatchReturn(match, projection)
        if self.cur.kind == "SET_KW":
            self.advance()
            assignments = self.parse_assignments(match)
            self.expect("EOF", "end of query")
            return MatchSet(match, assignments)
        if self.cur.kind == "REMOVE_KW":
            self.advance()
            keys = self.parse_remove_keys(match)
            self.expect("EOF", "end of query")
            return MatchRemove(match, keys)
        raise CqlSyntaxError(self.cur.line, self.cur.col, "RETURN, SET or REMOVE")

    def parse_load(self) -> LoadCsv:
        self.expect("LOAD_KW", "LOAD")
        self.expect("CSV_KW", "CSV")
        self.expect("FROM_KW", "FROM")
        source = self.expect("STRING", "quoted path").text
        self.expect("EOF", "end of query")
        return LoadCsv(source)

    def parse_node_pattern(self) -> tuple[str, str | None, list[tuple[str, Literal]]]:
        self.expect("LPAREN", "(")
        var = self.expect("IDENT", "variable name").text
        label = None
        if self.accept("COLON"):
            label = self.expect("IDENT", "label").text
        filters: list[tuple[str, Literal]] = []
        if self.accept("LBRACE"):
            while True:
                key = self.expect("IDENT", "property key").text.lower()
                if not (self.accept("COLON") or self.accept("EQ")):
                    raise CqlSyntaxError(self.cur.line, self.cur.col, "':' or '='")
                filters.append((key, self.parse_literal()))
                if not self.accept("COMMA"):
                    break
            self.expect("RBRACE", "}")
        self.expect("RPAREN", ")")
        return var, label, filters

    def parse_traversal_opt(self) -> Traversal | None:
        if self.cur.kind == "DASH":
            self.advance()
            rel = self.parse_rel_name()
            self.expect("ARROW_R", "->")
            target = self.parse_target_var()
            return Traversal(rel, "outgoing", target)
        if self.cur.kind == "ARROW_L":
            self.advance()
            rel = self.parse_rel_name()
            self.expect("DASH", "-")
            target = self.parse_target_var()
            return Traversal(rel, "incoming", target)
        return None

    def parse_rel_name(self) -> str:
        self.expect("LBRACKET", "[")
        self.expect("COLON", ":")
        rel = self.expect("IDENT", "relationship type").text
        self.expect("RBRACKET", "]")
        return rel

    def parse_target_var(self) -> str:
        # paper prints the bare form "-> n"; canonical form parenthesizes
        if self.accept("LPAREN"):
            name = self.expect("IDENT", "variable name").text
            self.expect("RPAREN", ")")
            return name
        return self.expect("IDENT", "variable name").text

    def parse_where(self) -> list[Condition]:
        self.expect("WHERE_KW", "WHERE")
        conds = [self.parse_condition()]
        while self.cur.kind == "AND_KW":
            self.advance()
            conds.append(self.parse_condition())
        return conds

    def parse_condition(self) -> Condition:
        var = self.expect("IDENT", "variable name").text
        self.expect("DOT", ".")
        key = self.expect("IDENT", "property key").text.lower()
        tok = self.cur
        if tok.kind == "CONTAINS_KW":
            self.advance()
            value = self.expect("STRING", "quoted text").text
            return Condition(var, key, "contains", value)
        ops = {"EQ": "=", "LT": "<", "GT": ">", "LE": "<=", "GE": ">=", "NE": "<>"}
        if tok.kind not in ops:
            raise CqlSyntaxError(tok.line, tok.col, "comparison operator or CONTAINS")
        self.advance()
        return Condition(var, key, ops[tok.kind], self.parse_literal())

    def parse_projection(self, match: MatchPart) -> tuple[Projection, ...]:
        items = []
        while True:
            var = self.expect("IDENT", "variable name").text
            if var not in match.bound_vars():
                raise UnboundVariable(var)
            key = None
            if self.accept("DOT"):
                key = self.expect("IDENT", "property key").text.lower()
            items.append(Projection(var, key))
            if not self.accept("COMMA"):
                break
        return tuple(items)

    def parse_assignments(self, match: MatchPart) -> tuple[tuple[str, str, Literal], ...]:
        out = []
        while True:
            var = self.expect("IDENT", "variable name").text
            if var not in match.bound_vars():
                raise UnboundVariable(var)
            self.expect("DOT", ".")
            key = self.expect("IDENT", "property key").text.lower()
            self.expect("EQ", "=")
            out.append((var, key, self.parse_literal()))
            if not self.accept("COMMA"):
                break
        return tuple(out)

    def parse_remove_keys(self, match: MatchPart) -> tuple[tuple[str, str], ...]:
        out = []
        while True:
            var = self.expect("IDENT", "variable name").text
            if var not in match.bound_vars():
                raise UnboundVariable(var)
            self.expect("DOT", ".")
            out.append((var, self.expect("IDENT", "property key").text.lower()))
            if not self.accept("COMMA"):
                break
        return tuple(out)

    def parse_literal(self) -> Literal:
        tok = self.cur
        if tok.kind == "STRING":
            self.advance()
            return tok.text
        negative = False
        if tok.kind == "DASH":
            self.advance()
            negative = True
            tok = self.cur
        if tok.kind == "NUMBER":
            self.advance()
            value = float(tok.text)
            value = int(value) if value.is_integer() else value
            return -value if negative else value
        raise CqlSyntaxError(tok.line, tok.col, "string or number literal")


def parse_query(text: str) -> QueryAst:
    """Parse a query into its AST; raises CqlSyntaxError / UnboundVariable."""
    if not text.strip():
        raise CqlSyntaxError(1, 1, "a non-empty query")
    return _Parser(_lex(text)).parse_statement()


_LEGACY_TRAVERSAL = re.compile(r"-\s*\[\s*:\s*\w+\s*\]\s*->\s*\(?\w+\)?")


def precanonicalize(text: str) -> str:
    """Rewrite the legacy dataset form "WHERE cond -[:rel]->k" into a valid
    second MATCH clause. Queries that are already well-formed pass through
    unchanged."""
    m = _LEGACY_TRAVERSAL.search(text)
    if not m:
        return text
    head = text[: m.start()].rstrip()
    if not head or head.endswith(")") or "where" not in head.lower():
        return text
    var_m = re.search(r"MATCH\s*\(\s*(\w+)", text, re.I)
    if not var_m:
        return text
    return f"{head} MATCH ({var_m.group(1)}){text[m.start():]}"


# -- pretty printer -----------------------------------------------------------


def _fmt_literal(value: Literal) -> str:
    if isinstance(value, str):
        escaped = value.replace("\\", "\\\\").replace("'", "\\'")
        return f"'{escaped}'"
    if isinstance(value, float) and value.is_integer():
        return str(int(value))
    return str(value)


def _fmt_match(match: MatchPart) -> str:
    out = f"MATCH ({match.var}"
    if match.label:
        out += f":{match.label}"
    if match.filters:
        pairs = ", ".join(f"{k}: {_fmt_literal(v)}" for k, v in match.filters)
        out += "{" + pairs + "}"
    out += ")"
    if match.traversal:
        t = match.traversal
        if t.direction == "outgoing":
            out += f"-[:{t.rel_type}]->({t.target_var})"
        else:
            out += f"<-[:{t.rel_type}]-({t.target_var})"
    if match.where:
        conds = " AND ".join(
            f"{c.var}.{c.key} CONTAINS {_fmt_literal(c.literal)}"
            if c.op == "contains"
            else f"{c.var}.{c.key} {c.op} {_fmt_literal(c.literal)}"
            for c in match.where
        )
        out += f" WHERE {conds}"
    return out


def pretty_print(ast: QueryAst) -> str:
    """Canonical text for an AST; reparses to an equal tree."""
    if isinstance(ast, LoadCsv):
        return f"LOAD CSV FROM {_fmt_literal(ast.source)}"
    if isinstance(ast, MatchReturn):
        items = ", ".join(
            f"{p.var}.{p.key}" if p.key else p.var for p in ast.projection
        )
        return f"{_fmt_match(ast.match)} RETURN {items}"
    if isinstance(ast, MatchSet):
        items = ", ".join(
            f"{var}.{key} = {_fmt_literal(value)}" for var, key, value in ast.assignments
        )
        return f"{_fmt_match(ast.match)} SET {items}"
    items = ", ".join(f"{var}.{key}" for var, key in ast.keys)
    return f"{_fmt_match(ast.match)} REMOVE {items}"


# -- evaluator ----------------------------------------------------------------


@dataclass
class Row:
    cells: dict[str, str | None]
    nodes: dict[str, int]  # var -> node id


@dataclass
class ResultSet:
    columns: list[str]
    rows: list[Row]

    def render(self) -> str:
        """Stable text rendering: one row per line, tab-separated cells,
        missing values as ``null``."""
        lines = []
        for row in self.rows:
            lines.append(
                "\t".join(
                    "null" if row.cells[c] is None else str(row.cells[c])
                    for c in self.columns
                )
            )
        return "\n".join(lines)


@dataclass(frozen=True)
class MutationSummary:
    kind: str  # "set" | "remove" | "load"
    modified: int


def _label_matches(node: Node, label: str | None) -> bool:
    # "node" is the paper's generic label and matches everything
    if label is None or label.lower() == "node":
        return True
    return node.label.lower() == label.lower()


def _filter_predicate(literal: Literal) -> cs.FilterPredicate:
    if isinstance(literal, str):
        return cs.Equals(literal)
    return cs.NumericValue(float(literal))


def _node_text(node: Node, key: str) -> str | None:
    """Projected text for var.key; None is the explicit null marker."""
    if key == "content":
        return node.content
    if key == "constraints":
        return cs.render_constraint_map(node.constraints)
    value = node.constraints.get(key)
    if value is not None:
        if isinstance(value, cs.Categorical):
            return value.value
        if isinstance(value, cs.Presence):
            return "present" if value.present else "absent"
        if isinstance(value, cs.Numeric):
            rendered = cs.render_value(value)  # "=53", "<65", ...
            return rendered[1:] if value.op == "=" else rendered
        return cs.render_value(value).strip()  # "in [15, 39]"
    if key in CONTENT_ALIASES:
        return node.content
    return None


def _condition_holds(node: Node, cond: Condition) -> bool:
    if cond.op == "contains":
        text = _node_text(node, cond.key)
        return text is not None and str(cond.literal).lower() in text.lower()
    if cond.key == "content" or (
        cond.key in CONTENT_ALIASES and cond.key not in node.constraints
    ):
        if cond.op == "=":
            return str(cond.literal).strip().lower() == node.content.strip().lower()
        if cond.op == "<>":
            return str(cond.literal).strip().lower() != node.content.strip().lower()
        return False
    value = node.constraints.get(cond.key)
    if value is None:
        return False
    if cond.op == "=":
        return cs.matches_filter(value, _filter_predicate(cond.literal))
    if cond.op == "<>":
        return not cs.matches_filter(value, _filter_predicate(cond.literal))
    if isinstance(cond.literal, str):
        return False
    return cs.matches_filter(
        value, cs.RangeTest(cs.Numeric(cond.op, float(cond.literal)))
    )


def _match_nodes(graph: DecisionGraph, match: MatchPart) -> list[Node]:
    """Single pass over all nodes: label + property map + WHERE on the match
    variable."""
    out = []
    var_conds = [c for c in match.where if c.var == match.var]
    preds = [(key, _filter_predicate(lit)) for key, lit in match.filters]
    for node in graph.nodes():
        graph.op_counts["nodes_visited"] += 1
        if not _label_matches(node, match.label):
            continue
        ok = all(
            (v := node.constraints.get(key)) is not None and cs.matches_filter(v, pred)
            for key, pred in preds
        )
        if ok and all(_condition_holds(node, c) for c in var_conds):
            out.append(node)
    return out


def _bindings(graph: DecisionGraph, match: MatchPart) -> list[dict[str, Node]]:
    matched = _match_nodes(graph, match)
    if match.traversal is None:
        return [{match.var: node} for node in matched]
    t = match.traversal
    target_conds = [c for c in match.where if c.var == t.target_var]
    rows = []
    for node in matched:
        for other_id in graph.neighbors(node.id, t.rel_type, t.direction):
            other = graph.get_node(other_id)
            if all(_condition_holds(other, c) for c in target_conds):
                rows.append({match.var: node, t.target_var: other})
    return rows


def execute(graph: DecisionGraph, ast: QueryAst) -> ResultSet | MutationSummary:
    """Run a parsed query against a graph.

    MATCH..RETURN produces a ResultSet ordered by ascending matched node id
    (then target id). SET/REMOVE resolve the match once, mutate each matched
    node in constant time, and report how many nodes changed. LOAD CSV
    delegates to the ingest module.
    """
    if isinstance(ast, LoadCsv):
        from . import ingest

        _, added = ingest.load_csv_file(ast.source, graph=graph)
        return MutationSummary("load", added)
    if isinstance(ast, MatchReturn):
        columns = [f"{p.var}.{p.key}" if p.key else p.var for p in ast.projection]
        rows = []
        for binding in _bindings(graph, ast.match):
            cells = {}
            for proj, name in zip(ast.projection, columns):
                node = binding[proj.var]
                cells[name] = node.content if proj.key is None else _node_text(node, proj.key)
            rows.append(Row(cells, {v: n.id for v, n in binding.items()}))
        return ResultSet(columns, rows)
    if isinstance(ast, MatchSet):
        bindings = _bindings(graph, ast.match)
        touched = set()
        for binding in bindings:
            for var, key, literal in ast.assignments:
                node = binding[var]
                value = (
                    cs.Categorical(str(literal).lower(), str(literal))
                    if isinstance(literal, str)
                    else cs.Numeric("=", float(literal))
                )
                graph.set_constraint(node.id, key, value)
                touched.add(node.id)
        return MutationSummary("set", len(touched))
    bindings = _bindings(graph, ast.match)
    touched = set()
    for binding in bindings:
        for var, key in ast.keys:
            node = binding[var]
            if graph.remove_constraint(node.id, key):
                touched.add(node.id)
    return MutationSummary("remove", len(touched))


def run(graph: DecisionGraph, text: str) -> ResultSet | MutationSummary:
    """Parse and execute in one step."""
    return execute(graph, parse_query(text))
