"""Patient-constraint expressions: parsing, rendering, and satisfaction.

Constraints are the dynamic "decision dimension" attached to guideline graph
nodes: conditions like ``age<65``, ``mrd=rising``, ``age in [15, 39]`` or
``comorbidities=absent``. This module owns the constraint value types, the
fragment grammar, the keyword-driven extractor that pulls constraints out of
free guideline text, and the two satisfaction relations used everywhere else:

* ``satisfies(params, expr)`` — does a concrete patient match a constraint?
* ``matches_filter(value, pred)`` — does a stored constraint value pass a
  query filter?
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources


class UnparsableConstraint(ValueError):
    """No grammar rule applies to the given fragment."""

    def __init__(self, text: str):
        self.text = text
        super().__init__(f"unparsable constraint fragment: {text!r}")


class TypeMismatch(TypeError):
    """A numeric predicate met a textual patient parameter."""


@dataclass(frozen=True)
class Categorical:
    """A token-valued constraint, compared case-insensitively."""

    value: str
    display: str = field(default="", compare=False)

    def __post_init__(self):
        if not self.display:
            object.__setattr__(self, "display", self.value)


@dataclass(frozen=True)
class Numeric:
    """A single comparison against a number, e.g. ``< 65``."""

    op: str  # one of < > <= >= =
    value: float

    OPS = ("<=", ">=", "<", ">", "=")

    def __post_init__(self):
        if self.op not in self.OPS:
            raise ValueError(f"bad comparison operator {self.op!r}")
        if not _finite(self.value):
            raise ValueError("numeric constraint requires a finite number")


@dataclass(frozen=True)
class Interval:
    """A numeric range with per-bound inclusivity."""

    low: float
    high: float
    low_inclusive: bool = True
    high_inclusive: bool = True

    def __post_init__(self):
        if not (_finite(self.low) and _finite(self.high)):
            raise ValueError("interval bounds must be finite")
        if self.low > self.high or (
            self.low == self.high and not (self.low_inclusive and self.high_inclusive)
        ):
            raise ValueError(f"empty interval {self.low}..{self.high}")

    def contains(self, x: float) -> bool:
        lo_ok = x >= self.low if self.low_inclusive else x > self.low
        hi_ok = x <= self.high if self.high_inclusive else x < self.high
        return lo_ok and hi_ok


@dataclass(frozen=True)
class Presence:
    """Whether a parameter must be present or explicitly absent."""

    present: bool


ConstraintValue = Categorical | Numeric | Interval | Presence


@dataclass(frozen=True)
class ConstraintExpr:
    """One parsed constraint: a key plus its predicate."""

    key: str
    value: ConstraintValue

    def __post_init__(self):
        if not self.key:
            raise ValueError("constraint key must be non-empty")


# Query-side filter predicates, matched against stored constraint values.
@dataclass(frozen=True)
class Equals:
    text: str


@dataclass(frozen=True)
class NumericValue:
    number: float


@dataclass(frozen=True)
class HasKey:
    pass


@dataclass(frozen=True)
class RangeTest:
    """Test the stored value against a numeric predicate (Numeric or Interval)."""

    predicate: Numeric | Interval


FilterPredicate = Equals | NumericValue | HasKey | RangeTest

PatientParams = dict  # key -> number or text token


def _finite(x) -> bool:
    return isinstance(x, (int, float)) and x == x and x not in (float("inf"), float("-inf"))


def _num(text: str) -> float:
    v = float(text)
    return int(v) if v.is_integer() else v


def _fmt_num(x: float) -> str:
    if isinstance(x, float) and x.is_integer():
        return str(int(x))
    return str(x)


# Textual comparators replaced before any parsing.
_COMPARATOR_WORDS = [
    (re.compile(r"\bat least\b", re.I), ">="),
    (re.compile(r"\bat most\b", re.I), "<="),
    (re.compile(r"\bless than or equal to\b", re.I), "<="),
    (re.compile(r"\bgreater than or equal to\b", re.I), ">="),
    (re.compile(r"\bless than\b", re.I), "<"),
    (re.compile(r"\bgreater than\b", re.I), ">"),
    (re.compile(r"\bolder than\b", re.I), ">"),
    (re.compile(r"\byounger than\b", re.I), "<"),
]

_NUMBER_RE = r"-?\d+(?:\.\d+)?"

_PATTERNS = {
    "numeric": re.compile(
        rf"^(?P<key>[a-z][a-z0-9_+-]*)\s*(?P<op><=|>=|<|>|=)\s*(?P<num>{_NUMBER_RE})$"
    ),
    "interval": re.compile(
        rf"^(?P<key>[a-z][a-z0-9_+-]*)\s+in\s+(?P<lb>[\[\(])\s*(?P<lo>{_NUMBER_RE})\s*,"
        rf"\s*(?P<hi>{_NUMBER_RE})\s*(?P<rb>[\]\)])$"
    ),
    "assign": re.compile(r"^(?P<key>[a-z][a-z0-9_+-]*)\s*=\s*(?P<tok>[a-z0-9_+-]+)$"),
    "pair": re.compile(r"^(?P<key>[a-z][a-z0-9_+-]*)\s+(?P<tok>[a-z0-9_+-]+)$"),
    # negation scopes to the final token: "without substantial comorbidities"
    # reads as absence of comorbidities
    "negated": re.compile(
        r"^(?:no|without)\s+(?:[a-z0-9_+-]+\s+)*(?P<key>[a-z][a-z0-9_+-]*)$"
    ),
    "bare": re.compile(r"^(?P<key>[a-z][a-z0-9_+-]*)$"),
}


def replace_math_words(text: str) -> str:
    """Rewrite textual comparators ("less than", "at least", ...) as symbols."""
    for rx, sym in _COMPARATOR_WORDS:
        text = rx.sub(sym, text)
    return text


def parse_constraint(text: str) -> ConstraintExpr:
    """Parse one constraint fragment into a ConstraintExpr.

    Grammar (after textual comparators become symbols):
    ``key OP number`` | ``key in [lo, hi]`` (parens for exclusive bounds) |
    ``key = token`` (tokens ``present``/``absent`` map to Presence) |
    ``key token`` | ``no key`` / ``without key`` | ``key`` alone.

    Raises UnparsableConstraint when nothing applies.
    """
    raw = text
    text = replace_math_words(text).strip().lower()
    text = re.sub(r"\s+", " ", text)
    if not text:
        raise UnparsableConstraint(raw)

    m = _PATTERNS["negated"].match(text)
    if m:
        return ConstraintExpr(m["key"], Presence(False))
    m = _PATTERNS["numeric"].match(text)
    if m:
        return ConstraintExpr(m["key"], Numeric(m["op"], _num(m["num"])))
    m = _PATTERNS["interval"].match(text)
    if m:
        return ConstraintExpr(
            m["key"],
            Interval(_num(m["lo"]), _num(m["hi"]), m["lb"] == "[", m["rb"] == "]"),
        )
    m = _PATTERNS["assign"].match(text) or _PATTERNS["pair"].match(text)
    if m:
        tok = m["tok"]
        if tok == "absent":
            return ConstraintExpr(m["key"], Presence(False))
        if tok == "present":
            return ConstraintExpr(m["key"], Presence(True))
        orig = re.search(re.escape(tok), raw, re.I)
        return ConstraintExpr(m["key"], Categorical(tok, orig.group(0) if orig else tok))
    m = _PATTERNS["bare"].match(text)
    if m:
        return ConstraintExpr(m["key"], Presence(True))
    raise UnparsableConstraint(raw)


def render_constraint(expr: ConstraintExpr) -> str:
    """Canonical text form of a constraint; reparses to an equal expression."""
    return f"{expr.key}{render_value(expr.value)}"


def render_value(value: ConstraintValue) -> str:
    """Canonical rendering of the predicate part (key omitted)."""
    if isinstance(value, Categorical):
        return f"={value.value}"
    if isinstance(value, Numeric):
        return f"{value.op}{_fmt_num(value.value)}"
    if isinstance(value, Interval):
        lb = "[" if value.low_inclusive else "("
        rb = "]" if value.high_inclusive else ")"
        return f" in {lb}{_fmt_num(value.low)}, {_fmt_num(value.high)}{rb}"
    return "=present" if value.present else "=absent"


def render_constraint_map(constraints: dict[str, ConstraintValue]) -> str:
    """Render a whole constraint map, keys sorted, comma separated."""
    return ", ".join(
        render_constraint(ConstraintExpr(k, constraints[k])) for k in sorted(constraints)
    )


def satisfies(params: PatientParams, expr: ConstraintExpr) -> bool:
    """Decide whether concrete patient parameters satisfy one constraint.

    Missing keys fail Categorical/Numeric/Interval predicates and satisfy
    Presence(absent). Raises TypeMismatch when a numeric predicate meets a
    textual parameter.
    """
    value = expr.value
    present = expr.key in params
    if isinstance(value, Presence):
        if value.present:
            return present
        return not present or _as_token(params[expr.key]) == "absent"
    if not present:
        return False
    param = params[expr.key]
    if isinstance(value, Categorical):
        return _as_token(param) == value.value
    x = _as_number(param, expr.key)
    if isinstance(value, Numeric):
        return _compare(x, value.op, value.value)
    return value.contains(x)


def matches_filter(value: ConstraintValue, pred: FilterPredicate) -> bool:
    """Decide whether a stored constraint value passes a query filter."""
    if isinstance(pred, HasKey):
        return True
    if isinstance(pred, Equals):
        want = pred.text.lower()
        if isinstance(value, Categorical):
            return value.value == want
        if isinstance(value, Presence):
            return ("present" if value.present else "absent") == want
        if isinstance(value, Numeric) and value.op == "=":
            try:
                return float(want) == value.value
            except ValueError:
                return False
        return False
    if isinstance(pred, NumericValue):
        x = pred.number
        if isinstance(value, Numeric):
            return _compare(x, value.op, value.value)
        if isinstance(value, Interval):
            return value.contains(x)
        if isinstance(value, Categorical):
            try:
                return float(value.value) == x
            except ValueError:
                return False
        return False
    # RangeTest: the stored value, read as a point or a whole range, must
    # satisfy the numeric predicate.
    target = pred.predicate
    points: list[float]
    if isinstance(value, Numeric) and value.op == "=":
        points = [value.value]
    elif isinstance(value, Categorical):
        try:
            points = [float(value.value)]
        except ValueError:
            return False
    elif isinstance(value, Interval):
        points = [value.low, value.high]
    else:
        return False
    return all(_point_satisfies(p, target) for p in points)


def _point_satisfies(x: float, predicate: Numeric | Interval) -> bool:
    if isinstance(predicate, Numeric):
        return _compare(x, predicate.op, predicate.value)
    return predicate.contains(x)


def _compare(x: float, op: str, y: float) -> bool:
    if op == "<":
        return x < y
    if op == ">":
        return x > y
    if op == "<=":
        return x <= y
    if op == ">=":
        return x >= y
    return x == y


def _as_token(param) -> str:
    return str(param).strip().lower()


def _as_number(param, key: str) -> float:
    if isinstance(param, bool) or not isinstance(param, (int, float)):
        raise TypeMismatch(f"numeric constraint on {key!r} got textual value {param!r}")
    return float(param)


# ---------------------------------------------------------------------------
# Fragment normalization and keyword-driven extraction
# ---------------------------------------------------------------------------

# Value aliases canonicalized during extraction ("MRD negative" -> absent).
VALUE_ALIASES = {
    "negative": "absent",
    "neg": "absent",
    "undetectable": "absent",
    "positive": "rising",
    "persistent": "rising",
}

_WORD_RE = re.compile(r"<=|>=|[<>=]|,|[a-z0-9_.+-]+")


def _load_lines(name: str) -> list[str]:
    text = resources.files("dkg.data").joinpath(name).read_text(encoding="utf-8")
    out = []
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            out.append(line)
    return out


class KeywordTable:
    """Constraint keyword whitelist loaded from a line-oriented asset.

    Each line is ``token<TAB>key<TAB>kind`` where kind is one of ``numeric``,
    ``categorical``, ``presence``, ``literal:VALUE`` or ``interval:LOW:HIGH``.
    """

    def __init__(self, rows: list[tuple[str, str, str]]):
        self.rows = {token: (key, kind) for token, key, kind in rows}

    @classmethod
    def load(cls, name: str = "keywords.txt") -> "KeywordTable":
        rows = []
        for line in _load_lines(name):
            parts = [p.strip() for p in line.split("\t")]
            if len(parts) != 3:
                raise ValueError(f"bad keyword line: {line!r}")
            rows.append((parts[0].lower(), parts[1].lower(), parts[2].lower()))
        return cls(rows)

    def lookup(self, token: str) -> tuple[str, str] | None:
        return self.rows.get(token)


_default_keywords: KeywordTable | None = None
_default_stopwords: frozenset[str] | None = None


def default_keywords() -> KeywordTable:
    global _default_keywords
    if _default_keywords is None:
        _default_keywords = KeywordTable.load()
    return _default_keywords


def default_stopwords() -> frozenset[str]:
    global _default_stopwords
    if _default_stopwords is None:
        _default_stopwords = frozenset(_load_lines("stopwords.txt")) | frozenset(
            _load_lines("verbs.txt")
        )
    return _default_stopwords


def normalize_fragment(text: str, stopwords: frozenset[str] | None = None) -> str:
    """Lowercase, replace math words with symbols, drop stop words and verbs,
    collapse whitespace. Idempotent."""
    if stopwords is None:
        stopwords = default_stopwords()
    text = replace_math_words(text.lower())
    tokens = _WORD_RE.findall(text)
    kept = [t for t in tokens if t not in stopwords]
    return " ".join(kept)


def extract_constraints(
    sentence: str,
    keywords: KeywordTable | None = None,
    stopwords: frozenset[str] | None = None,
    diagnostics: list[str] | None = None,
) -> list[ConstraintExpr]:
    """Extract all recognizable constraints from a guideline sentence.

    The sentence is normalized, split on connectives ("and", ","), and each
    fragment is scanned against the keyword whitelist. Fragments with no
    keyword are dropped; an empty list is the "no constraints" result.
    Unparsable-but-keyword-bearing fragments are skipped and reported on the
    diagnostics list.
    """
    if keywords is None:
        keywords = default_keywords()
    normalized = normalize_fragment(sentence, stopwords)
    if not normalized:
        return []
    fragments = re.split(r"\s*,\s*|\s+and\s+", normalized)
    out: list[ConstraintExpr] = []
    seen: set[str] = set()
    for fragment in fragments:
        fragment = fragment.strip()
        if not fragment:
            continue
        for expr in _extract_from_fragment(fragment, keywords, diagnostics):
            if expr.key not in seen:
                seen.add(expr.key)
                out.append(expr)
    return out


def _extract_from_fragment(
    fragment: str, keywords: KeywordTable, diagnostics: list[str] | None
) -> list[ConstraintExpr]:
    tokens = fragment.split(" ")
    found: list[ConstraintExpr] = []
    for i, token in enumerate(tokens):
        hit = keywords.lookup(token)
        if hit is None:
            continue
        key, kind = hit
        try:
            expr = _build_constraint(key, kind, tokens, i, keywords)
        except UnparsableConstraint:
            expr = None
        if expr is not None:
            found.append(expr)
        elif diagnostics is not None:
            diagnostics.append(f"extract: skipped fragment {fragment!r} (keyword {token!r})")
    return found


def _build_constraint(
    key: str, kind: str, tokens: list[str], i: int, keywords: KeywordTable
) -> ConstraintExpr | None:
    negated = any(t in ("no", "without", "not") for t in tokens[max(0, i - 4) : i])
    if kind == "presence":
        return ConstraintExpr(key, Presence(not negated))
    if kind.startswith("literal:"):
        return parse_constraint(f"{key}={kind.split(':', 1)[1]}")
    if kind.startswith("interval:"):
        _, lo, hi = kind.split(":")
        return ConstraintExpr(key, Interval(_num(lo), _num(hi)))
    if kind == "numeric":
        # comparator + number anywhere in the fragment, else a bare number
        m = re.search(rf"(<=|>=|<|>|=)\s*({_NUMBER_RE})", " ".join(tokens))
        if m:
            return ConstraintExpr(key, Numeric(m.group(1), _num(m.group(2))))
        for t in tokens[i + 1 :] + tokens[:i]:
            if re.fullmatch(_NUMBER_RE, t):
                return ConstraintExpr(key, Numeric("=", _num(t)))
        return None
    if kind == "categorical":
        # the value token is the nearest plain token after the keyword,
        # falling back to the one just before it ("persistent rising MRD")
        candidates = tokens[i + 1 :] + list(reversed(tokens[:i]))
        for t in candidates:
            if re.fullmatch(r"[a-z][a-z0-9_+-]*", t) and keywords.lookup(t) is None:
                value = VALUE_ALIASES.get(t, t)
                if value in ("absent", "present"):
                    return ConstraintExpr(key, Presence(value == "present"))
                return ConstraintExpr(key, Categorical(value, t))
        return None
    raise ValueError(f"unknown keyword kind {kind!r}")
