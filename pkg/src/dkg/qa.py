"""Deterministic translation of natural-language treatment questions to
canonical queries, plus the answer pipeline.

Three question types are supported: next-treatment advice given patient
constraints, the constraints required for a named treatment, and whether a
named treatment is advisable. Translation is template-driven: classify the
question, fill slots with regex rules (reusing the constraint extractor's
vocabulary), render a canonical query, verify every query literal against the
question text, then execute. The engine never fabricates an answer: an empty
result is an explicit no-matching-guideline error.
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass, field

from . import cql
from .graph import DecisionGraph


class QaError(Exception):
    code = "qa_error"


class UnclassifiableQuestion(QaError):
    code = "unclassifiable_question"

    def __init__(self, question: str):
        super().__init__(f"question matches no known pattern: {question!r}")


class MissingRequiredSlot(QaError):
    code = "missing_required_slot"

    def __init__(self, qtype: "QType", slot: str):
        self.qtype = qtype
        self.slot = slot
        super().__init__(f"{qtype.value} question lacks required slot {slot!r}")


class ParameterVerificationFailed(QaError):
    code = "parameter_verification_failed"

    def __init__(self, violations: list[str]):
        self.violations = violations
        super().__init__("; ".join(violations))


class NoMatchingGuideline(QaError):
    code = "no_matching_guideline"

    def __init__(self, query: str):
        self.query = query
        super().__init__(f"no guideline node matches: {query}")


class AmbiguousGuideline(QaError):
    code = "ambiguous_guideline"

    def __init__(self, query: str, node_ids: list[int]):
        self.query = query
        self.node_ids = node_ids
        super().__init__(f"query matches multiple distinct nodes {node_ids}: {query}")


class QType(enum.Enum):
    NEXT_TREATMENT = "next_treatment"
    REQUIRED_CONSTRAINTS = "required_constraints"
    TREATMENT_ADVISABILITY = "treatment_advisability"


@dataclass
class QuestionFrame:
    qtype: QType
    slots: dict = field(default_factory=dict)
    residual: str = ""


@dataclass(frozen=True)
class Answer:
    text: str
    node_id: int
    query: str


# Ordered first-match classification patterns.
_CLASSIFY = [
    (re.compile(r"\bcan (?:we|you|i) (?:perform|do|give|administer)\b|\bis it advisable\b", re.I), QType.TREATMENT_ADVISABILITY),
    (re.compile(r"\bpatient(?:'s)? (?:medical )?constraints\b|\bconstraints (?:for|of)\b", re.I), QType.REQUIRED_CONSTRAINTS),
    (re.compile(r"\brecommended\b|\badvised\b|\badvisable\b|\bnext treatment\b|\bwhat treatment\b", re.I), QType.NEXT_TREATMENT),
]

_AGE_PATTERNS = [
    re.compile(r"\bage of (\d+)", re.I),
    re.compile(r"\bage is (\d+)", re.I),
    re.compile(r"\b(\d+)[ -]years?[ -]old\b", re.I),
    re.compile(r"\baged (\d+)", re.I),
    re.compile(r"\bage[:, ]+(\d+)", re.I),
]

_MRD_NEGATIVE = re.compile(r"negative|absent|undetectable|mrd\s*-(?![a-z0-9])", re.I)
_MRD_RISING = re.compile(r"rising|persistent|positive|mrd\s*\+", re.I)

# Evidence patterns for canonical query literals during parameter verification.
_LITERAL_EVIDENCE = {
    "absent": re.compile(r"negative|absent|undetectable|mrd\s*-(?![a-z0-9])", re.I),
    "rising": re.compile(r"rising|persistent|positive|mrd\s*\+", re.I),
    "aya": re.compile(r"\baya\b|\badolescent", re.I),
    "ge65": re.compile(r"\belderly\b", re.I),
    "adult": re.compile(r"\badult\b", re.I),
    "cr": re.compile(r"\bcr\b|complete recovery", re.I),
}


def age_category(age: float) -> str:
    """Canonical age-category token: 15..39 -> AYA, 65 and over -> ge65,
    anything else -> adult."""
    if 15 <= age <= 39:
        return "AYA"
    if age >= 65:
        return "ge65"
    return "adult"


def classify(question: str) -> QType:
    """First matching pattern of the ordered table wins."""
    if not question.strip():
        raise UnclassifiableQuestion(question)
    for pattern, qtype in _CLASSIFY:
        if pattern.search(question):
            return qtype
    raise UnclassifiableQuestion(question)


def _extract_age(question: str):
    for pattern in _AGE_PATTERNS:
        m = pattern.search(question)
        if m:
            return int(m.group(1)), m.span()
    return None, None


def fill_slots(question: str, qtype: QType) -> QuestionFrame:
    """Extract canonical slot tokens from a classified question."""
    slots: dict = {}
    spans: list[tuple[int, int]] = []

    m = re.search(r"\bph\s*([+-])", question, re.I)
    if m:
        slots["stratified"] = "ph" + m.group(1)
        spans.append(m.span())

    age, span = _extract_age(question)
    if age is not None:
        slots["age"] = age
        slots["age_cat"] = age_category(age)
        spans.append(span)
    elif re.search(r"\baya\b", question, re.I):
        slots["age_cat"] = "AYA"
    elif re.search(r"\belderly\b", question, re.I):
        slots["age_cat"] = "ge65"

    for m in re.finditer(r"\bmrd\b", question, re.I):
        window = question[max(0, m.start() - 60) : m.end() + 60]
        if _MRD_NEGATIVE.search(window):
            slots["mrd"] = "absent"
        elif _MRD_RISING.search(window):
            slots["mrd"] = "rising"
        if "mrd" in slots:
            spans.append(m.span())
            break

    if re.search(r"\bcr\b", question, re.I) and re.search(
        r"response|assessment|achiev", question, re.I
    ):
        slots["response"] = "CR"

    if qtype is QType.REQUIRED_CONSTRAINTS:
        m = re.search(r"constraints (?:for|of) (?:doing |performing |giving )?([^?.]+)", question, re.I)
        if m:
            slots["treatment"] = m.group(1).strip()
            spans.append(m.span())
    elif qtype is QType.TREATMENT_ADVISABILITY:
        m = re.search(
            r"can (?:we|you|i) (?:perform|do|give|administer) (?!on\b)(.+?)"
            r"(?: on (?:him|her|them|the patient))?\s*[?.!]*$",
            question,
            re.I,
        )
        if m:
            slots["treatment"] = m.group(1).strip()
            spans.append(m.span())

    residual = question
    for start, end in sorted(spans, reverse=True):
        residual = residual[:start] + residual[end:]
    frame = QuestionFrame(qtype, slots, " ".join(residual.split()))

    if qtype in (QType.NEXT_TREATMENT,) and "stratified" not in slots:
        raise MissingRequiredSlot(qtype, "stratified")
    if qtype is QType.TREATMENT_ADVISABILITY and "treatment" not in slots:
        raise MissingRequiredSlot(qtype, "treatment")
    return frame


def build_query(frame: QuestionFrame) -> cql.QueryAst:
    """Render the canonical query for a filled frame.

    Next-treatment (and advisability) questions match decision filters and
    follow one next_step hop; required-constraints questions locate the node
    naming the treatment and project the constraint map of the node pointing
    at it.
    """
    slots = frame.slots
    if frame.qtype is QType.REQUIRED_CONSTRAINTS:
        if "treatment" not in slots:
            raise MissingRequiredSlot(frame.qtype, "treatment")
        where = [cql.Condition("m", "content", "contains", slots["treatment"])]
        for key in ("stratified", "age_cat"):
            if key in slots:
                where.append(cql.Condition("n", key, "=", slots[key]))
        match = cql.MatchPart(
            "m",
            "node",
            (),
            cql.Traversal("next_step", "incoming", "n"),
            tuple(where),
        )
        return cql.MatchReturn(match, (cql.Projection("n", "constraints"),))

    filters = []
    for key in ("stratified", "age_cat", "mrd"):
        if key in slots:
            filters.append((key, slots[key]))
    label = "decision_node" if "mrd" in slots else "risk_stratification"
    match = cql.MatchPart(
        "m", label, tuple(filters), cql.Traversal("next_step", "outgoing", "n"), ()
    )
    return cql.MatchReturn(match, (cql.Projection("n", "treatments"),))


def verify_params(ast: cql.QueryAst, question: str) -> list[str]:
    """Check that every literal in the query is supported by the question
    text (after canonical token mapping). Returns violation strings; empty
    means verified."""
    violations = []
    literals: list[tuple[str, object]] = []
    if isinstance(ast, (cql.MatchReturn, cql.MatchSet, cql.MatchRemove)):
        literals.extend(ast.match.filters)
        literals.extend((c.key, c.literal) for c in ast.match.where)
    if isinstance(ast, cql.MatchSet):
        literals.extend((key, lit) for _, key, lit in ast.assignments)
    age, _ = _extract_age(question)
    for key, literal in literals:
        text = str(literal)
        low = text.lower()
        if low in ("aya", "ge65", "adult") and age is not None and age_category(age).lower() == low:
            continue
        evidence = _LITERAL_EVIDENCE.get(low)
        if evidence is not None and evidence.search(question):
            continue
        if low and low in question.lower():
            continue
        violations.append(f"unsupported literal {key}={text!r}")
    return violations


def answer(graph: DecisionGraph, question: str) -> Answer:
    """Full pipeline: classify, fill slots, build and verify the query,
    execute, format. Raises a QaError subclass on every failure mode."""
    qtype = classify(question)
    frame = fill_slots(question, qtype)
    ast = build_query(frame)
    query_text = cql.pretty_print(ast)
    violations = verify_params(ast, question)
    if violations:
        raise ParameterVerificationFailed(violations)
    result = cql.execute(graph, ast)
    assert isinstance(result, cql.ResultSet)
    target_var = ast.projection[0].var
    column = ast.projection[0]
    name = f"{column.var}.{column.key}" if column.key else column.var
    distinct: dict[tuple[int, str], None] = {}
    for row in result.rows:
        cell = row.cells[name]
        distinct[(row.nodes[target_var], "" if cell is None else cell)] = None
    if not distinct:
        raise NoMatchingGuideline(query_text)
    if len(distinct) > 1:
        raise AmbiguousGuideline(query_text, sorted({nid for nid, _ in distinct}))
    (node_id, text), = distinct.keys()

    if qtype is QType.TREATMENT_ADVISABILITY:
        wanted = " ".join(frame.slots["treatment"].lower().split())
        verdict = "Yes" if wanted in " ".join(text.lower().split()) else "No"
        return Answer(f"{verdict}. Recommended: {text}", node_id, query_text)
    return Answer(text, node_id, query_text)


# -- dataset records ------------------------------------------------------------


@dataclass
class QaRecord:
    """One dataset record in the published schema."""

    question: str
    answer: str
    query: str
    expected_node: int
    dkg_response: int | None = None
    remark: str | None = None

    def to_json(self) -> dict:
        out = {
            "QUESTION": self.question,
            "ANSWER": self.answer,
            "QUERY": self.query,
            "Expected_Node": self.expected_node,
            "DKG_response": self.dkg_response,
        }
        if self.remark is not None:
            out["REMARK"] = self.remark
        return out

    @classmethod
    def from_json(cls, data: dict) -> "QaRecord":
        return cls(
            question=data["QUESTION"],
            answer=data["ANSWER"],
            query=data.get("QUERY", ""),
            expected_node=data["Expected_Node"],
            dkg_response=data.get("DKG_response"),
            remark=data.get("REMARK"),
        )


def load_dataset(path) -> list[QaRecord]:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return [QaRecord.from_json(rec) for rec in data]


def save_dataset(path, records: list[QaRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump([rec.to_json() for rec in records], fh, indent=2, ensure_ascii=False)
        fh.write("\n")
