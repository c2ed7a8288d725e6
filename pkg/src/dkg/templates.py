"""Template-generated questions over the bundled guideline fixture.

Each variant is produced from a surface template plus a slot combination whose
expected node id is hand-derived from the fixture topology (see
data/all_guideline.csv). Answer strings are the expected node's content (or,
for advisability questions, a verdict prefix plus that content), so the
records stay independent of the answer pipeline they are used to test.
"""

from __future__ import annotations

from .constraints import render_constraint_map
from .graph import DecisionGraph
from .qa import QaRecord

# Surface templates for next-treatment questions without an MRD status.
PLAIN_TEMPLATES = [
    "Upon risk stratification, a patient is identified to have {strat} ALL at the age of {age}. What treatment measures are advised?",
    "A patient is ALL positive. After his initial diagnosis he is classified as {strat} patient. His age is {age}. What treatment is recommended in this condition?",
    "A {strat} ALL patient is {age} years old. What is the next treatment advice?",
    "What procedures are recommended for a {age}-year-old {strat} ALL patient?",
    "A {strat} ALL patient, aged {age}, has completed initial diagnosis. Which procedures are advised?",
]

# Surface templates for questions carrying an MRD status.
MRD_TEMPLATES = [
    "A {strat} ALL patient's response assessment is CR. His age is {age}. He was monitored for MRD and found {mrd}. What are the recommended procedures?",
    "A {age}-year-old {strat} ALL patient achieved a CR response assessment. He was monitered with {mrd} MRD. What procedures are recommended?",
    "After induction, a {strat} ALL patient aged {age} is monitored for MRD which is found {mrd}. What treatment is advised next?",
    "A {strat} ALL patient ({age} years old) has MRD {mrd} after achieving CR. What treatment is recommended?",
    "His MRD was found {mrd} after a CR response. The patient is a {age}-year-old {strat} ALL case. What is the next treatment advice?",
]

MRD_AGELESS_TEMPLATE = (
    "A {strat} ALL patient is monitored for MRD and found {mrd}. What treatment is recommended?"
)

ADVISABILITY_TEMPLATES = [
    "A patient is ALL positive. After his initial diagnosis he is classified as {strat} patient. His age is {age}. He is not diagnosed with any other cancer treatment. Can we perform {tx} on him?",
    "A {strat} ALL patient is {age} years old. Can we perform {tx} on him?",
]

CONSTRAINT_TEMPLATES = [
    "A patient is ALL positive. After his initial diagnosis he is classified as {strat} patient. What are patient constraints for doing {tx}?",
    "What are the patient constraints for doing {tx}?",
    "What are patient's medical constraints for performing {tx}?",
]

MRD_SURFACE = {"absent": ["negative", "absent"], "rising": ["rising", "persistent rising"]}


def _plain_query(strat: str, age_cat: str) -> str:
    return (
        f"MATCH (m:risk_stratification{{stratified: '{strat}', age_cat: '{age_cat}'}})"
        "-[:next_step]->(n) RETURN n.treatments"
    )


def _mrd_query(strat: str, age_cat: str | None, mrd: str) -> str:
    pairs = [f"stratified: '{strat}'"]
    if age_cat is not None:
        pairs.append(f"age_cat: '{age_cat}'")
    pairs.append(f"mrd: '{mrd}'")
    return (
        f"MATCH (m:decision_node{{{', '.join(pairs)}}})-[:next_step]->(n) RETURN n.treatments"
    )


def _constraint_query(tx: str, strat: str | None) -> str:
    conds = [f"m.content CONTAINS '{tx}'"]
    if strat is not None:
        conds.append(f"n.stratified = '{strat}'")
    return (
        "MATCH (m:node)<-[:next_step]-(n) WHERE "
        + " AND ".join(conds)
        + " RETURN n.constraints"
    )


# Hand-derived routing over the bundled fixture: slot combination -> node id
# holding the answer. Ids follow first-appearance order in the fixture CSV.
PLAIN_TARGETS = {("ph-", "AYA"): 14, ("ph-", "ge65"): 15}
MRD_TARGETS = {
    ("ph-", "AYA", "absent"): 17,
    ("ph-", "AYA", "rising"): 19,
    ("ph-", "ge65", "rising"): 19,
    ("ph-", "ge65", "absent"): 22,
    # ageless forms: for ph- rising both branches converge on the same node
    ("ph-", None, "rising"): 19,
    ("ph+", None, "rising"): 23,
    ("ph+", None, "absent"): 24,
}

AYA_AGES = [15, 16, 19, 22, 25, 28, 30, 33, 36, 39]
ELDERLY_AGES = [65, 66, 68, 70, 74, 80, 85]


def generate_variants(graph: DecisionGraph) -> list[QaRecord]:
    """Deterministic template-generated records over the fixture graph."""
    records: list[QaRecord] = []

    def content(node_id: int) -> str:
        return graph.get_node(node_id).content

    def plain(template: str, strat: str, age: int) -> None:
        age_cat = "AYA" if 15 <= age <= 39 else "ge65"
        node = PLAIN_TARGETS[(strat, age_cat)]
        records.append(
            QaRecord(
                question=template.format(strat=strat, age=age),
                answer=content(node),
                query=_plain_query(strat, age_cat),
                expected_node=node,
            )
        )

    def mrd(template: str, strat: str, age: int | None, status: str, surface: str) -> None:
        age_cat = None if age is None else ("AYA" if 15 <= age <= 39 else "ge65")
        node = MRD_TARGETS[(strat, age_cat, status)]
        question = (
            template.format(strat=strat, mrd=surface)
            if age is None
            else template.format(strat=strat, age=age, mrd=surface)
        )
        records.append(
            QaRecord(
                question=question,
                answer=content(node),
                query=_mrd_query(strat, age_cat, status),
                expected_node=node,
            )
        )

    # paraphrase sets: every template, fixed slots, mirroring the core records
    for template in PLAIN_TEMPLATES:
        plain(template, "ph-", 37)
    for template in MRD_TEMPLATES:
        mrd(template, "ph-", 37, "absent", "negative")
    for template in MRD_TEMPLATES:
        mrd(template, "ph-", 68, "rising", "persistent rising")

    # age sweep across both branches
    for i, age in enumerate(AYA_AGES):
        plain(PLAIN_TEMPLATES[i % len(PLAIN_TEMPLATES)], "ph-", age)
    for i, age in enumerate(ELDERLY_AGES):
        plain(PLAIN_TEMPLATES[i % len(PLAIN_TEMPLATES)], "ph-", age)

    # MRD pathways, aged and ageless
    for i, (age, status) in enumerate(
        [(18, "absent"), (25, "absent"), (20, "rising"), (33, "rising"),
         (67, "rising"), (75, "rising"), (66, "absent"), (71, "absent")]
    ):
        mrd(MRD_TEMPLATES[i % len(MRD_TEMPLATES)], "ph-", age, status, MRD_SURFACE[status][i % 2])
    mrd(MRD_AGELESS_TEMPLATE, "ph+", None, "rising", "rising")
    mrd(MRD_AGELESS_TEMPLATE, "ph+", None, "absent", "negative")
    # ph- rising without an age is still unambiguous: both branches lead to
    # the same follow-up node
    mrd(MRD_AGELESS_TEMPLATE, "ph-", None, "rising", "persistent rising")

    # advisability: verdicts are hand-checked against the target content
    advisability = [
        ("ph-", 65, "TKI + Chemotherapy", "No", 15),
        ("ph-", 37, "Multiagent chemotherapy", "Yes", 14),
        ("ph-", 30, "Pediatric-inspired regimes", "Yes", 14),
        ("ph-", 70, "Corticosteroids", "Yes", 15),
    ]
    for i, (strat, age, tx, verdict, node) in enumerate(advisability):
        template = ADVISABILITY_TEMPLATES[i % len(ADVISABILITY_TEMPLATES)]
        age_cat = "AYA" if 15 <= age <= 39 else "ge65"
        records.append(
            QaRecord(
                question=template.format(strat=strat, age=age, tx=tx),
                answer=f"{verdict}. Recommended: {content(node)}",
                query=_plain_query(strat, age_cat),
                expected_node=node,
            )
        )

    # required-constraints: answers are the gating node's rendered map
    constraint_questions = [
        ("ph+", "TKI + corticosteroid (systematic corticosteroid)", 5),
        (None, "Pediatric-inspired regimes", 3),
        (None, "Maintenance chemotherapy", 21),
    ]
    for i, (strat, tx, node) in enumerate(constraint_questions):
        template = CONSTRAINT_TEMPLATES[i % len(CONSTRAINT_TEMPLATES)]
        question = (
            template.format(strat=strat, tx=tx) if "{strat}" in template else template.format(tx=tx)
        )
        records.append(
            QaRecord(
                question=question,
                answer=render_constraint_map(graph.get_node(node).constraints),
                query=_constraint_query(tx, strat),
                expected_node=node,
            )
        )
    return records
