"""Bundled guideline fixtures and the mini question-answering dataset.

The canonical fixture transcribes the induction-phase fragment of the ALL
guideline flowchart (both stratification branches) into the 4-column builder
CSV. Node ids are reproducible from row order, which the dataset records rely
on. Small bone and kidney excerpts ship alongside for multi-guideline tests.

Run ``python -m dkg.fixtures`` to regenerate data/qa_dataset.json from the
templates module.
"""

from __future__ import annotations

from importlib import resources

from . import ingest, templates
from .graph import DecisionGraph
from .qa import QaRecord, load_dataset

GUIDELINE_CSV = "all_guideline.csv"
DATASET_JSON = "qa_dataset.json"


def data_path(name: str):
    return resources.files("dkg.data").joinpath(name)


def load_guideline(name: str = GUIDELINE_CSV) -> DecisionGraph:
    """Load a bundled guideline CSV into a fresh graph."""
    with resources.as_file(data_path(name)) as path:
        graph, _ = ingest.load_csv_file(path)
    return graph


def load_bundled_dataset() -> list[QaRecord]:
    with resources.as_file(data_path(DATASET_JSON)) as path:
        return load_dataset(path)


def core_records(graph: DecisionGraph) -> list[QaRecord]:
    """The published example records, question and answer strings verbatim."""

    def content(node_id: int) -> str:
        return graph.get_node(node_id).content

    return [
        QaRecord(
            question=(
                "Upon risk stratification, a patient is identified to have ph- ALL "
                "at the age of 37. What treatment measures are advised?"
            ),
            answer=(
                "clinical trial or Pediatric-inspired regimes or "
                "Multiagent chemotherapy(systematic therapy)"
            ),
            query=(
                "MATCH (n: risk_stratification) WHERE n.stratified = 'ph-' "
                "and n.age_cat='AYA' -[:next_step]->k RETURN k.treatment"
            ),
            expected_node=14,
            dkg_response=14,
            remark="pediatric-inspired regimes is preferred more",
        ),
        QaRecord(
            question=(
                "A ph- ALL patient's response assessment is CR. His age is 37. "
                "He was monitored for MRD and found negative. "
                "What are the recommended procedures?"
            ),
            answer=(
                "Allogenic HCT (especially if high-risk features or consider "
                "continuing multiagent chemotherapy or Blinatumomab"
            ),
            query=(
                "MATCH (m: decision_node{ stratified='ph-', age_cat='AYA', "
                "MRD:'absent'})-[:next_step]-> n RETURN n.treatments"
            ),
            expected_node=17,
            dkg_response=17,
        ),
        QaRecord(
            question=(
                "A 68-year-old ph-ALL patient without any significant comorbidities "
                "underwent a clinical trial during the treatment induction phase, "
                "achieving a CR response assessment. He was monitered with "
                "persistent rising MRD. What procedures are recommended?"
            ),
            answer="Blinatumomab follwed by Allogenic HCT",
            query=(
                "MATCH (m: decision_node{ stratified='ph-', MRD:'rising'})"
                "-[:next_step]-> n RETURN n.treatments"
            ),
            expected_node=19,
        ),
        QaRecord(
            question=(
                "A patient is ALL positive. After his initial diagnosis he is "
                "classified as ph- patient. His age is 65. He is not treated with "
                "other cancer treatments. What treatment is recommended in this condition?"
            ),
            answer=content(15),
            query=(
                "MATCH (m:risk_stratification{stratified: 'ph-', age_cat: 'ge65'})"
                "-[:next_step]->(n) RETURN n.treatments"
            ),
            expected_node=15,
            remark="answer transcribed from the fixture's ph- elderly branch",
        ),
        QaRecord(
            question=(
                "A patient is ALL positive. After his initial diagnosis he is "
                "classified as ph- patient. His age is 65. He is not diagnosed with "
                "any other cancer treatment. Can we perform TKI + Chemotherapy on him?"
            ),
            answer=f"No. Recommended: {content(15)}",
            query=(
                "MATCH (m:risk_stratification{stratified: 'ph-', age_cat: 'ge65'})"
                "-[:next_step]->(n) RETURN n.treatments"
            ),
            expected_node=15,
        ),
    ]


def build_dataset(graph: DecisionGraph | None = None) -> list[QaRecord]:
    """Core records plus all template-generated variants."""
    if graph is None:
        graph = load_guideline()
    return core_records(graph) + templates.generate_variants(graph)


def main() -> None:
    from .qa import save_dataset

    graph = load_guideline()
    records = build_dataset(graph)
    out = "src/dkg/data/qa_dataset.json"
    save_dataset(out, records)
    print(f"wrote {len(records)} records to {out}")


if __name__ == "__main__":
    main()
