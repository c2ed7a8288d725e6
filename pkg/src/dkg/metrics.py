"""Text-similarity metrics and dataset-level evaluation.

ROUGE-1, sentence BLEU and Jaccard all share one tokenizer (lowercase, split
on non-alphanumeric runs) so the scores stay comparable. The evaluation
report carries per-record detail plus the aggregate rows used in the results
table: mean ROUGE-1 precision/recall/f-measure, mean BLEU, mean Jaccard, and
exact-node-match accuracy.
"""

from __future__ import annotations

import csv
import json
import math
import re
from collections import Counter
from dataclasses import dataclass

from . import qa
from .graph import DecisionGraph

_TOKEN_RE = re.compile(r"[a-z0-9]+")

BLEU_EPSILON = 1e-9
DEFAULT_WEIGHTS = (0.25, 0.25, 0.25, 0.25)


class MetricsError(Exception):
    pass


class BadWeights(MetricsError):
    def __init__(self, weights):
        super().__init__(f"BLEU weights must be non-negative and sum to 1: {weights!r}")


class EmptyDataset(MetricsError):
    def __init__(self):
        super().__init__("dataset contains no records")


def tokenize(text: str) -> list[str]:
    """Shared tokenizer: lowercase, alphanumeric runs."""
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class BleuScore:
    score: float
    smoothed: bool  # True when any zero n-gram precision was epsilon-smoothed


def rouge1(candidate: str, reference: str) -> RougeScore:
    """Unigram ROUGE with clipped overlap counts."""
    cand = tokenize(candidate)
    ref = tokenize(reference)
    if not cand or not ref:
        return RougeScore(0.0, 0.0, 0.0)
    cand_counts = Counter(cand)
    ref_counts = Counter(ref)
    overlap = sum(min(cand_counts[t], ref_counts[t]) for t in cand_counts)
    precision = overlap / len(cand)
    recall = overlap / len(ref)
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return RougeScore(precision, recall, f1)


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu(
    candidate: str,
    reference: str,
    weights: tuple[float, float, float, float] = DEFAULT_WEIGHTS,
) -> BleuScore:
    """Sentence BLEU over 1..4-grams with a brevity penalty.

    Zero n-gram precisions are replaced by a tiny epsilon and flagged as
    smoothed instead of silently zeroing the geometric mean; a candidate with
    no unigram overlap at all scores exactly 0.
    """
    if len(weights) != 4 or any(w < 0 for w in weights) or abs(sum(weights) - 1) > 1e-9:
        raise BadWeights(weights)
    cand = tokenize(candidate)
    ref = tokenize(reference)
    if not cand or not ref:
        return BleuScore(0.0, False)
    precisions = []
    smoothed = False
    for n in range(1, 5):
        cand_ngrams = _ngrams(cand, n)
        total = sum(cand_ngrams.values())
        if total == 0:
            precisions.append(0.0)
            continue
        ref_ngrams = _ngrams(ref, n)
        overlap = sum(min(count, ref_ngrams[g]) for g, count in cand_ngrams.items())
        precisions.append(overlap / total)
    if precisions[0] == 0.0:
        return BleuScore(0.0, False)
    log_sum = 0.0
    for w, p in zip(weights, precisions):
        if w == 0.0:
            continue
        if p == 0.0:
            p = BLEU_EPSILON
            smoothed = True
        log_sum += w * math.log(p)
    brevity = 1.0 if len(cand) > len(ref) else math.exp(1 - len(ref) / len(cand))
    return BleuScore(brevity * math.exp(log_sum), smoothed)


def jaccard(a: str, b: str) -> float:
    """Token-set Jaccard index; two empty sets count as identical."""
    sa, sb = set(tokenize(a)), set(tokenize(b))
    if not sa and not sb:
        return 1.0
    union = sa | sb
    return len(sa & sb) / len(union)


# -- dataset evaluation ----------------------------------------------------------


@dataclass
class RecordEval:
    index: int
    question: str
    expected_node: int
    dkg_response: int | None
    matched: bool
    rouge: RougeScore
    bleu: BleuScore
    jaccard: float
    answer_text: str
    query: str
    error: str | None = None

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "QUESTION": self.question,
            "Expected_Node": self.expected_node,
            "DKG_response": self.dkg_response,
            "matched": self.matched,
            "rouge_precision": self.rouge.precision,
            "rouge_recall": self.rouge.recall,
            "rouge_f1": self.rouge.f1,
            "bleu": self.bleu.score,
            "bleu_smoothed": self.bleu.smoothed,
            "jaccard": self.jaccard,
            "answer": self.answer_text,
            "query": self.query,
            "error": self.error,
        }


@dataclass
class EvalReport:
    records: list[RecordEval]

    @property
    def accuracy(self) -> float:
        return sum(r.matched for r in self.records) / len(self.records)

    def _mean(self, getter) -> float:
        return sum(getter(r) for r in self.records) / len(self.records)

    def aggregates(self) -> dict[str, float]:
        """Aggregate rows keyed by the results-table labels."""
        return {
            "ROUGE precision": self._mean(lambda r: r.rouge.precision),
            "ROUGE recall": self._mean(lambda r: r.rouge.recall),
            "ROUGE f-measure": self._mean(lambda r: r.rouge.f1),
            "BLEU": self._mean(lambda r: r.bleu.score),
            "Jaccard": self._mean(lambda r: r.jaccard),
            "Accuracy": self.accuracy,
        }

    def summary_line(self) -> str:
        parts = [f"{name}={value:.3f}" for name, value in self.aggregates().items()]
        return f"records={len(self.records)} " + " ".join(parts)

    def to_json(self) -> dict:
        return {
            "aggregates": self.aggregates(),
            "records": [r.to_json() for r in self.records],
        }

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, indent=2, ensure_ascii=False)
            fh.write("\n")

    def save_csv(self, path) -> None:
        """Per-record rows as CSV."""
        fields = [
            "index", "Expected_Node", "DKG_response", "matched", "rouge_precision",
            "rouge_recall", "rouge_f1", "bleu", "bleu_smoothed", "jaccard", "error",
        ]
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(fields)
            for rec in self.records:
                row = rec.to_json()
                writer.writerow([row[f] for f in fields])


def evaluate(graph: DecisionGraph, dataset: list[qa.QaRecord]) -> EvalReport:
    """Answer every record, score the produced text against the reference
    answer, and flag exact node matches. Per-record failures are recorded as
    non-matches; they never abort the run."""
    if not dataset:
        raise EmptyDataset()
    results = []
    for i, record in enumerate(dataset):
        try:
            ans = qa.answer(graph, record.question)
        except qa.QaError as exc:
            results.append(
                RecordEval(
                    index=i,
                    question=record.question,
                    expected_node=record.expected_node,
                    dkg_response=None,
                    matched=False,
                    rouge=RougeScore(0.0, 0.0, 0.0),
                    bleu=BleuScore(0.0, False),
                    jaccard=0.0,
                    answer_text="",
                    query="",
                    error=f"{exc.code}: {exc}",
                )
            )
            continue
        results.append(
            RecordEval(
                index=i,
                question=record.question,
                expected_node=record.expected_node,
                dkg_response=ans.node_id,
                matched=ans.node_id == record.expected_node,
                rouge=rouge1(ans.text, record.answer),
                bleu=bleu(ans.text, record.answer),
                jaccard=jaccard(ans.text, record.answer),
                answer_text=ans.text,
                query=ans.query,
            )
        )
    return EvalReport(results)
