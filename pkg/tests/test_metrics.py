import math
import random

import pytest

from dkg import metrics
from dkg.metrics import (
    BadWeights,
    BleuScore,
    EmptyDataset,
    RougeScore,
    bleu,
    evaluate,
    jaccard,
    rouge1,
    tokenize,
)
from dkg.qa import QaRecord

from .oracles import naive_bleu, naive_jaccard, naive_rouge1

WORDS = ["alpha", "beta", "gamma", "delta", "eps", "zeta", "eta", "theta", "42", "x1"]


def random_text(rng, max_len=12):
    return " ".join(rng.choices(WORDS, k=rng.randrange(0, max_len + 1)))


class TestRouge:
    def test_identity(self):
        assert rouge1("Allogenic HCT", "Allogenic HCT") == RougeScore(1.0, 1.0, 1.0)

    def test_hand_counted_half_overlap(self):
        assert rouge1("a b", "a c") == RougeScore(0.5, 0.5, 0.5)

    def test_empty_candidate(self):
        assert rouge1("", "something") == RougeScore(0.0, 0.0, 0.0)
        assert rouge1("something", "") == RougeScore(0.0, 0.0, 0.0)

    def test_precision_recall_swap_symmetry(self):
        a, b = "a b c d", "a b x"
        ab, ba = rouge1(a, b), rouge1(b, a)
        assert ab.precision == ba.recall
        assert ab.recall == ba.precision

    def test_clipped_counts(self):
        # candidate repeats a token more often than the reference holds it
        score = rouge1("a a a", "a b")
        assert score.precision == pytest.approx(1 / 3)
        assert score.recall == pytest.approx(1 / 2)

    def test_appending_matching_reference_token_keeps_recall_numerator(self):
        base = rouge1("a b c", "a b")
        grown = rouge1("a b c", "a b c")
        assert grown.recall * 3 >= base.recall * 2  # overlap numerator never drops


class TestBleu:
    def test_identity_four_tokens(self):
        assert bleu("w x y z", "w x y z") == BleuScore(1.0, False)

    def test_brevity_penalty_hand_computed(self):
        # candidate = first 3 tokens of a 5-token reference: all precisions 1,
        # penalty e^(1 - 5/3)
        got = bleu("a b c", "a b c d e")
        assert not math.isclose(got.score, 1.0)
        assert got.smoothed  # no 4-grams in a 3-token candidate
        assert got.score == pytest.approx(naive_bleu("a b c", "a b c d e"), abs=1e-9)

    def test_zero_unigram_overlap_is_exactly_zero(self):
        assert bleu("a b", "c d") == BleuScore(0.0, False)

    def test_no_fourgram_overlap_smoothed_not_zero(self):
        got = bleu("a b x c d", "a b q c d")
        assert 0.0 < got.score < 1.0
        assert got.smoothed

    def test_bad_weights(self):
        with pytest.raises(BadWeights):
            bleu("a", "a", weights=(0.5, 0.5, 0.5, 0.5))
        with pytest.raises(BadWeights):
            bleu("a", "a", weights=(1.0, 0.0, -0.5, 0.5))

    def test_custom_weights(self):
        got = bleu("a b c", "a b c", weights=(1.0, 0.0, 0.0, 0.0))
        assert got == BleuScore(1.0, False)


class TestJaccard:
    def test_identity(self):
        assert jaccard("a b c", "c b a") == 1.0

    def test_disjoint(self):
        assert jaccard("a b", "c d") == 0.0

    def test_hand_counted(self):
        assert jaccard("a b c", "b c d") == 0.5  # |{b,c}| / |{a,b,c,d}|

    def test_both_empty(self):
        assert jaccard("", "") == 1.0

    def test_one_empty(self):
        assert jaccard("", "a") == 0.0

    def test_symmetric(self):
        rng = random.Random(1)
        for _ in range(50):
            a, b = random_text(rng), random_text(rng)
            assert jaccard(a, b) == jaccard(b, a)


class TestTokenizer:
    def test_shared_tokenizer_rules(self):
        assert tokenize("Allogenic-HCT, (especially)") == ["allogenic", "hct", "especially"]
        assert tokenize("") == []


class TestOracleAgreement:
    def test_thousand_random_pairs(self):
        rng = random.Random(99)
        for _ in range(1000):
            a, b = random_text(rng), random_text(rng)
            r = rouge1(a, b)
            p, rec, f1 = naive_rouge1(a, b)
            assert abs(r.precision - p) < 1e-9
            assert abs(r.recall - rec) < 1e-9
            assert abs(r.f1 - f1) < 1e-9
            assert abs(bleu(a, b).score - naive_bleu(a, b)) < 1e-9
            assert abs(jaccard(a, b) - naive_jaccard(a, b)) < 1e-9


class TestEvaluate:
    def test_appendix_records_all_perfect(self, guideline, dataset):
        report = metrics.evaluate(guideline, dataset[:2])
        assert report.accuracy == 1.0
        agg = report.aggregates()
        assert agg["ROUGE f-measure"] == 1.0
        assert agg["BLEU"] == 1.0
        assert agg["Jaccard"] == 1.0

    def test_unanswerable_record_halves_accuracy(self, guideline, dataset):
        bad = QaRecord(question="please do something", answer="x", query="", expected_node=1)
        report = metrics.evaluate(guideline, [dataset[0], bad])
        assert report.accuracy == 0.5
        assert report.records[1].error is not None
        assert report.records[1].dkg_response is None

    def test_unknown_expected_node_counts_as_mismatch(self, guideline, dataset):
        rec = QaRecord(
            question=dataset[0].question, answer=dataset[0].answer, query="", expected_node=9999
        )
        report = metrics.evaluate(guideline, [rec])
        assert report.accuracy == 0.0
        assert report.records[0].dkg_response == 14

    def test_empty_dataset(self, guideline):
        with pytest.raises(EmptyDataset):
            evaluate(guideline, [])

    def test_deterministic(self, guideline, dataset):
        a = metrics.evaluate(guideline, dataset[:10]).to_json()
        b = metrics.evaluate(guideline, dataset[:10]).to_json()
        assert a == b

    def test_report_serialization(self, tmp_path, guideline, dataset):
        report = metrics.evaluate(guideline, dataset[:4])
        json_path = tmp_path / "report.json"
        csv_path = tmp_path / "report.csv"
        report.save(json_path)
        report.save_csv(csv_path)
        import json

        data = json.loads(json_path.read_text())
        assert set(data["aggregates"]) == {
            "ROUGE precision",
            "ROUGE recall",
            "ROUGE f-measure",
            "BLEU",
            "Jaccard",
            "Accuracy",
        }
        header = csv_path.read_text().splitlines()[0]
        assert header.startswith("index,Expected_Node,DKG_response,matched")
