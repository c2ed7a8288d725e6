"""Scoring the engine against the bundled question dataset
=========================================================

Every record holds a question, the reference answer, the reference query, and
the expected node id. Evaluation answers each question, compares node ids for
accuracy, and scores the produced text with ROUGE-1, sentence BLEU, and
Jaccard (all sharing one tokenizer).
"""

from dkg import fixtures, metrics

graph = fixtures.load_guideline()
dataset = fixtures.load_bundled_dataset()
print(f"{len(dataset)} records")

report = metrics.evaluate(graph, dataset)
for name, value in report.aggregates().items():
    print(f"{name:>16}: {value:.3f}")

# Per-record rows carry everything needed for an error analysis.
worst = min(report.records, key=lambda r: r.jaccard)
print("\nlowest-jaccard record:")
print("  question:", worst.question[:70], "...")
print("  matched :", worst.matched)

# The individual metrics are plain functions, usable standalone.
print("\nrouge1('a b', 'a c') =", metrics.rouge1("a b", "a c"))
print("jaccard('a b c', 'b c d') =", metrics.jaccard("a b c", "b c d"))
print("bleu identity =", metrics.bleu("w x y z", "w x y z"))

# Short clinical answers often lack 4-gram overlap; those BLEU scores are
# epsilon-smoothed and flagged rather than silently zeroed.
smoothed = metrics.bleu("Allogenic HCT", "Allogenic HCT or Blinatumomab")
print("short-answer bleu:", round(smoothed.score, 6), "smoothed:", smoothed.smoothed)
