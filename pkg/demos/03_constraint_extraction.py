"""Rule-based constraint extraction from guideline text
======================================================

The extractor turns free box text into constraint expressions: normalize
(lowercase, drop stop words and verbs, rewrite "less than" to "<"), split on
connectives, then match against the keyword whitelist shipped as a data
asset. A 2-column parser-output CSV becomes the 4-column builder format this
way.
"""

from dkg import fixtures, ingest
from dkg.constraints import extract_constraints, normalize_fragment, parse_constraint, render_constraint

# Normalization keeps negations and comparison words, drops filler.
sentence = "adult patients should be less than 65 years of age and without substantial comorbidities"
print("normalized:", normalize_fragment(sentence))

# Extraction yields one expression per recognized constraint.
for expr in extract_constraints(sentence):
    print("extracted:", render_constraint(expr))

# The same machinery understands the acronym vocabulary: AYA expands to the
# 15..39 age range, MRD takes its nearby status token.
for text in ("AYA (without substantial comorbidities)", "Persistent rising MRD", "ph+ ALL, MRD rising"):
    rendered = [render_constraint(e) for e in extract_constraints(text)]
    print(f"{text!r} -> {rendered}")

# Sentences with no constraint keywords produce the empty list, which the CSV
# format writes as NULL.
print("no constraints:", extract_constraints("Clinical trial"))

# Canonical renderings reparse to equal expressions, so constraint cells in
# exported CSVs are stable.
expr = parse_constraint("age in [15, 39]")
assert parse_constraint(render_constraint(expr)) == expr

# Lift a 2-column parser-output file to the 4-column builder format.
rows = ingest.read_rows(fixtures.data_path("all_parser_output_sample.csv"))
for row in ingest.annotate(rows):
    print(f"{row.head!r} [{row.head_constraints}] -> {row.tail!r} [{row.tail_constraints}]")
