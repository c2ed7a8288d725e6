"""Querying the graph with the Cypher-subset language
====================================================

MATCH patterns bind a node variable, filter on the constraint map, follow one
relationship hop, and project node fields. SET and REMOVE mutate the decision
dimension in place; LOAD CSV ingests a guideline file. The grammar ships in
docs/query_language.md.
"""

from dkg import cql, fixtures

graph = fixtures.load_guideline()

# The flavor printed in the source guideline documentation: spaced label,
# backtick quoting, '=' inside the property map, bare traversal target. The
# lexer accepts all of it.
result = cql.run(
    graph,
    "MATCH (m: node{stratified=`ph+', MRD:`rising'})-[:next_step]-> n RETURN n.treatments",
)
print("ph+ rising ->", result.rows[0].cells["n.treatments"])

# pretty_print gives the canonical rendering, which reparses to the same AST.
ast = cql.parse_query("MATCH (m:decision_node{mrd= 'absent', stratified: 'ph-'}) RETURN m")
canonical = cql.pretty_print(ast)
print("canonical:", canonical)
assert cql.parse_query(canonical) == ast

# WHERE supports conjunctions of comparisons plus CONTAINS over node text;
# traversals also run against the arrow direction, here finding the decision
# box that gates a treatment.
gating = cql.run(
    graph,
    "MATCH (m:node)<-[:next_step]-(n) WHERE m.content CONTAINS 'Pediatric-inspired' "
    "RETURN n.constraints",
)
print("gating constraints:", gating.rows[0].cells["n.constraints"])

# Mutations report how many nodes they touched.
summary = cql.run(graph, "MATCH (m:node{mrd: 'rising'}) SET m.reviewed = 'yes'")
print("flagged nodes:", summary.modified)
summary = cql.run(graph, "MATCH (m:node{reviewed: 'yes'}) REMOVE m.reviewed")
print("cleaned nodes:", summary.modified)

# Syntax errors carry line:column positions.
try:
    cql.parse_query("MATCH (m RETURN m")
except cql.CqlSyntaxError as err:
    print("parse error at", f"{err.line}:{err.col}", "-", err.expected)

# Historic dataset queries place the traversal after WHERE, which no Cypher
# dialect accepts; an explicit pre-canonicalization pass rewrites that one
# legacy shape.
legacy = (
    "MATCH (n: risk_stratification) WHERE n.stratified = 'ph-' and "
    "n.age_cat='AYA' -[:next_step]->k RETURN k.treatment"
)
fixed = cql.precanonicalize(legacy)
print("precanonicalized:", fixed)
print("answer:", cql.run(graph, fixed).rows[0].cells["k.treatment"])
