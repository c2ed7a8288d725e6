"""Build a decision graph from a guideline CSV and look around
=============================================================

The bundled fixture transcribes the induction-phase fragment of the ALL
guideline flowchart into the 4-column builder format: one row per arrow,
entity texts plus their constraint cells. Loading it gives a property graph
whose nodes carry static box text and a dynamic constraint map.
"""

from dkg import fixtures
from dkg.constraints import Equals, NumericValue

graph = fixtures.load_guideline()

# Table-style counts: total nodes, decision nodes (non-empty constraint map),
# relationships.
stats = graph.stats()
print(f"total={stats.total_nodes} decision={stats.decision_nodes} relations={stats.relations}")

# The flowchart root is the node with no incoming arrows.
root = graph.root_ids()[0]
print("root:", graph.get_node(root).content)

# Walk one hop: stratification outcomes hang off the root.
for node_id in graph.neighbors(root, "next_step", "outgoing"):
    node = graph.get_node(node_id)
    print(f"  #{node.id} [{node.label}] {node.content}")

# Filtered search runs over the decision dimension, not the text: which
# decision boxes apply to a ph- patient whose MRD came back negative?
hits = graph.find_nodes([("stratified", Equals("ph-")), ("mrd", Equals("absent"))])
for node_id in hits:
    print("matches ph-/MRD-negative:", graph.get_node(node_id).content)

# Numeric filters understand intervals: age 37 falls inside the AYA box's
# 15..39 range.
print("age 37 matches:", graph.find_nodes([("age", NumericValue(37))]))

# Snapshots round-trip the whole graph through a line-oriented text format.
text = graph.to_snapshot()
print("snapshot lines:", len(text.splitlines()))
