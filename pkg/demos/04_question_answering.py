"""Template question answering over the decision graph
=====================================================

Questions are classified into three types (next treatment, required
constraints, treatment advisability), slots are filled with deterministic
rules, and a canonical query is generated, verified against the question
text, and executed. The generated query always travels with the answer, and
an empty match is an explicit error, never an invented recommendation.
"""

from dkg import fixtures, qa

graph = fixtures.load_guideline()

questions = [
    # next treatment given stratification and age
    "Upon risk stratification, a patient is identified to have ph- ALL at the "
    "age of 37. What treatment measures are advised?",
    # same, with a response assessment and MRD status
    "A ph- ALL patient's response assessment is CR. His age is 37. He was "
    "monitored for MRD and found negative. What are the recommended procedures?",
    # the constraints gating a named treatment
    "What are the patient constraints for doing Maintenance chemotherapy?",
    # is a specific treatment advisable for this patient?
    "A patient is ALL positive. After his initial diagnosis he is classified as "
    "ph- patient. His age is 65. He is not diagnosed with any other cancer "
    "treatment. Can we perform TKI + Chemotherapy on him?",
]

for question in questions:
    answer = qa.answer(graph, question)
    print("Q:", question)
    print("  query :", answer.query)
    print("  answer:", answer.text)
    print("  node  :", answer.node_id)
    print()

# Updating the decision dimension re-routes answers without touching any
# static content: drop the MRD condition from the ph-/AYA follow-up box and
# the MRD question above stops matching.
question = questions[1]
graph.remove_constraint(16, "mrd")
try:
    qa.answer(graph, question)
except qa.NoMatchingGuideline as err:
    print("after removing the mrd constraint:", err.code)

# Restore it; the original answer comes back.
from dkg.constraints import Presence

graph.set_constraint(16, "mrd", Presence(False))
print("restored answer node:", qa.answer(graph, question).node_id)
