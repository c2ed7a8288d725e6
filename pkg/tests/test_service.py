import threading

import pytest
from fastapi.testclient import TestClient

from dkg import fixtures
from dkg.service import create_app, derive_params

Q2 = (
    "A ph- ALL patient's response assessment is CR. His age is 37. He was "
    "monitored for MRD and found negative. What are the recommended procedures?"
)


@pytest.fixture()
def client(tmp_path):
    graph = fixtures.load_guideline()
    snap = tmp_path / "graph.snap"
    graph.save(snap)
    app = create_app(graph, snapshot_path=str(snap))
    with TestClient(app) as c:
        yield c


class TestStatsAndNodes:
    def test_stats(self, client):
        body = client.get("/api/stats").json()
        assert body == {
            "operation": "stats",
            "total_nodes": 25,
            "decision_nodes": 13,
            "relations": 28,
        }

    def test_root(self, client):
        assert client.get("/api/root").json()["node_id"] == 1

    def test_node_detail(self, client):
        body = client.get("/api/nodes/14").json()
        assert body["node"]["content"].startswith("clinical trial or Pediatric-inspired")
        assert body["node"]["is_decision_node"] is False

    def test_unknown_node_error_code(self, client):
        resp = client.get("/api/nodes/999")
        assert resp.status_code == 404
        assert resp.json()["error"]["code"] == "unknown_node"


class TestAsk:
    def test_appendix_question_includes_query(self, client):
        body = client.post("/api/ask", json={"question": Q2}).json()
        assert body["node_id"] == 17
        assert body["answer"].startswith("Allogenic HCT")
        assert body["query"].startswith("MATCH (m:decision_node{stratified: 'ph-'")

    def test_no_match_is_error_not_fabrication(self, client):
        resp = client.post(
            "/api/ask",
            json={"question": "A ph+ ALL patient is 30 years old. What treatment is recommended?"},
        )
        assert resp.status_code == 404
        assert resp.json()["error"]["code"] == "no_matching_guideline"

    def test_unclassifiable(self, client):
        resp = client.post("/api/ask", json={"question": "hello there"})
        assert resp.status_code == 422
        assert resp.json()["error"]["code"] == "unclassifiable_question"


class TestQueryEndpoint:
    def test_rows_and_rendered(self, client):
        body = client.post(
            "/api/query",
            json={"query": "MATCH (m:node{stratified: 'ph+', mrd: 'rising'})-[:next_step]->(n) RETURN n.treatments"},
        ).json()
        assert body["rows"][0]["nodes"] == {"m": 12, "n": 23}
        assert body["rendered"] == "Blinatumomab + TKI or Allogenic HCT (if donor available)"

    def test_syntax_error_position(self, client):
        resp = client.post("/api/query", json={"query": "MATCH (m RETURN m"})
        assert resp.status_code == 400
        body = resp.json()
        assert body["error"]["code"] == "syntax_error"
        assert ":" in body["error"]["position"]

    def test_mutation_via_query(self, client):
        body = client.post(
            "/api/query",
            json={"query": "MATCH (m:node{mrd: 'rising'}) SET m.reviewed = 'yes'"},
        ).json()
        assert body["kind"] == "set" and body["modified"] == 3

    def test_precanonicalize_flag(self, client):
        legacy = (
            "MATCH (n: risk_stratification) WHERE n.stratified = 'ph-' and "
            "n.age_cat='AYA' -[:next_step]->k RETURN k.treatment"
        )
        assert client.post("/api/query", json={"query": legacy}).status_code == 400
        body = client.post(
            "/api/query", json={"query": legacy, "precanonicalize": True}
        ).json()
        assert body["rows"][0]["nodes"]["k"] == 14


class TestMutationEndpoints:
    def test_remove_constraint_changes_routing(self, client):
        first = client.post("/api/ask", json={"question": Q2}).json()
        assert first["node_id"] == 17
        resp = client.post("/api/constraints/remove", json={"node_id": 16, "key": "mrd"})
        assert resp.json()["removed"] is True
        second = client.post("/api/ask", json={"question": Q2})
        assert second.status_code == 404
        assert second.json()["error"]["code"] == "no_matching_guideline"

    def test_set_constraint_value_json(self, client):
        resp = client.post(
            "/api/constraints/set",
            json={
                "node_id": 5,
                "key": "age",
                "value": {"type": "interval", "low": 15, "high": 40},
            },
        )
        node = resp.json()["node"]
        assert node["constraints"]["age"]["high"] == 40

    def test_set_then_remove_restores(self, client):
        before = client.get("/api/nodes/7").json()
        client.post(
            "/api/constraints/set",
            json={"node_id": 7, "key": "note", "value": {"type": "categorical", "value": "x"}},
        )
        client.post("/api/constraints/remove", json={"node_id": 7, "key": "note"})
        assert client.get("/api/nodes/7").json() == before

    def test_snapshot_rewritten_on_mutation(self, tmp_path):
        graph = fixtures.load_guideline()
        snap = tmp_path / "g.snap"
        graph.save(snap)
        app = create_app(graph, snapshot_path=str(snap))
        with TestClient(app) as c:
            c.post(
                "/api/constraints/set",
                json={"node_id": 1, "key": "flag", "value": {"type": "presence", "present": True}},
            )
        from dkg.graph import DecisionGraph

        assert "flag" in DecisionGraph.load(snap).get_node(1).constraints


class TestStep:
    def test_branch_highlighting(self, client):
        body = client.post(
            "/api/step",
            json={"node_id": 2, "params": {"stratified": "ph+", "age": 30, "comorbidities": "absent"}},
        ).json()
        options = {o["id"]: o["satisfied"] for o in body["options"]}
        assert options == {5: True, 6: False}

    def test_age_cat_derived_for_category_branches(self, client):
        body = client.post(
            "/api/step", json={"node_id": 1, "params": {"stratified": "ph-", "age": 37}}
        ).json()
        options = {o["id"]: o["satisfied"] for o in body["options"]}
        assert options == {2: False, 3: True, 4: False}

    def test_default_root(self, client):
        body = client.post("/api/step", json={"params": {}}).json()
        assert body["node"]["id"] == 1

    def test_derive_params_helper(self):
        assert derive_params({"age": 37})["age_cat"] == "AYA"
        assert derive_params({"age": 70})["age_cat"] == "ge65"
        assert derive_params({"age_cat": "AYA", "age": 70})["age_cat"] == "AYA"


class TestEvaluateEndpoint:
    def test_bundled_dataset_default(self, client):
        body = client.post("/api/evaluate", json={}).json()
        assert body["report"]["aggregates"]["Accuracy"] == 1.0

    def test_inline_records(self, client, dataset):
        body = client.post(
            "/api/evaluate", json={"records": [dataset[0].to_json()]}
        ).json()
        assert body["report"]["aggregates"]["Accuracy"] == 1.0


class TestSnapshotRoundTrip:
    def test_served_snapshot_answers_like_the_source_graph(self, tmp_path):
        from dkg import qa
        from dkg.graph import DecisionGraph

        graph = fixtures.load_guideline()
        direct = qa.answer(graph, Q2)
        snap = tmp_path / "s.snap"
        graph.save(snap)
        app = create_app(DecisionGraph.load(snap))
        with TestClient(app) as client:
            via = client.post("/api/ask", json={"question": Q2}).json()
        assert (via["answer"], via["node_id"], via["query"]) == (
            direct.text,
            direct.node_id,
            direct.query,
        )


class TestConcurrency:
    def test_no_torn_reads_under_mutation(self, tmp_path):
        graph = fixtures.load_guideline()
        app = create_app(graph)
        client = TestClient(app)
        flagged_query = "MATCH (m:node{phase: 'two'}) RETURN m"
        total = graph.stats().total_nodes
        stop = threading.Event()
        torn = []

        def reader():
            while not stop.is_set():
                body = client.post("/api/query", json={"query": flagged_query}).json()
                count = len(body["rows"])
                if count not in (0, total):
                    torn.append(count)

        threads = [threading.Thread(target=reader) for _ in range(4)]
        for t in threads:
            t.start()
        for _ in range(15):
            client.post("/api/query", json={"query": "MATCH (m) SET m.phase = 'two'"})
            client.post("/api/query", json={"query": "MATCH (m) REMOVE m.phase"})
        stop.set()
        for t in threads:
            t.join()
        assert torn == []
