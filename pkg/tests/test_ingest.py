import pytest

from dkg import ingest
from dkg.constraints import Categorical, Interval, Numeric, Presence, parse_constraint
from dkg.fixtures import data_path
from dkg.graph import DecisionGraph
from dkg.ingest import (
    ConstraintConflict,
    CsvRow2,
    CsvRow4,
    MalformedRow,
    annotate,
    export_csv,
    load_csv,
    read_rows,
    split_fragments,
    write_rows,
)


class TestAnnotate:
    def test_figure_boxes(self):
        rows = annotate([CsvRow2("Ph+ ALL", "AYA (without substantial comorbidities)")])
        assert rows == [
            CsvRow4(
                "Ph+ ALL",
                "stratified=ph+",
                "AYA (without substantial comorbidities)",
                "age in [15, 39], comorbidities=absent",
            )
        ]

    def test_no_keywords_render_null(self):
        rows = annotate([CsvRow2("Clinical trial", "Response assessment")])
        assert rows[0].head_constraints == "NULL"
        assert rows[0].tail_constraints == "NULL"

    def test_empty_head_is_malformed(self):
        with pytest.raises(MalformedRow):
            annotate([CsvRow2("", "x")])

    def test_math_words_sentence(self):
        # disjunctive boxes degrade to a conjunction of the mentions; the
        # "or" itself is out of scope for the rule-based extractor
        rows = annotate(
            [CsvRow2("Ph+ ALL", "greater than 65 years of age or substantial comorbidities")]
        )
        assert rows[0].tail_constraints == "age>65, comorbidities=present"


class TestLoadCsv:
    def test_minimal_case(self):
        g = load_csv([CsvRow4("A", "NULL", "B", "age<65")])
        assert g.stats().total_nodes == 2
        assert g.stats().decision_nodes == 1
        assert g.stats().relations == 1
        assert g.get_node(2).constraints["age"] == Numeric("<", 65)

    def test_dedup_by_content(self):
        g = load_csv(
            [
                CsvRow4("A", "NULL", "B", "NULL"),
                CsvRow4("A", "NULL", "C", "NULL"),
                CsvRow4("B", "NULL", "C", "NULL"),
            ]
        )
        assert g.stats().total_nodes == 3
        assert g.stats().relations == 3

    def test_dedup_is_whitespace_and_case_insensitive(self):
        g = load_csv([CsvRow4("Ph+  ALL", "NULL", "ph+ all", "NULL")])
        assert g.stats().total_nodes == 1  # self-loop row between merged nodes

    def test_conflicting_constraints_fail_loudly(self):
        rows = [
            CsvRow4("A", "mrd=rising", "B", "NULL"),
            CsvRow4("A", "mrd=absent", "C", "NULL"),
        ]
        with pytest.raises(ConstraintConflict) as err:
            load_csv(rows)
        assert err.value.key == "mrd"

    def test_restating_same_constraints_ok(self):
        rows = [
            CsvRow4("A", "mrd=rising", "B", "NULL"),
            CsvRow4("A", "mrd=rising", "C", "NULL"),
        ]
        g = load_csv(rows)
        assert g.stats().total_nodes == 3

    def test_duplicate_rows_skipped_with_diagnostic(self):
        notes = []
        rows = [CsvRow4("A", "NULL", "B", "NULL")] * 2
        g = load_csv(rows, diagnostics=notes)
        assert g.stats().relations == 1
        assert len(notes) == 1 and notes[0].startswith("ingest:")

    def test_malformed_fragment_is_loud(self):
        with pytest.raises(MalformedRow):
            load_csv([CsvRow4("A", "=== nope ===", "B", "NULL")])

    def test_label_rules(self):
        g = load_csv([CsvRow4("Ph+ ALL", "stratified=ph+", "Some box", "mrd=rising")])
        assert g.get_node(1).label == "risk_stratification"
        assert g.get_node(2).label == "decision_node"

    def test_loading_twice_into_one_graph_adds_nothing(self):
        rows = read_rows(data_path("all_guideline.csv"))
        g = load_csv(rows)
        before = g.stats()
        load_csv(rows, graph=g, diagnostics=[])
        assert g.stats() == before

    def test_fresh_loads_are_isomorphic(self):
        rows = read_rows(data_path("all_guideline.csv"))
        assert load_csv(rows) == load_csv(rows)


class TestExportCsv:
    def test_empty_graph(self):
        assert export_csv(DecisionGraph()) == []

    def test_round_trip_isomorphism(self):
        for name in ("all_guideline.csv", "bone_excerpt.csv", "kidney_excerpt.csv"):
            rows = read_rows(data_path(name))
            g = load_csv(rows)
            g2 = load_csv(export_csv(g))
            assert g2.stats() == g.stats()
            assert sorted(n.content for n in g2.nodes()) == sorted(
                n.content for n in g.nodes()
            )
            edges = lambda gr: sorted(
                (gr.get_node(r.src).content, gr.get_node(r.dst).content)
                for r in gr.relationships()
            )
            assert edges(g2) == edges(g)

    def test_constraint_cells_reparse(self, guideline):
        for row in export_csv(guideline):
            for cell in (row.head_constraints, row.tail_constraints):
                if cell == "NULL":
                    continue
                for fragment in split_fragments(cell):
                    parse_constraint(fragment)


class TestSplitFragments:
    def test_respects_interval_brackets(self):
        cell = "age in [15, 39], comorbidities=absent"
        assert split_fragments(cell) == ["age in [15, 39]", "comorbidities=absent"]

    def test_exclusive_parens(self):
        assert split_fragments("age in (35, 65), mrd=rising") == [
            "age in (35, 65)",
            "mrd=rising",
        ]


class TestFileIo:
    def test_fixture_counts(self):
        rows = read_rows(data_path("all_guideline.csv"))
        assert len(rows) == 28
        g = load_csv(rows)
        assert g.stats().relations == 28  # no duplicate rows in the fixture
        assert g.stats().total_nodes <= 2 * len(rows)
        constrained_entities = set()
        for row in rows:
            if row.head_constraints != "NULL":
                constrained_entities.add(" ".join(row.head.lower().split()))
            if row.tail_constraints != "NULL":
                constrained_entities.add(" ".join(row.tail.lower().split()))
        assert g.stats().decision_nodes == len(constrained_entities)

    def test_write_read_round_trip(self, tmp_path, guideline):
        rows = export_csv(guideline)
        path = tmp_path / "out.csv"
        write_rows(path, rows)
        assert read_rows(path) == rows

    def test_two_column_file_annotated_on_load(self):
        graph, applied = ingest.load_csv_file(data_path("all_parser_output_sample.csv"))
        assert applied == 4
        aya = graph.find_node_by_content("AYA (without substantial comorbidities)")
        assert graph.get_node(aya).constraints["age"] == Interval(15, 39)
        assert graph.get_node(aya).constraints["comorbidities"] == Presence(False)

    def test_bad_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(MalformedRow):
            read_rows(path)

    def test_wrong_arity_row(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text('Head entity,Head Constraints,Tail entity,Tail Constraints\n"A","NULL","B"\n')
        with pytest.raises(MalformedRow) as err:
            read_rows(path)
        assert err.value.line == 2

    def test_excerpt_fixtures_load(self):
        for name, nodes in (("bone_excerpt.csv", 5), ("kidney_excerpt.csv", 5)):
            graph, _ = ingest.load_csv_file(data_path(name))
            assert graph.stats().total_nodes == nodes
            assert graph.stats().decision_nodes == 2
