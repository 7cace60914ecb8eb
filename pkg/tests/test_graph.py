import random
from fractions import Fraction

import pytest

from kgstega import (
    Edge,
    KnowledgeGraph,
    Node,
    enumerate_paths,
    estimate_edge_weights,
    load_graph,
    validate_hierarchy,
    viable_subgraph,
)
from kgstega.errors import (
    DuplicateEdge,
    DuplicateId,
    DuplicateLabel,
    EmptyViableGraph,
    LevelViolation,
    MalformedLine,
    NonPositiveWeight,
    UnknownEndpoint,
    UnknownNode,
)
from kgstega.fixtures import demo_edges_path, demo_nodes_path

from conftest import BAD, CAR, ENGINE, GOOD, NOISY, SEAT, TRUCK


def tsv(*lines: str) -> bytes:
    return ("\n".join(lines) + "\n").encode()


class TestLoadGraph:
    def test_demo_fixture_counts(self, demo_graph):
        assert len(demo_graph.nodes) == 7
        assert len(demo_graph.edges) == 7
        assert demo_graph.depth == 3

    def test_single_node_empty_edges(self):
        g = load_graph(tsv("1\tcar\t1"), b"")
        assert len(g.nodes) == 1
        assert len(g.edges) == 0

    def test_self_loop_is_level_violation(self):
        with pytest.raises(LevelViolation):
            load_graph(tsv("1\tcar\t1"), tsv("1\tr\t1"))

    def test_ascending_edge_rejected(self):
        with pytest.raises(LevelViolation):
            load_graph(tsv("1\tcar\t1", "2\tengine\t2"), tsv("2\tr\t1"))

    def test_order_independence(self, demo_graph):
        node_lines = demo_nodes_path().read_text().strip().split("\n")
        edge_lines = demo_edges_path().read_text().strip().split("\n")
        rng = random.Random(13)
        for _ in range(5):
            rng.shuffle(node_lines)
            rng.shuffle(edge_lines)
            shuffled = load_graph(tsv(*node_lines), tsv(*edge_lines))
            assert shuffled == demo_graph
            assert shuffled.nodes == demo_graph.nodes
            assert shuffled.edges == demo_graph.edges

    @pytest.mark.parametrize("line", [
        "1\tcar",                      # missing column
        "x\tcar\t1",                   # bad id
        "1\tCar\t1",                   # uppercase label
        "1\tone two three four five\t1",  # too many tokens
        "1\tcar.\t1",                  # trailing punctuation
        "1\tcar\tzero",                # bad level
        "1\tcar\t0",                   # level below 1
    ])
    def test_malformed_node_lines(self, line):
        with pytest.raises(MalformedLine):
            load_graph(tsv(line), b"")

    def test_duplicate_id(self):
        with pytest.raises(DuplicateId):
            load_graph(tsv("1\tcar\t1", "1\ttruck\t1"), b"")

    def test_duplicate_label(self):
        with pytest.raises(DuplicateLabel):
            load_graph(tsv("1\tcar\t1", "2\tcar\t1"), b"")

    def test_unknown_endpoint(self):
        with pytest.raises(UnknownEndpoint):
            load_graph(tsv("1\tcar\t1"), tsv("1\tr\t99"))

    def test_non_positive_weight(self):
        nodes = tsv("1\tcar\t1", "2\tengine\t2")
        with pytest.raises(NonPositiveWeight):
            load_graph(nodes, tsv("1\tr\t2\t0"))

    def test_duplicate_edge(self):
        nodes = tsv("1\tcar\t1", "2\tengine\t2")
        with pytest.raises(DuplicateEdge):
            load_graph(nodes, tsv("1\tr\t2\t1", "1\tother\t2\t3"))

    def test_default_weight_is_one(self):
        g = load_graph(tsv("1\tcar\t1", "2\tengine\t2"), tsv("1\tr\t2"))
        assert g.edges[0].weight == Fraction(1)

    def test_weights_are_exact_rationals(self):
        g = load_graph(tsv("1\tcar\t1", "2\tengine\t2"), tsv("1\tr\t2\t3/2"))
        assert g.edges[0].weight == Fraction(3, 2)


class TestOutEdges:
    def test_car_sorted_by_weight(self, demo_graph):
        assert [(e.dst, e.weight) for e in demo_graph.out_edges(CAR)] == [
            (ENGINE, 4), (SEAT, 1),
        ]

    def test_level_k_nodes_are_sinks(self, demo_graph):
        assert demo_graph.out_edges(GOOD) == ()

    def test_engine_tie_broken_by_label(self, demo_graph):
        # bad and noisy tie at weight 1; 'bad' < 'noisy' lexicographically
        assert [e.dst for e in demo_graph.out_edges(ENGINE)] == [GOOD, BAD, NOISY]

    def test_unknown_node(self, demo_graph):
        with pytest.raises(UnknownNode):
            demo_graph.out_edges(99)


class TestValidateHierarchy:
    def test_demo_fixture_clean(self, demo_graph):
        assert validate_hierarchy(demo_graph) == []

    def test_ascending_edge_reported(self, demo_graph):
        g = KnowledgeGraph(
            demo_graph.nodes,
            list(demo_graph.edges) + [Edge(ENGINE, CAR, "rev", Fraction(1))],
        )
        report = validate_hierarchy(g)
        assert len(report) == 1
        assert report[0].kind == "level"
        assert report[0].nodes == (ENGINE, CAR)

    def test_dead_end_reported(self, demo_graph):
        g = KnowledgeGraph(
            list(demo_graph.nodes) + [Node(8, "wheel", 2)],
            demo_graph.edges,
        )
        report = validate_hierarchy(g)
        assert len(report) == 1
        assert report[0].kind == "dead_end"
        assert report[0].nodes == (8,)


class TestViableSubgraph:
    def test_demo_fixture_already_viable(self, demo_graph):
        assert viable_subgraph(demo_graph) == demo_graph

    def test_dead_end_branch_pruned(self, demo_graph):
        g = KnowledgeGraph(
            list(demo_graph.nodes) + [Node(8, "wheel", 2)],
            list(demo_graph.edges) + [Edge(CAR, 8, "has", Fraction(1))],
        )
        pruned = viable_subgraph(g)
        assert pruned == demo_graph

    def test_unreachable_sink_pruned(self, demo_graph):
        g = KnowledgeGraph(
            list(demo_graph.nodes) + [Node(9, "ugly", 3)],
            demo_graph.edges,
        )
        assert viable_subgraph(g) == demo_graph

    def test_no_viable_start_raises(self):
        g = KnowledgeGraph([Node(1, "car", 1), Node(2, "engine", 2)], [])
        with pytest.raises(EmptyViableGraph):
            viable_subgraph(g)

    def test_idempotent(self, demo_graph, k4_graph):
        for g in (demo_graph, k4_graph):
            once = viable_subgraph(g)
            assert viable_subgraph(once) == once

    def test_pruning_soundness(self, k4_graph):
        pruned = viable_subgraph(k4_graph)
        sinks = [n.id for n in pruned.nodes if n.level == pruned.depth]
        for node in pruned.nodes:
            if node.level == pruned.depth:
                continue
            assert any(enumerate_paths(pruned, node.id, sink) for sink in sinks)


class TestEstimateEdgeWeights:
    def test_co_occurrence_counting(self, demo_graph):
        weighted = estimate_edge_weights(demo_graph, ["the engine of the car is good"])
        expect = {
            (CAR, ENGINE): 2, (ENGINE, GOOD): 2,
            (CAR, SEAT): 1, (TRUCK, ENGINE): 1,
            (ENGINE, BAD): 1, (ENGINE, NOISY): 1, (SEAT, GOOD): 1,
        }
        for e in weighted.edges:
            assert e.weight == Fraction(expect[(e.src, e.dst)])

    def test_empty_corpus_floors_to_one(self, demo_graph):
        weighted = estimate_edge_weights(demo_graph, [])
        assert all(e.weight == 1 for e in weighted.edges)

    def test_sentence_without_labels_changes_nothing(self, demo_graph):
        weighted = estimate_edge_weights(demo_graph, ["nothing relevant here"])
        assert weighted == estimate_edge_weights(demo_graph, [])

    def test_multiword_label_requires_contiguity(self):
        g = load_graph(
            tsv("1\tcar\t1", "2\tfuel consumption\t2"),
            tsv("1\tr\t2"),
        )
        split = estimate_edge_weights(g, ["the car fuel was consumption heavy"])
        assert split.edges[0].weight == 1
        contiguous = estimate_edge_weights(g, ["the car fuel consumption is heavy"])
        assert contiguous.edges[0].weight == 2

    def test_weights_stay_positive(self, demo_graph, corpus_lines):
        weighted = estimate_edge_weights(demo_graph, corpus_lines)
        assert all(e.weight >= 1 for e in weighted.edges)


class TestEnumeratePaths:
    def test_car_to_good(self, demo_graph):
        assert enumerate_paths(demo_graph, CAR, GOOD) == [
            (CAR, ENGINE, GOOD), (CAR, SEAT, GOOD),
        ]

    def test_levels_only_ascend(self, demo_graph):
        assert enumerate_paths(demo_graph, GOOD, CAR) == []

    def test_identity_path(self, demo_graph):
        assert enumerate_paths(demo_graph, CAR, CAR) == [(CAR,)]

    def test_unknown_node(self, demo_graph):
        with pytest.raises(UnknownNode):
            enumerate_paths(demo_graph, CAR, 42)
