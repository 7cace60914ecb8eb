from fractions import Fraction

import pytest

from kgstega import KnowledgeGraph, Node, Edge, StegoKey, load_graph, viable_subgraph
from kgstega.fixtures import corpus_path, demo_edges_path, demo_nodes_path, templates_path
from kgstega.realize import Template, load_templates

TEST_SECRET = b"0123456789abcdef"

# ids used by the demo fixture, for readable assertions
CAR, TRUCK, ENGINE, SEAT, GOOD, BAD, NOISY = 1, 2, 3, 4, 5, 6, 7

PIN_CONFIGS = (
    (),
    ((1, "car"),),
    ((2, "engine"),),
    ((1, "car"), (2, "engine")),
)


@pytest.fixture(scope="session")
def demo_graph() -> KnowledgeGraph:
    return load_graph(demo_nodes_path(), demo_edges_path())


@pytest.fixture(scope="session")
def demo_viable(demo_graph) -> KnowledgeGraph:
    return viable_subgraph(demo_graph)


@pytest.fixture(scope="session")
def key() -> StegoKey:
    return StegoKey(TEST_SECRET)


@pytest.fixture(scope="session")
def templates() -> list[Template]:
    return load_templates(templates_path())


@pytest.fixture(scope="session")
def corpus_lines() -> list[str]:
    return [ln for ln in corpus_path().read_text().split("\n") if ln.strip()]


def build_k4_graph() -> KnowledgeGraph:
    """A branchier 4-level graph for property and key-independence tests."""
    spec = [
        (101, "alpha", 1), (102, "bravo", 1), (103, "delta", 1),
        (201, "metal", 2), (202, "stone", 2), (203, "glass", 2), (204, "timber", 2),
        (301, "red", 3), (302, "blue", 3), (303, "green", 3), (304, "amber", 3), (305, "ivory", 3),
        (401, "calm", 4), (402, "harsh", 4), (403, "mild", 4),
    ]
    edges = [
        (101, 201, 3), (101, 202, 1), (101, 203, 1), (101, 204, 2),
        (102, 201, 2), (102, 203, 2), (102, 204, 1),
        (103, 202, 5), (103, 204, 1),
        (201, 301, 4), (201, 302, 2), (201, 303, 1), (201, 304, 1),
        (202, 302, 3), (202, 303, 3), (202, 305, 1),
        (203, 301, 1), (203, 304, 1),
        (204, 303, 2), (204, 305, 2), (204, 304, 1), (204, 301, 1), (204, 302, 1),
        (301, 401, 2), (301, 402, 1),
        (302, 401, 1), (302, 402, 1), (302, 403, 1),
        (303, 403, 4), (303, 401, 1),
        (304, 402, 3), (304, 403, 1),
        (305, 401, 1), (305, 403, 2),
    ]
    nodes = [Node(nid, label, level) for nid, label, level in spec]
    return KnowledgeGraph(
        nodes,
        [Edge(src, dst, "rel", Fraction(w)) for src, dst, w in edges],
    )


@pytest.fixture(scope="session")
def k4_graph() -> KnowledgeGraph:
    return viable_subgraph(build_k4_graph())


@pytest.fixture(scope="session")
def k4_templates() -> list[Template]:
    return [
        Template("k4a", "the {2} of the {1} is {3} and {4}"),
        Template("k4b", "this {1} has {2} that looks {3} yet {4}"),
    ]
