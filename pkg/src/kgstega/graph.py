"""Leveled knowledge-graph model: ingestion, validation, weighting, queries.

Graphs are immutable after construction; every transform returns a new value.
Edge weights are exact rationals so downstream codebooks are bit-reproducible
across platforms.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import IO, Iterable, Union

from .errors import (
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
from .text import contains_contiguous, label_tokens, tokenize

Source = Union[str, Path, bytes, IO[bytes]]

MAX_LABEL_TOKENS = 4


@dataclass(frozen=True)
class Node:
    id: int
    label: str
    level: int


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    relation: str
    weight: Fraction

    def replace_weight(self, weight: Fraction) -> "Edge":
        return Edge(self.src, self.dst, self.relation, weight)


class KnowledgeGraph:
    """Directed graph of labeled concept nodes with integer semantic levels.

    The constructor enforces structural invariants (unique ids, unique
    labels, known endpoints, at most one edge per node pair). Level descent
    and weight positivity are enforced by :func:`load_graph` and audited by
    :func:`validate_hierarchy`, so programmatically built graphs can carry
    violations for auditing purposes.
    """

    def __init__(self, nodes: Iterable[Node], edges: Iterable[Edge]):
        node_list = sorted(nodes, key=lambda n: n.id)
        edge_list = sorted(edges, key=lambda e: (e.src, e.dst))

        by_id: dict[int, Node] = {}
        by_label: dict[str, Node] = {}
        for node in node_list:
            if node.id in by_id:
                raise DuplicateId(f"node id {node.id} appears more than once")
            if node.label in by_label:
                raise DuplicateLabel(f"label {node.label!r} appears more than once")
            by_id[node.id] = node
            by_label[node.label] = node

        out: dict[int, list[Edge]] = {n.id: [] for n in node_list}
        seen_pairs: set[tuple[int, int]] = set()
        for edge in edge_list:
            for endpoint in (edge.src, edge.dst):
                if endpoint not in by_id:
                    raise UnknownEndpoint(f"edge {edge.src}->{edge.dst} references unknown node {endpoint}")
            if (edge.src, edge.dst) in seen_pairs:
                raise DuplicateEdge(f"more than one edge for pair {edge.src}->{edge.dst}")
            seen_pairs.add((edge.src, edge.dst))
            out[edge.src].append(edge)

        self._nodes = tuple(node_list)
        self._edges = tuple(edge_list)
        self._by_id = by_id
        self._by_label = by_label
        # spec ordering for codebooks: weight descending, dst label ascending
        self._out = {
            v: tuple(sorted(items, key=lambda e: (-e.weight, by_id[e.dst].label)))
            for v, items in out.items()
        }
        self._edge_map = {(e.src, e.dst): e for e in edge_list}
        self._depth = max((n.level for n in node_list), default=0)
        self._hash: int | None = None

    # --- basic accessors -----------------------------------------------------

    @property
    def nodes(self) -> tuple[Node, ...]:
        return self._nodes

    @property
    def edges(self) -> tuple[Edge, ...]:
        return self._edges

    @property
    def depth(self) -> int:
        """K: the maximum node level present."""
        return self._depth

    def node(self, node_id: int) -> Node:
        try:
            return self._by_id[node_id]
        except KeyError:
            raise UnknownNode(f"no node with id {node_id}") from None

    def has_node(self, node_id: int) -> bool:
        return node_id in self._by_id

    def node_by_label(self, label: str) -> Node | None:
        return self._by_label.get(label)

    def level_nodes(self, level: int) -> tuple[Node, ...]:
        return tuple(n for n in self._nodes if n.level == level)

    def edge(self, src: int, dst: int) -> Edge | None:
        return self._edge_map.get((src, dst))

    def out_edges(self, v: int) -> tuple[Edge, ...]:
        """Out-edge set of ``v``, sorted by weight descending then dst label."""
        if v not in self._by_id:
            raise UnknownNode(f"no node with id {v}")
        return self._out[v]

    # --- equality is by content, so permuted loads compare equal --------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, KnowledgeGraph):
            return NotImplemented
        return self._nodes == other._nodes and self._edges == other._edges

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self._nodes, self._edges))
        return self._hash

    def __repr__(self) -> str:
        return f"KnowledgeGraph({len(self._nodes)} nodes, {len(self._edges)} edges, K={self._depth})"


# --- ingestion -----------------------------------------------------------------


def _open_lines(source: Source, name: str) -> list[str]:
    if isinstance(source, (str, Path)):
        data = Path(source).read_bytes()
    elif isinstance(source, bytes):
        data = source
    else:
        data = source.read()
    try:
        return data.decode("utf-8").split("\n")
    except UnicodeDecodeError as exc:
        raise MalformedLine(name, 0, f"not valid UTF-8: {exc}") from None


def _check_label(label: str, source: str, line_no: int) -> None:
    tokens = label_tokens(label)
    if not 1 <= len(tokens) <= MAX_LABEL_TOKENS:
        raise MalformedLine(source, line_no, f"label {label!r} must have 1..{MAX_LABEL_TOKENS} tokens")
    if tokenize(label) != tokens:
        raise MalformedLine(source, line_no, f"label {label!r} must be lowercase tokens with no edge punctuation")


def load_graph(nodes_source: Source, edges_source: Source) -> KnowledgeGraph:
    """Parse the TSV node and edge files into a validated graph.

    The parse is order-independent: permuting input lines yields an equal
    graph. Level descent and positive weights are enforced here.
    """
    nodes = []
    for line_no, line in enumerate(_open_lines(nodes_source, "nodes"), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise MalformedLine("nodes", line_no, f"expected 3 tab-separated fields, got {len(parts)}")
        raw_id, label, raw_level = parts
        try:
            node_id = int(raw_id)
        except ValueError:
            raise MalformedLine("nodes", line_no, f"bad node id {raw_id!r}") from None
        label = label.strip()
        _check_label(label, "nodes", line_no)
        try:
            level = int(raw_level)
        except ValueError:
            raise MalformedLine("nodes", line_no, f"bad level {raw_level!r}") from None
        if level < 1:
            raise MalformedLine("nodes", line_no, f"level must be >= 1, got {level}")
        nodes.append(Node(node_id, label, level))

    by_id = {}
    for node in nodes:
        if node.id in by_id:
            raise DuplicateId(f"node id {node.id} appears more than once")
        by_id[node.id] = node

    edges = []
    for line_no, line in enumerate(_open_lines(edges_source, "edges"), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) not in (3, 4):
            raise MalformedLine("edges", line_no, f"expected 3 or 4 tab-separated fields, got {len(parts)}")
        raw_src, relation, raw_dst = parts[0], parts[1], parts[2]
        try:
            src = int(raw_src)
            dst = int(raw_dst)
        except ValueError:
            raise MalformedLine("edges", line_no, "bad endpoint id") from None
        if len(parts) == 4:
            try:
                weight = Fraction(parts[3])
            except (ValueError, ZeroDivisionError):
                raise MalformedLine("edges", line_no, f"bad weight {parts[3]!r}") from None
        else:
            weight = Fraction(1)
        if weight <= 0:
            raise NonPositiveWeight(f"edges line {line_no}: weight {weight} is not positive")
        for endpoint in (src, dst):
            if endpoint not in by_id:
                raise UnknownEndpoint(f"edges line {line_no}: unknown node {endpoint}")
        if by_id[dst].level <= by_id[src].level:
            raise LevelViolation(src, dst, f" (levels {by_id[src].level}->{by_id[dst].level})")
        edges.append(Edge(src, dst, relation.strip(), weight))

    return KnowledgeGraph(nodes, edges)


# --- auditing and pruning --------------------------------------------------------


@dataclass(frozen=True)
class HierarchyViolation:
    kind: str  # "level" or "dead_end"
    nodes: tuple[int, ...]
    detail: str


def _reaches_depth(g: KnowledgeGraph) -> set[int]:
    """Node ids that can reach some level-K node over strictly ascending edges."""
    ok: set[int] = {n.id for n in g.nodes if n.level == g.depth}
    # process by descending level so one pass suffices (edges ascend in level)
    for node in sorted(g.nodes, key=lambda n: -n.level):
        if node.id in ok:
            continue
        for edge in g.out_edges(node.id):
            dst = g.node(edge.dst)
            if dst.level > node.level and edge.dst in ok:
                ok.add(node.id)
                break
    return ok


def validate_hierarchy(g: KnowledgeGraph) -> list[HierarchyViolation]:
    """Audit the level rule and dead ends; violations are data, not errors."""
    violations = []
    for edge in g.edges:
        if g.node(edge.dst).level <= g.node(edge.src).level:
            violations.append(HierarchyViolation(
                "level", (edge.src, edge.dst),
                f"edge {edge.src}->{edge.dst} levels {g.node(edge.src).level}->{g.node(edge.dst).level}",
            ))
    reaches = _reaches_depth(g)
    for node in g.nodes:
        if node.level < g.depth and node.id not in reaches:
            violations.append(HierarchyViolation(
                "dead_end", (node.id,),
                f"node {node.id} ({node.label!r}, level {node.level}) has no viable outgoing edge",
            ))
    return violations


def viable_subgraph(g: KnowledgeGraph) -> KnowledgeGraph:
    """Drop edges and nodes that cannot take part in a complete walk.

    Keeps exactly the nodes that lie on some level-1 to level-K path:
    first removes edges whose destination cannot reach level K, then
    removes nodes unreachable from the surviving level-1 nodes. Idempotent.
    """
    reaches = _reaches_depth(g)
    kept_edges = [e for e in g.edges if e.src in reaches and e.dst in reaches]

    starts = [n.id for n in g.nodes if n.level == 1 and n.id in reaches]
    if not starts:
        raise EmptyViableGraph("no level-1 node can reach the deepest level")

    out: dict[int, list[int]] = {}
    for e in kept_edges:
        out.setdefault(e.src, []).append(e.dst)
    seen = set(starts)
    frontier = list(starts)
    while frontier:
        v = frontier.pop()
        for w in out.get(v, ()):
            if w not in seen:
                seen.add(w)
                frontier.append(w)

    nodes = [n for n in g.nodes if n.id in seen]
    edges = [e for e in kept_edges if e.src in seen]
    return KnowledgeGraph(nodes, edges)


def estimate_edge_weights(g: KnowledgeGraph, corpus: Iterable[str]) -> KnowledgeGraph:
    """Re-weight every edge from corpus co-occurrence of its endpoint labels.

    weight(e) = 1 + number of sentences containing both endpoint labels as
    contiguous token runs; the add-one floor keeps all weights positive.
    """
    counts: dict[tuple[int, int], int] = {(e.src, e.dst): 0 for e in g.edges}
    phrases = {n.id: label_tokens(n.label) for n in g.nodes}
    for sentence in corpus:
        tokens = tokenize(sentence)
        if not tokens:
            continue
        present = {nid for nid, phrase in phrases.items() if contains_contiguous(tokens, phrase)}
        for e in g.edges:
            if e.src in present and e.dst in present:
                counts[(e.src, e.dst)] += 1
    edges = [e.replace_weight(Fraction(1 + counts[(e.src, e.dst)])) for e in g.edges]
    return KnowledgeGraph(g.nodes, edges)


def enumerate_paths(g: KnowledgeGraph, src: int, dst: int) -> list[tuple[int, ...]]:
    """All simple strictly level-ascending paths src->dst as node-id tuples.

    Results come in lexicographic order of the id sequences. ``src == dst``
    yields the single zero-length path.
    """
    g.node(src)
    g.node(dst)
    results: list[tuple[int, ...]] = []

    def walk(v: int, trail: list[int]) -> None:
        if v == dst:
            results.append(tuple(trail))
            return
        level = g.node(v).level
        for w in sorted(e.dst for e in g.out_edges(v)):
            if g.node(w).level > level:
                walk(w, trail + [w])

    walk(src, [src])
    return results
