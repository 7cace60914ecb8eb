"""Encode bitstreams as level-descending walks and invert the walk exactly.

Every node's viable out-edge set gets a canonical Huffman code; the walk
consumes payload bits by greedy prefix match against that code. Construction
is fully deterministic:

* merge the two items of smallest weight, breaking ties by the
  lexicographically smallest label contained in each subtree;
* within a merge the heavier subtree takes branch bit 0 (tie: smaller label);
* afterwards the 0/1 assignment of every internal node is flipped by one
  keystream bit, so codeword values are key-dependent while codeword lengths
  are not.

Wire-format constant: the keystream bit for internal node ``i`` of the code
owned by ``owner`` is ``HMAC_SHA256(secret, b"<domain>:<owner>:<i>")[0] & 1``
with domain ``edges`` (owner = node id) or ``start`` (owner = ``-``).

Start-node selection carries bits through the same mechanism: a Huffman code
over the viable level-1 nodes weighted by their total out-edge weight. A
level-1 pin bypasses it.

Message framing: a 16-bit big-endian payload bit count followed by the
payload bits; the final walk is completed with zero padding bits that are
never counted as consumed.
"""

from __future__ import annotations

import hashlib
import hmac
from dataclasses import dataclass, field
from fractions import Fraction
from heapq import heapify, heappop, heappush
from typing import Iterable, Sequence
from weakref import WeakKeyDictionary

from .bits import BitCursor, bits_to_bytes, bits_to_int, bytes_to_bits, int_to_bits
from .errors import (
    EdgeNotInGraph,
    EmptyViableGraph,
    InvalidKey,
    NoViableEdges,
    PayloadTooLarge,
    PinMismatch,
    PinUnreachable,
    TruncatedStream,
    ZeroCapacityGraph,
)
from .graph import KnowledgeGraph

MAX_PAYLOAD_BITS = (1 << 16) - 1
HEADER_BITS = 16


@dataclass(frozen=True)
class StegoKey:
    """Shared secret plus the pinned (level, label) pairs.

    Pins are key material: they change which hops consume bits, so both
    sides must agree on them exactly.
    """

    secret: bytes
    pins: tuple[tuple[int, str], ...] = ()

    def __post_init__(self):
        if len(self.secret) < 16:
            raise InvalidKey(f"secret must be at least 16 bytes, got {len(self.secret)}")
        levels = [level for level, _ in self.pins]
        if len(levels) != len(set(levels)):
            raise InvalidKey("at most one pin per level")


@dataclass(frozen=True)
class Payload:
    """Secret bitstream; MSB-first within each source byte."""

    bits: tuple[int, ...]

    def __post_init__(self):
        if len(self.bits) > MAX_PAYLOAD_BITS:
            raise PayloadTooLarge(f"{len(self.bits)} bits exceeds the {MAX_PAYLOAD_BITS}-bit framing limit")
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("payload bits must be 0 or 1")

    @property
    def bit_length(self) -> int:
        return len(self.bits)

    @classmethod
    def from_bytes(cls, data: bytes) -> "Payload":
        return cls(tuple(bytes_to_bits(data)))

    def to_bytes(self) -> bytes:
        return bits_to_bytes(self.bits)


@dataclass(frozen=True)
class StegoPath:
    """A complete level-1 to level-K walk and its payload-bit accounting.

    Hop 0 is the start-node selection; hop i (i >= 1) is the transition
    into ``nodes[i]``. ``pinned_hops`` lists hops that consumed 0 bits
    because a pin forced them.
    """

    nodes: tuple[int, ...]
    bits_consumed: int = 0
    pinned_hops: frozenset[int] = field(default_factory=frozenset)


class EdgeCodebook:
    """Prefix-free, complete, optimal code over one node's viable out-edges.

    A single viable edge gets the empty codeword (0 bits consumed). The
    start code over level-1 nodes reuses this shape with ``owner=None``.
    """

    __slots__ = ("owner", "entries", "_decode")

    def __init__(self, owner: int | None, entries: dict[int, str]):
        self.owner = owner
        self.entries = dict(entries)
        self._decode = {code: sym for sym, code in self.entries.items()}

    @property
    def decode_map(self) -> dict[str, int]:
        return self._decode

    def is_singleton(self) -> bool:
        return len(self.entries) == 1

    def lengths(self) -> tuple[int, ...]:
        return tuple(sorted(len(c) for c in self.entries.values()))

    def kraft_sum(self) -> Fraction:
        return sum((Fraction(1, 2 ** len(c)) for c in self.entries.values()), Fraction(0))

    def weighted_length(self, weights: dict[int, Fraction]) -> Fraction:
        return sum((weights[s] * len(c) for s, c in self.entries.items()), Fraction(0))

    def __repr__(self) -> str:
        return f"EdgeCodebook(owner={self.owner}, entries={self.entries})"


# --- construction ---------------------------------------------------------------


def _flip_bit(secret: bytes, domain: str, owner: str, index: int) -> int:
    msg = f"{domain}:{owner}:{index}".encode()
    return hmac.new(secret, msg, hashlib.sha256).digest()[0] & 1


def _huffman(items: Sequence[tuple[int, str, Fraction]], secret: bytes,
             domain: str, owner: str) -> dict[int, str]:
    """items: (symbol, label, weight); labels are unique across items."""
    if len(items) == 1:
        return {items[0][0]: ""}
    heap: list[tuple[Fraction, str, tuple]] = [
        (Fraction(w), label, ("leaf", sym)) for sym, label, w in items
    ]
    heapify(heap)
    index = 0
    while len(heap) > 1:
        wa, la, ta = heappop(heap)
        wb, lb, tb = heappop(heap)
        # heavier subtree takes branch 0; on a weight tie the smaller label
        # (which is the first pop) takes it
        if wa == wb:
            zero, one = ta, tb
        else:
            zero, one = tb, ta
        heappush(heap, (wa + wb, min(la, lb), ("node", index, zero, one)))
        index += 1
    root = heap[0][2]

    codes: dict[int, str] = {}

    def assign(tree: tuple, prefix: str) -> None:
        if tree[0] == "leaf":
            codes[tree[1]] = prefix
            return
        _, idx, zero, one = tree
        if _flip_bit(secret, domain, owner, idx):
            zero, one = one, zero
        assign(zero, prefix + "0")
        assign(one, prefix + "1")

    assign(root, "")
    return codes


_CODEBOOK_CACHE: "WeakKeyDictionary[KnowledgeGraph, dict]" = WeakKeyDictionary()


def _graph_cache(g: KnowledgeGraph) -> dict:
    cache = _CODEBOOK_CACHE.get(g)
    if cache is None:
        cache = {}
        _CODEBOOK_CACHE[g] = cache
    return cache


def build_codebook(g: KnowledgeGraph, v: int, key: StegoKey) -> EdgeCodebook:
    """Canonical keyed Huffman code over the viable out-edges of ``v``."""
    cache = _graph_cache(g)
    cache_key = (v, key.secret)
    book = cache.get(cache_key)
    if book is not None:
        return book
    edges = g.out_edges(v)
    if not edges:
        raise NoViableEdges(f"node {v} ({g.node(v).label!r}) has no viable outgoing edge")
    items = [(e.dst, g.node(e.dst).label, e.weight) for e in edges]
    book = EdgeCodebook(v, _huffman(items, key.secret, "edges", str(v)))
    cache[cache_key] = book
    return book


def _start_items(g: KnowledgeGraph) -> list[tuple[int, str, Fraction]]:
    items = []
    for node in g.level_nodes(1):
        weight = sum((e.weight for e in g.out_edges(node.id)), Fraction(0))
        if weight <= 0:
            weight = Fraction(1)  # K=1 degenerate graphs: sinks get a uniform weight
        items.append((node.id, node.label, weight))
    return items


def start_codebook(g: KnowledgeGraph, key: StegoKey) -> EdgeCodebook:
    """Keyed Huffman code over viable level-1 nodes (start-node selection)."""
    cache = _graph_cache(g)
    cache_key = (None, key.secret)
    book = cache.get(cache_key)
    if book is not None:
        return book
    items = _start_items(g)
    if not items:
        raise EmptyViableGraph("no viable level-1 node")
    book = EdgeCodebook(None, _huffman(items, key.secret, "start", "-"))
    cache[cache_key] = book
    return book


# --- pins -----------------------------------------------------------------------


def _resolve_pins(g: KnowledgeGraph, key: StegoKey) -> list[tuple[int, int, str]]:
    """Sorted (level, node_id, label) triples; missing pins raise PinUnreachable."""
    resolved = []
    for level, label in sorted(key.pins):
        node = g.node_by_label(label)
        if node is None or node.level != level:
            raise PinUnreachable(level, label, "no such node at that level in the viable graph")
        resolved.append((level, node.id, label))
    return resolved


def _replay_pins(nodes: Sequence[int], g: KnowledgeGraph,
                 pins: Sequence[tuple[int, int, str]]) -> frozenset[int]:
    """Reconstruct which hops of an existing path the pins forced.

    Mirrors the embedding walk exactly; any path the embedder could not
    have produced under these pins raises PinMismatch.
    """
    pin_idx = 0
    pinned: set[int] = set()
    if pins and pins[0][0] == 1:
        if nodes[0] != pins[0][1]:
            raise PinMismatch(f"path starts at node {nodes[0]} but level 1 is pinned to {pins[0][2]!r}")
        pinned.add(0)
        pin_idx = 1
    for hop in range(1, len(nodes)):
        u, w = nodes[hop - 1], nodes[hop]
        if pin_idx >= len(pins):
            continue
        level_u = g.node(u).level
        pl, pnode, plabel = pins[pin_idx]
        if level_u >= pl:
            raise PinMismatch(f"path passes level {pl} without visiting pinned {plabel!r}")
        out = g.out_edges(u)
        if any(e.dst == pnode for e in out):
            if w != pnode:
                raise PinMismatch(f"hop {hop} could reach pinned {plabel!r} but goes to node {w}")
            pinned.add(hop)
            pin_idx += 1
            continue
        if all(g.node(e.dst).level >= pl for e in out):
            raise PinMismatch(f"pin {pl}:{plabel} was unreachable from node {u}; path impossible")
    if pin_idx < len(pins):
        raise PinMismatch(f"path ends before satisfying pin {pins[pin_idx][0]}:{pins[pin_idx][2]}")
    return frozenset(pinned)


# --- embed / extract --------------------------------------------------------------


class _WalkContext:
    """Per-operation resolution of pins and codebooks.

    Message-level operations walk many paths over one (graph, key) pair;
    resolving everything once keeps the per-hop cost to dict lookups.
    """

    __slots__ = ("g", "key", "pins", "depth", "levels", "_books", "_start")

    def __init__(self, g: KnowledgeGraph, key: StegoKey):
        self.g = g
        self.key = key
        self.pins = _resolve_pins(g, key)
        self.depth = g.depth
        self.levels = {n.id: n.level for n in g.nodes}
        self._books: dict[int, EdgeCodebook] = {}
        self._start: EdgeCodebook | None = None

    def start_book(self) -> EdgeCodebook:
        if self._start is None:
            self._start = start_codebook(self.g, self.key)
        return self._start

    def book(self, v: int) -> EdgeCodebook:
        book = self._books.get(v)
        if book is None:
            book = build_codebook(self.g, v, self.key)
            self._books[v] = book
        return book

    def embed_one(self, cursor: BitCursor) -> StegoPath:
        g, pins, depth, levels = self.g, self.pins, self.depth, self.levels
        take = cursor.take
        before = cursor.consumed
        pinned_hops: set[int] = set()
        pin_idx = 0

        if pins and pins[0][0] == 1:
            v = pins[0][1]
            pinned_hops.add(0)
            pin_idx = 1
        else:
            v = self._select(self.start_book(), take)

        nodes = [v]
        hop = 1
        n_pins = len(pins)
        while levels[v] < depth:
            out = g.out_edges(v)
            if not out:
                raise NoViableEdges(f"dead end at node {v}; graph is not viable-pruned")
            if pin_idx < n_pins:
                pl, pnode, plabel = pins[pin_idx]
                if levels[v] >= pl:
                    raise PinUnreachable(pl, plabel, "walk passed the pinned level")
                if any(e.dst == pnode for e in out):
                    v = pnode
                    nodes.append(v)
                    pinned_hops.add(hop)
                    hop += 1
                    pin_idx += 1
                    continue
                if all(levels[e.dst] >= pl for e in out):
                    raise PinUnreachable(pl, plabel, "every continuation skips the pinned level")
            v = self._select(self.book(v), take)
            nodes.append(v)
            hop += 1

        if pin_idx < n_pins:
            pl, _, plabel = pins[pin_idx]
            raise PinUnreachable(pl, plabel, "walk ended before visiting the pinned node")

        return StegoPath(tuple(nodes), cursor.consumed - before, frozenset(pinned_hops))

    @staticmethod
    def _select(book: EdgeCodebook, take) -> int:
        decode = book._decode
        sym = decode.get("")
        if sym is not None:
            return sym
        prefix = ""
        while True:
            bit, _ = take()
            prefix += "1" if bit else "0"
            sym = decode.get(prefix)
            if sym is not None:
                return sym

    def extract_one(self, p: StegoPath) -> list[str]:
        """Codeword chunks of a path, validation included."""
        g, levels = self.g, self.levels
        if not p.nodes:
            raise EdgeNotInGraph("empty path")
        for nid in p.nodes:
            if nid not in levels:
                raise EdgeNotInGraph(f"path references unknown node {nid}")
        if levels[p.nodes[0]] != 1:
            raise EdgeNotInGraph(f"path starts at level {levels[p.nodes[0]]}, not 1")
        if levels[p.nodes[-1]] != self.depth:
            raise EdgeNotInGraph("path does not end at the deepest level")
        for u, w in zip(p.nodes, p.nodes[1:]):
            if g.edge(u, w) is None:
                raise EdgeNotInGraph(f"no edge {u}->{w}")

        if self.pins:
            pinned = _replay_pins(p.nodes, g, self.pins)
        else:
            pinned = frozenset()
        for hop in p.pinned_hops:
            if hop not in pinned:
                raise PinMismatch(f"hop {hop} is marked pinned but no pin explains it")

        chunks: list[str] = []
        if 0 not in pinned:
            code = self.start_book().entries.get(p.nodes[0])
            if code is None:
                raise EdgeNotInGraph(f"node {p.nodes[0]} is not a viable start node")
            chunks.append(code)
        for hop in range(1, len(p.nodes)):
            if hop not in pinned:
                chunks.append(self.book(p.nodes[hop - 1]).entries[p.nodes[hop]])
        return chunks


def embed_path(cursor: BitCursor, g: KnowledgeGraph, key: StegoKey) -> StegoPath:
    """Walk from level 1 to level K consuming cursor bits at every free hop.

    The graph must be viable-pruned. A cursor that runs dry mid-codeword is
    extended with zero padding; padding is not counted in ``bits_consumed``.
    """
    return _WalkContext(g, key).embed_one(cursor)


def extract_path(p: StegoPath, g: KnowledgeGraph, key: StegoKey) -> list[int]:
    """Recover the bit sequence a path encodes, padding bits included.

    Hops that the key's pins forced contribute nothing. Hops marked pinned
    in the path that the pins cannot explain raise PinMismatch.
    """
    chunks = _WalkContext(g, key).extract_one(p)
    return [1 if c == "1" else 0 for c in "".join(chunks)]


def embed_message(payload: Payload, g: KnowledgeGraph, key: StegoKey) -> list[StegoPath]:
    """Frame the payload and embed it as a sequence of complete walks."""
    frame = int_to_bits(payload.bit_length, HEADER_BITS) + list(payload.bits)
    cursor = BitCursor(frame)
    ctx = _WalkContext(g, key)
    paths: list[StegoPath] = []
    while cursor.remaining > 0:
        path = ctx.embed_one(cursor)
        if path.bits_consumed == 0 and cursor.remaining > 0:
            raise ZeroCapacityGraph(
                "every hop is pinned or forced; this graph cannot carry payload bits"
            )
        paths.append(path)
    return paths


def extract_message(paths: Iterable[StegoPath], g: KnowledgeGraph, key: StegoKey) -> Payload:
    """Inverse of embed_message for paths presented in transmission order."""
    ctx = _WalkContext(g, key)
    chunks: list[str] = []
    for path in paths:
        chunks.extend(ctx.extract_one(path))
    bits = [1 if c == "1" else 0 for c in "".join(chunks)]
    if len(bits) < HEADER_BITS:
        raise TruncatedStream(f"{len(bits)} bits recovered, header needs {HEADER_BITS}")
    length = bits_to_int(bits[:HEADER_BITS])
    body = bits[HEADER_BITS:]
    if len(body) < length:
        raise TruncatedStream(f"header claims {length} payload bits, only {len(body)} recovered")
    return Payload(tuple(body[:length]))


# --- capacity ---------------------------------------------------------------------


@dataclass(frozen=True)
class CapacityReport:
    """Bits-per-path statistics over all pin-consistent complete walks."""

    min_bits: int
    max_bits: int
    expected_bits: Fraction
    walk_count: int
    degenerate: bool


def capacity_report(g: KnowledgeGraph, key: StegoKey) -> CapacityReport:
    """Min/max/expected codeword bits per walk under edge-weight-proportional
    walk probabilities, honoring the key's pins."""
    pins = _resolve_pins(g, key)
    depth = g.depth
    walks: list[tuple[int, Fraction]] = []

    def extend(v: int, pin_idx: int, bits: int, prob: Fraction) -> None:
        if g.node(v).level == depth:
            if pin_idx == len(pins):
                walks.append((bits, prob))
            return
        out = g.out_edges(v)
        if not out:
            return
        if pin_idx < len(pins):
            pl, pnode, _ = pins[pin_idx]
            if g.node(v).level >= pl:
                return
            if any(e.dst == pnode for e in out):
                extend(pnode, pin_idx + 1, bits, prob)
                return
            if all(g.node(e.dst).level >= pl for e in out):
                return
        book = build_codebook(g, v, key)
        total = sum((e.weight for e in out), Fraction(0))
        for e in out:
            extend(e.dst, pin_idx, bits + len(book.entries[e.dst]), prob * e.weight / total)

    if pins and pins[0][0] == 1:
        extend(pins[0][1], 1, 0, Fraction(1))
    else:
        book = start_codebook(g, key)
        items = _start_items(g)
        total = sum((w for _, _, w in items), Fraction(0))
        for sym, _, weight in items:
            extend(sym, 0, len(book.entries[sym]), weight / total)

    if not walks:
        return CapacityReport(0, 0, Fraction(0), 0, True)
    total_prob = sum((p for _, p in walks), Fraction(0))
    expected = sum((Fraction(b) * p for b, p in walks), Fraction(0)) / total_prob
    min_bits = min(b for b, _ in walks)
    max_bits = max(b for b, _ in walks)
    return CapacityReport(min_bits, max_bits, expected, len(walks), max_bits == 0)
