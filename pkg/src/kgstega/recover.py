"""Recover the unique path a carrier sentence realizes, and audit graphs for
ambiguity that would break exact extraction.

Recovery fails closed: any sentence whose label matches admit zero or more
than one complete path, or that mentions labels off the recovered path, is
rejected rather than guessed at.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from itertools import product
from typing import Sequence

from .codec import StegoKey, StegoPath, _replay_pins, _resolve_pins
from .errors import AmbiguousMatch, NoPathFound, UnknownSentence
from .graph import KnowledgeGraph
from .text import label_tokens, tokenize


@dataclass(frozen=True)
class AmbiguityWitness:
    """A reproducible counterexample to the uniqueness assumption."""

    kind: str  # "duplicate_label_tokens" | "label_containment" | "multiple_paths_for_label_set"
    labels: tuple[str, ...]
    paths: tuple[tuple[int, ...], ...] = ()


@dataclass(frozen=True)
class UniquenessReport:
    witnesses: tuple[AmbiguityWitness, ...]
    combinations_total: int
    combinations_checked: int
    sampled: bool

    def ok(self) -> bool:
        return not self.witnesses


def _label_trie(g: KnowledgeGraph) -> dict:
    """Token trie over node labels; terminal key None holds the node id."""
    trie: dict = {}
    for node in g.nodes:
        cursor = trie
        for token in label_tokens(node.label):
            cursor = cursor.setdefault(token, {})
        cursor[None] = node.id
    return trie


def match_labels(tokens: Sequence[str], g: KnowledgeGraph) -> list[int]:
    """Node ids whose labels occur in the tokens, longest match first.

    Matched tokens are consumed, so a multi-word label never doubles as its
    constituent single-word labels.
    """
    trie = _label_trie(g)
    found: list[int] = []
    i = 0
    n = len(tokens)
    while i < n:
        cursor = trie
        best: tuple[int, int] | None = None  # (match end, node id)
        j = i
        while j < n and tokens[j] in cursor:
            cursor = cursor[tokens[j]]
            j += 1
            if None in cursor:
                best = (j, cursor[None])
        if best is None:
            i += 1
        else:
            found.append(best[1])
            i = best[0]
    return found


def _complete_paths_within(g: KnowledgeGraph, allowed: set[int]) -> list[tuple[int, ...]]:
    """Complete level-1..level-K paths using only nodes from ``allowed``."""
    depth = g.depth
    results: list[tuple[int, ...]] = []

    def walk(v: int, trail: list[int]) -> None:
        if g.node(v).level == depth:
            results.append(tuple(trail))
            return
        for e in g.out_edges(v):
            if e.dst in allowed:
                walk(e.dst, trail + [e.dst])

    for node in g.level_nodes(1):
        if node.id in allowed:
            walk(node.id, [node.id])
    return sorted(results)


def recover_path(sentence: str, g: KnowledgeGraph,
                 key: StegoKey | None = None) -> StegoPath:
    """Map a carrier sentence back to its unique complete path.

    When a key is supplied its pins are replayed to annotate the pinned
    hops, mirroring the embedder.
    """
    tokens = tokenize(sentence)
    matched = match_labels(tokens, g)
    if not matched:
        raise UnknownSentence(f"no graph labels found in {sentence!r}")
    matched_set = set(matched)
    candidates = _complete_paths_within(g, matched_set)
    if not candidates:
        levels = sorted({g.node(n).level for n in matched_set})
        raise NoPathFound(
            f"labels {sorted(g.node(n).label for n in matched_set)} (levels {levels}) "
            f"form no complete path"
        )
    if len(candidates) > 1:
        raise AmbiguousMatch(f"{len(candidates)} complete paths fit the matched labels")
    path = candidates[0]
    extras = matched_set - set(path)
    if extras:
        raise AmbiguousMatch(
            f"sentence mentions labels off the recovered path: "
            f"{sorted(g.node(n).label for n in extras)}"
        )
    pinned: frozenset[int] = frozenset()
    if key is not None:
        pinned = _replay_pins(path, g, _resolve_pins(g, key))
    return StegoPath(path, 0, pinned)


def validate_uniqueness(g: KnowledgeGraph, max_combinations: int = 10_000,
                        sample_size: int = 2_000, seed: int = 7) -> UniquenessReport:
    """Audit the two ways extraction can become ambiguous.

    (a) one label's token sequence contained in another's (or two labels
    tokenizing identically); (b) a one-node-per-level combination admitting
    more than one connected complete path. Combination checking is
    exhaustive up to ``max_combinations``, sampled beyond that.
    """
    witnesses: list[AmbiguityWitness] = []

    labels = [(node.label, tuple(label_tokens(node.label))) for node in g.nodes]
    for i, (label_a, tokens_a) in enumerate(labels):
        for label_b, tokens_b in labels[i + 1:]:
            short, long_ = sorted((tokens_a, tokens_b), key=len)
            if tokens_a == tokens_b:
                witnesses.append(AmbiguityWitness(
                    "duplicate_label_tokens", tuple(sorted((label_a, label_b)))))
            elif any(long_[k:k + len(short)] == short for k in range(len(long_) - len(short) + 1)):
                witnesses.append(AmbiguityWitness(
                    "label_containment", tuple(sorted((label_a, label_b)))))

    per_level = [g.level_nodes(k) for k in range(1, g.depth + 1)]
    total = 1
    for nodes in per_level:
        total *= len(nodes)
    sampled = total > max_combinations

    def check(combo: tuple) -> None:
        allowed = {node.id for node in combo}
        paths = _complete_paths_within(g, allowed)
        if len(paths) > 1:
            witnesses.append(AmbiguityWitness(
                "multiple_paths_for_label_set",
                tuple(node.label for node in combo),
                tuple(paths),
            ))

    if total == 0:
        checked = 0
    elif not sampled:
        checked = 0
        for combo in product(*per_level):
            check(combo)
            checked += 1
    else:
        rng = random.Random(seed)
        checked = min(sample_size, total)
        for _ in range(checked):
            check(tuple(rng.choice(nodes) for nodes in per_level))

    return UniquenessReport(tuple(witnesses), total, checked, sampled)
