"""Training pairs and the unit vocabulary.

A pair couples a path-interchange graph object (the wire format produced by
the embedder) with a target sentence. Targets are segmented into units:
graph labels become single copyable units (longest match first), everything
else stays a plain word. Unit sequences end with an explicit end marker.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"


@dataclass(frozen=True)
class Pair:
    graph: dict[str, Any]
    sentence: str

    @property
    def labels(self) -> list[str]:
        return [n["label"] for n in self.graph["nodes"]]


def load_pairs(path: str | Path) -> list[Pair]:
    pairs = []
    for line in Path(path).read_text(encoding="utf-8").split("\n"):
        if not line.strip():
            continue
        obj = json.loads(line)
        pairs.append(Pair(obj["graph"], obj["sentence"]))
    return pairs


def segment_units(sentence: str, labels: Sequence[str]) -> list[str]:
    """Split a sentence into units, merging multi-word labels into one unit."""
    tokens = sentence.lower().split()
    phrases = sorted((label.split() for label in labels), key=len, reverse=True)
    units: list[str] = []
    i = 0
    while i < len(tokens):
        hit = None
        for phrase in phrases:
            if tokens[i:i + len(phrase)] == phrase:
                hit = phrase
                break
        if hit:
            units.append(" ".join(hit))
            i += len(hit)
        else:
            units.append(tokens[i])
            i += 1
    return units


class Vocab:
    """Word-level vocabulary over single tokens (labels embed as the mean
    of their word embeddings, so multi-word labels need no entry)."""

    def __init__(self, words: Sequence[str]):
        specials = [BOS, EOS, UNK]
        uniq = sorted(set(words) - set(specials))
        self.words = specials + uniq
        self.index = {w: i for i, w in enumerate(self.words)}

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self.index

    def id(self, word: str) -> int:
        return self.index.get(word, self.index[UNK])

    def word(self, idx: int) -> str:
        return self.words[idx]

    @classmethod
    def from_pairs(cls, pairs: Sequence[Pair]) -> "Vocab":
        words: list[str] = []
        for pair in pairs:
            words.extend(pair.sentence.lower().split())
            for node in pair.graph["nodes"]:
                words.extend(node["label"].split())
            for edge in pair.graph["edges"]:
                words.extend(str(edge["rel"]).split())
        return cls(words)
