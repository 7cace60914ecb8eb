"""Shared tokenization.

Both sides of the channel (sentence realization and path recovery) must
tokenize identically or extraction breaks, so the rule lives in one place:
lowercase, split on Unicode whitespace, strip leading/trailing punctuation
from each token, drop empties. Internal punctuation is preserved, so the
surface form "fuel-consumption" stays one token and does not match the
two-token label "fuel consumption".
"""

from __future__ import annotations

import unicodedata
from typing import Sequence


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def tokenize(sentence: str) -> list[str]:
    """Split a sentence into lowercase tokens; deterministic by construction."""
    tokens = []
    for raw in sentence.lower().split():
        start = 0
        end = len(raw)
        while start < end and _is_punct(raw[start]):
            start += 1
        while end > start and _is_punct(raw[end - 1]):
            end -= 1
        if end > start:
            tokens.append(raw[start:end])
    return tokens


def contains_contiguous(tokens: Sequence[str], phrase: Sequence[str]) -> bool:
    """True iff ``phrase`` occurs as a contiguous run inside ``tokens``."""
    n = len(phrase)
    if n == 0 or n > len(tokens):
        return False
    first = phrase[0]
    for i in range(len(tokens) - n + 1):
        if tokens[i] == first and list(tokens[i:i + n]) == list(phrase):
            return True
    return False


def label_tokens(label: str) -> list[str]:
    """Token sequence of a node label (labels are stored space-separated)."""
    return label.split()
