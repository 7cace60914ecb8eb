"""Measurement stack: embedding rate (measured and as-printed variants),
n-gram language-model perplexity, and BLEU / ROUGE-L relevance scoring.

Carrier size counts 8 bits per letter: B(s) = 8 * sum of alphabetic
characters per word, whitespace and punctuation excluded.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

from .codec import StegoPath
from .errors import (
    EmptyCorpus,
    EmptyInput,
    EmptyReference,
    EmptySentence,
    LengthMismatch,
)
from .graph import KnowledgeGraph
from .realize import StegoSentence
from .text import tokenize

Sentences = Sequence[Union[str, StegoSentence]]

START_TOKEN = "<s>"
UNK_TOKEN = "<unk>"


def _texts(sentences: Sentences) -> list[str]:
    return [s.text if isinstance(s, StegoSentence) else s for s in sentences]


# --- carrier size ---------------------------------------------------------------


@dataclass(frozen=True)
class SentenceStats:
    word_count: int
    letters_per_word: tuple[int, ...]

    @property
    def byte_bits(self) -> int:
        """Bits the sentence occupies: 8 per letter."""
        return 8 * sum(self.letters_per_word)


def sentence_stats(sentence: str) -> SentenceStats:
    tokens = tokenize(sentence)
    letters = tuple(sum(1 for ch in tok if ch.isalpha()) for tok in tokens)
    return SentenceStats(len(tokens), letters)


# --- embedding rate ---------------------------------------------------------------


@dataclass(frozen=True)
class RateReport:
    measured_bpw: float
    literal_paper_rate: float | None
    total_payload_bits: int
    total_carrier_bits: int
    per_sentence: tuple[tuple[int, int], ...]  # (payload bits, carrier bits)


def measured_rate(paths: Sequence[StegoPath], sentences: Sentences) -> RateReport:
    """Actual embedded bits divided by carrier bits, as a ratio of sums."""
    texts = _texts(sentences)
    if len(paths) != len(texts):
        raise LengthMismatch(f"{len(paths)} paths vs {len(texts)} sentences")
    pairs = tuple(
        (p.bits_consumed, sentence_stats(t).byte_bits) for p, t in zip(paths, texts)
    )
    total_bits = sum(b for b, _ in pairs)
    total_carrier = sum(c for _, c in pairs)
    measured = total_bits / total_carrier if total_carrier else 0.0
    return RateReport(measured, None, total_bits, total_carrier, pairs)


def literal_paper_rate(g: KnowledgeGraph, paths: Sequence[StegoPath],
                       sentences: Sentences) -> float:
    """The printed rate formula: per sentence, sum of out-edge COUNTS at each
    non-terminal path node over the carrier bits, averaged over sentences.

    This counts |E_out| where the measured rate counts actual codeword bits,
    so a single-out-edge node contributes 1 here but embeds 0 bits; reports
    should present both figures side by side.
    """
    texts = _texts(sentences)
    if len(paths) != len(texts):
        raise LengthMismatch(f"{len(paths)} paths vs {len(texts)} sentences")
    if not paths:
        return 0.0
    ratios = []
    for path, text in zip(paths, texts):
        numerator = sum(len(g.out_edges(nid)) for nid in path.nodes[:-1])
        carrier = sentence_stats(text).byte_bits
        ratios.append(numerator / carrier if carrier else 0.0)
    return sum(ratios) / len(ratios)


def rate_report(g: KnowledgeGraph, paths: Sequence[StegoPath],
                sentences: Sentences) -> RateReport:
    base = measured_rate(paths, sentences)
    return RateReport(
        base.measured_bpw,
        literal_paper_rate(g, paths, sentences),
        base.total_payload_bits,
        base.total_carrier_bits,
        base.per_sentence,
    )


# --- n-gram language model ----------------------------------------------------------


class LanguageModel:
    """Add-k smoothed order-n model with start-of-sentence padding.

    The vocabulary is the set of corpus token types; conditional
    probabilities over it sum to 1 exactly. Unseen query tokens map to a
    reserved out-of-vocabulary symbol that receives the add-k floor mass.
    """

    def __init__(self, order: int, k: float, counts: dict[tuple, Counter],
                 totals: dict[tuple, int], vocab: frozenset[str]):
        self.order = order
        self.k = k
        self._counts = counts
        self._totals = totals
        self.vocab = vocab

    @property
    def vocab_size(self) -> int:
        return len(self.vocab)

    def prob(self, word: str, context: Sequence[str]) -> float:
        """p(word | last order-1 context tokens)."""
        ctx = self._context(context)
        total = self._totals.get(ctx, 0)
        count = self._counts.get(ctx, {}).get(word, 0) if word in self.vocab else 0
        return (count + self.k) / (total + self.k * self.vocab_size)

    def _context(self, context: Sequence[str]) -> tuple:
        need = self.order - 1
        if need == 0:
            return ()
        tail = [tok if tok in self.vocab else UNK_TOKEN for tok in context[-need:]]
        return tuple([START_TOKEN] * (need - len(tail)) + tail)

    def log2_prob(self, tokens: Sequence[str]) -> float:
        total = 0.0
        for i, token in enumerate(tokens):
            total += math.log2(self.prob(token, tokens[:i]))
        return total


def train_lm(corpus: Iterable[str], order: int = 3, k: float = 0.01) -> LanguageModel:
    """Count n-grams over the corpus; deterministic given its inputs."""
    if order < 1:
        raise ValueError("order must be >= 1")
    if k <= 0:
        raise ValueError("smoothing constant must be > 0")
    counts: dict[tuple, Counter] = {}
    totals: dict[tuple, int] = {}
    vocab: set[str] = set()
    seen_any = False
    for sentence in corpus:
        tokens = tokenize(sentence)
        if not tokens:
            continue
        seen_any = True
        vocab.update(tokens)
        history = [START_TOKEN] * (order - 1)
        for token in tokens:
            ctx = tuple(history[-(order - 1):]) if order > 1 else ()
            counts.setdefault(ctx, Counter())[token] += 1
            totals[ctx] = totals.get(ctx, 0) + 1
            history.append(token)
    if not seen_any:
        raise EmptyCorpus("corpus contains no tokens")
    return LanguageModel(order, k, counts, totals, frozenset(vocab))


def perplexity(lm: LanguageModel, sentence: str) -> float:
    """2 to the negative mean per-word log2 probability."""
    tokens = tokenize(sentence)
    if not tokens:
        raise EmptySentence(f"no tokens in {sentence!r}")
    return 2 ** (-lm.log2_prob(tokens) / len(tokens))


# --- relevance metrics ----------------------------------------------------------------


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu(candidate: str, references: Sequence[str], max_n: int = 2) -> float:
    """Modified n-gram precision with brevity penalty, geometric mean to max_n."""
    if not references:
        raise EmptyReference("at least one reference required")
    cand = tokenize(candidate)
    refs = [tokenize(r) for r in references]
    if not cand:
        return 0.0

    log_sum = 0.0
    for n in range(1, max_n + 1):
        cand_counts = _ngrams(cand, n)
        total = sum(cand_counts.values())
        if total == 0:
            return 0.0
        clipped = 0
        for gram, count in cand_counts.items():
            best = max(_ngrams(ref, n).get(gram, 0) for ref in refs)
            clipped += min(count, best)
        if clipped == 0:
            return 0.0
        log_sum += math.log(clipped / total)
    precision = math.exp(log_sum / max_n)

    c = len(cand)
    r = min((len(ref) for ref in refs), key=lambda length: (abs(length - c), length))
    brevity = 1.0 if c > r else math.exp(1 - r / c)
    return precision * brevity


def _lcs_len(a: Sequence[str], b: Sequence[str]) -> int:
    prev = [0] * (len(b) + 1)
    for tok in a:
        cur = [0]
        for j, other in enumerate(b, start=1):
            cur.append(prev[j - 1] + 1 if tok == other else max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def rouge_l(candidate: str, reference: str, beta: float = 1.2) -> float:
    """LCS-based F-measure; beta weights recall (1.2 by convention here)."""
    cand = tokenize(candidate)
    ref = tokenize(reference)
    if not cand or not ref:
        raise EmptyInput("candidate and reference must both tokenize to >= 1 token")
    lcs = _lcs_len(cand, ref)
    if lcs == 0:
        return 0.0
    precision = lcs / len(cand)
    recall = lcs / len(ref)
    return (1 + beta ** 2) * recall * precision / (recall + beta ** 2 * precision)
