"""Graph-to-sentence model with a copy mechanism.

Encoder: gated recurrent updates over node and edge states (input, forget
and output gates with a cell state per node; edge states updated from the
source node), mean-pooling edge states incident to a node. Attention over
all (edge, node, step) pairs pools everything into one semantic vector z.
Decoder: an LSTM initialized from z; at each step a switch theta mixes the
vocabulary distribution with a copy distribution over the input graph's
node labels, so the final distribution sums to one over words and labels.

Everything runs in float64 on CPU and is seeded, so training and decoding
are bit-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Sequence

import torch
from torch import Tensor, nn

from .data import BOS, EOS, UNK, Pair, Vocab, segment_units


class TargetOOV(Exception):
    """Target unit neither in the vocabulary nor a graph label."""


@dataclass
class GraphState:
    """Encoder output: final node states plus every (edge, node, step) pair."""

    node_h: Tensor            # n_nodes x d, final step
    pair_x: Tensor            # n_pairs x d, edge states across steps
    pair_h: Tensor            # n_pairs x d, matching source-node states
    labels: list[str]         # node labels in graph order
    steps: int


class Graph2SeqModel(nn.Module):
    def __init__(self, vocab: Vocab, d: int = 24, steps: int = 2, seed: int = 0,
                 dtype: torch.dtype = torch.float64):
        super().__init__()
        self.vocab = vocab
        self.d = d
        self.steps = steps
        self.dtype = dtype
        gen = torch.Generator().manual_seed(seed)

        def mat(rows: int, cols: int) -> nn.Parameter:
            scale = 1.0 / math.sqrt(cols)
            return nn.Parameter(
                (torch.rand(rows, cols, generator=gen, dtype=dtype) * 2 - 1) * scale
            )

        def vec(rows: int) -> nn.Parameter:
            return nn.Parameter(torch.zeros(rows, dtype=dtype))

        v = len(vocab)
        self.emb = mat(v, d)
        # node/edge state updates: gates read [h, pooled edge state]
        self.W_i, self.b_i = mat(d, 2 * d), vec(d)
        self.W_f, self.b_f = mat(d, 2 * d), vec(d)
        self.W_c, self.b_c = mat(d, 2 * d), vec(d)
        self.W_o, self.b_o = mat(d, 2 * d), vec(d)
        self.W_l, self.b_l = mat(d, 2 * d), vec(d)
        # attention scorer: one hidden layer over [x, h]
        self.W_a, self.b_a = mat(d, 2 * d), vec(d)
        self.v_a = mat(1, d)
        # z initializes the decoder recurrent state
        self.W_zh, self.b_zh = mat(d, 2 * d), vec(d)
        self.W_zc, self.b_zc = mat(d, 2 * d), vec(d)
        # decoder LSTM cell (input d, hidden d)
        self.W_dec, self.b_dec = mat(4 * d, 2 * d), vec(4 * d)
        # vocabulary head, copy scorer, and the generate/copy switch
        self.W_v, self.b_v = mat(v, d), vec(v)
        self.W_cp = mat(d, d)
        self.w_t, self.b_t = mat(1, d), vec(1)

    # --- embeddings ------------------------------------------------------------

    def embed_phrase(self, phrase: str) -> Tensor:
        ids = [self.vocab.id(w) for w in phrase.split()] or [self.vocab.id(UNK)]
        return self.emb[ids].mean(dim=0)

    # --- encoder ---------------------------------------------------------------

    def encode(self, graph: dict[str, Any], steps: int | None = None) -> GraphState:
        steps = self.steps if steps is None else steps
        nodes = graph["nodes"]
        edges = graph["edges"]
        index = {n["id"]: k for k, n in enumerate(nodes)}
        labels = [n["label"] for n in nodes]
        n = len(nodes)

        h = torch.stack([self.embed_phrase(nd["label"]) for nd in nodes])
        if edges:
            x = torch.stack([self.embed_phrase(str(e["rel"])) for e in edges])
            src = torch.tensor([index[e["src"]] for e in edges])
            incident = torch.zeros(n, len(edges), dtype=self.dtype)
            for j, e in enumerate(edges):
                incident[index[e["src"]], j] = 1.0
                incident[index[e["dst"]], j] = 1.0
            degree = incident.sum(dim=1, keepdim=True).clamp(min=1.0)
            pool = incident / degree
        else:
            x = torch.zeros(0, self.d, dtype=self.dtype)
            src = torch.zeros(0, dtype=torch.long)
            pool = torch.zeros(n, 0, dtype=self.dtype)

        cell = torch.zeros(n, self.d, dtype=self.dtype)
        pair_x: list[Tensor] = []
        pair_h: list[Tensor] = []
        for _ in range(steps):
            xbar = pool @ x if len(edges) else torch.zeros(n, self.d, dtype=self.dtype)
            cat = torch.cat([h, xbar], dim=1)
            gate_i = torch.sigmoid(cat @ self.W_i.T + self.b_i)
            gate_f = torch.sigmoid(cat @ self.W_f.T + self.b_f)
            gate_o = torch.sigmoid(cat @ self.W_o.T + self.b_o)
            cell = gate_f * cell + gate_i * torch.tanh(cat @ self.W_c.T + self.b_c)
            h = gate_o * torch.tanh(cell)
            if len(edges):
                cat_e = torch.cat([h[src], x], dim=1)
                x = cat_e @ self.W_l.T + self.b_l
                pair_x.append(x)
                pair_h.append(h[src])
            else:
                # degenerate single-node graphs still need attention targets
                pair_x.append(torch.zeros(n, self.d, dtype=self.dtype))
                pair_h.append(h)

        return GraphState(
            node_h=h,
            pair_x=torch.cat(pair_x) if pair_x else torch.zeros(0, self.d, dtype=self.dtype),
            pair_h=torch.cat(pair_h) if pair_h else torch.zeros(0, self.d, dtype=self.dtype),
            labels=labels,
            steps=steps,
        )

    # --- attention pooling -------------------------------------------------------

    def attention_weights(self, state: GraphState) -> Tensor:
        pairs = torch.cat([state.pair_x, state.pair_h], dim=1)
        scores = (torch.tanh(pairs @ self.W_a.T + self.b_a) @ self.v_a.T).squeeze(1)
        return torch.softmax(scores, dim=0)

    def attention_pool(self, state: GraphState) -> tuple[Tensor, Tensor]:
        """Returns (z, alpha); alpha sums to one exactly (post-softmax)."""
        alpha = self.attention_weights(state)
        pairs = torch.cat([state.pair_x, state.pair_h], dim=1)
        z = (alpha.unsqueeze(1) * pairs).sum(dim=0)
        return z, alpha

    # --- decoder -----------------------------------------------------------------

    def _init_decoder(self, z: Tensor) -> tuple[Tensor, Tensor]:
        return (
            torch.tanh(self.W_zh @ z + self.b_zh),
            torch.tanh(self.W_zc @ z + self.b_zc),
        )

    def _cell(self, inp: Tensor, hc: tuple[Tensor, Tensor]) -> tuple[Tensor, Tensor]:
        h, c = hc
        gates = self.W_dec @ torch.cat([inp, h]) + self.b_dec
        d = self.d
        i = torch.sigmoid(gates[:d])
        f = torch.sigmoid(gates[d:2 * d])
        g = torch.tanh(gates[2 * d:3 * d])
        o = torch.sigmoid(gates[3 * d:])
        c = f * c + i * g
        return o * torch.tanh(c), c

    def _decoder_state(self, prefix: Sequence[str], z: Tensor) -> Tensor:
        hc = self._init_decoder(z)
        for unit in [BOS, *prefix]:
            hc = self._cell(self.embed_phrase(unit), hc)
        return hc[0]

    def decode_step(self, prefix: Sequence[str], z: Tensor,
                    state: GraphState, theta_override: float | None = None,
                    ) -> tuple[dict[str, Tensor], Tensor, Tensor]:
        """Distribution over vocabulary words plus this graph's labels.

        Returns (unit -> probability, theta, copy attention). The mixture
        theta * p_vocab + (1 - theta) * p_copy sums to one by construction.
        """
        s = self._decoder_state(prefix, z)

        p_vocab = torch.softmax(self.W_v @ s + self.b_v, dim=0)
        copy_scores = state.node_h @ (self.W_cp @ s)
        p_copy = torch.softmax(copy_scores, dim=0)
        theta = torch.sigmoid(self.w_t @ s + self.b_t).squeeze(0)
        if theta_override is not None:
            theta = torch.tensor(theta_override, dtype=self.dtype)

        probs: dict[str, Tensor] = {}
        for idx, word in enumerate(self.vocab.words):
            probs[word] = theta * p_vocab[idx]
        for k, label in enumerate(state.labels):
            extra = (1 - theta) * p_copy[k]
            probs[label] = probs[label] + extra if label in probs else extra
        return probs, theta, p_copy

    # --- loss ----------------------------------------------------------------------

    def loss(self, batch: Sequence[Pair], lam: float = 1.0,
             coverage: str = "as_printed") -> tuple[Tensor, dict[str, float]]:
        """Negative log-likelihood of the target units plus the attention
        penalty. ``coverage`` selects the penalty form: "as_printed" uses
        the pooled attention weights (identically zero after softmax, but
        computed and reported), "per_step" sums (1 - total copy attention
        per node over decode steps)^2.
        """
        nll = torch.zeros((), dtype=self.dtype)
        penalty = torch.zeros((), dtype=self.dtype)
        units_count = 0
        for pair in batch:
            state = self.encode(pair.graph)
            z, alpha = self.attention_pool(state)
            units = segment_units(pair.sentence, state.labels) + [EOS]
            beta_total = torch.zeros(len(state.labels), dtype=self.dtype)
            for t, unit in enumerate(units):
                if " " not in unit and unit not in self.vocab and unit not in state.labels:
                    raise TargetOOV(unit)
                probs, _, beta = self.decode_step(units[:t], z, state)
                if unit not in probs:
                    raise TargetOOV(unit)
                nll = nll - torch.log(probs[unit])
                beta_total = beta_total + beta
                units_count += 1
            if coverage == "as_printed":
                penalty = penalty + (1 - alpha.sum()) ** 2
            elif coverage == "per_step":
                penalty = penalty + ((1 - beta_total) ** 2).sum()
            else:
                raise ValueError(f"unknown coverage variant {coverage!r}")
        total = nll + lam * penalty
        details = {
            "nll": float(nll.detach()),
            "penalty": float(penalty.detach()),
            "units": units_count,
        }
        return total, details

    # --- generation -------------------------------------------------------------------

    @torch.no_grad()
    def generate(self, graph: dict[str, Any], max_len: int = 30,
                 temperature: float = 0.0,
                 generator: torch.Generator | None = None) -> str:
        """Greedy (temperature 0) or sampled decode until the end marker."""
        state = self.encode(graph)
        z, _ = self.attention_pool(state)
        prefix: list[str] = []
        for _ in range(max_len):
            probs, _, _ = self.decode_step(prefix, z, state)
            units = list(probs.keys())
            values = torch.stack([probs[u] for u in units])
            if temperature <= 0:
                unit = units[int(values.argmax())]
            else:
                logits = torch.log(values.clamp(min=1e-300)) / temperature
                weights = torch.softmax(logits, dim=0)
                unit = units[int(torch.multinomial(weights, 1, generator=generator))]
            if unit == EOS:
                break
            if unit in (BOS, UNK):
                continue
            prefix.append(unit)
        return " ".join(prefix)


def save_checkpoint(model: Graph2SeqModel, path) -> None:
    torch.save({
        "words": model.vocab.words,
        "d": model.d,
        "steps": model.steps,
        "state": model.state_dict(),
    }, path)


def load_checkpoint(path) -> Graph2SeqModel:
    blob = torch.load(path, weights_only=False)
    vocab = Vocab(blob["words"])
    model = Graph2SeqModel(vocab, d=blob["d"], steps=blob["steps"])
    model.load_state_dict(blob["state"])
    model.eval()
    return model
