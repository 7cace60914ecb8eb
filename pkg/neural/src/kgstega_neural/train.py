"""Seeded training loop: plain SGD with momentum 0.9 over the toy pairs."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import torch

from .data import Pair, Vocab, load_pairs
from .model import Graph2SeqModel, save_checkpoint


@dataclass
class TrainConfig:
    pairs_path: Path
    checkpoint_path: Path
    lam: float = 1.0
    learning_rate: float = 0.05
    momentum: float = 0.9
    epochs: int = 200
    seed: int = 0
    d: int = 32
    steps: int = 2
    coverage: str = "as_printed"
    log_every: int = 20


class EmptyTrainingSet(Exception):
    pass


@dataclass
class TrainResult:
    model: Graph2SeqModel
    losses: list[float]
    coverage_rate: float
    decodes: list[tuple[str, str]] = field(default_factory=list)


def coverage_rate(model: Graph2SeqModel, pairs: list[Pair]) -> tuple[float, list[tuple[str, str]]]:
    """Fraction of greedy decodes that contain every node label."""
    hits = 0
    decodes = []
    for pair in pairs:
        text = model.generate(pair.graph)
        tokens = text.split()
        ok = all(
            any(tokens[i:i + len(lab.split())] == lab.split() for i in range(len(tokens)))
            for lab in pair.labels
        )
        hits += ok
        decodes.append((pair.sentence, text))
    return hits / len(pairs), decodes


def train(config: TrainConfig) -> TrainResult:
    pairs = load_pairs(config.pairs_path)
    if not pairs:
        raise EmptyTrainingSet(str(config.pairs_path))

    torch.manual_seed(config.seed)
    vocab = Vocab.from_pairs(pairs)
    model = Graph2SeqModel(vocab, d=config.d, steps=config.steps, seed=config.seed)
    optim = torch.optim.SGD(model.parameters(), lr=config.learning_rate,
                            momentum=config.momentum)

    losses = []
    for epoch in range(config.epochs):
        optim.zero_grad()
        loss, details = model.loss(pairs, lam=config.lam, coverage=config.coverage)
        loss.backward()
        optim.step()
        losses.append(float(loss.detach()))
        if config.log_every and (epoch % config.log_every == 0 or epoch == config.epochs - 1):
            print(f"epoch {epoch:4d}  loss {float(loss):10.4f}  "
                  f"nll {details['nll']:10.4f}  penalty {details['penalty']:.6f}")

    model.eval()
    rate, decodes = coverage_rate(model, pairs)
    print(f"greedy label coverage on the training set: {rate:.3f}")
    if config.checkpoint_path:
        config.checkpoint_path.parent.mkdir(parents=True, exist_ok=True)
        save_checkpoint(model, config.checkpoint_path)
    return TrainResult(model, losses, rate, decodes)
