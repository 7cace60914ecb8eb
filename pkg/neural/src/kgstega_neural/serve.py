"""Realizer plug-in endpoint: path-interchange JSON in, candidate lines out."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import torch

from .model import load_checkpoint


def serve(checkpoint: Path, max_candidates: int = 5, temperature: float = 0.7,
          seed: int = 0, stdin=None, stdout=None) -> int:
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    if not Path(checkpoint).exists():
        print(f"checkpoint not found: {checkpoint}", file=sys.stderr)
        return 1
    try:
        graph = json.loads(stdin.read())
        graph["nodes"]
        graph["order"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        print(f"bad path-interchange JSON: {exc}", file=sys.stderr)
        return 1

    model = load_checkpoint(checkpoint)
    seen: set[str] = set()
    candidates = [model.generate(graph)]  # greedy first
    gen = torch.Generator().manual_seed(seed)
    while len(candidates) < max_candidates:
        candidates.append(model.generate(graph, temperature=temperature, generator=gen))
    for text in candidates:
        if text and text not in seen:
            seen.add(text)
            print(text, file=stdout)
    return 0
