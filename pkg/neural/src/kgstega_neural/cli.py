"""Command line: train on toy pairs, or serve the realizer plug-in contract."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .serve import serve
from .train import TrainConfig, train


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="kgstega-neural")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="fit the generator on (graph, sentence) pairs")
    p_train.add_argument("--pairs", type=Path, required=True, help="JSONL of {graph, sentence}")
    p_train.add_argument("--checkpoint", type=Path, required=True)
    p_train.add_argument("--epochs", type=int, default=200)
    p_train.add_argument("--lr", type=float, default=0.05)
    p_train.add_argument("--momentum", type=float, default=0.9)
    p_train.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p_train.add_argument("--d", type=int, default=32)
    p_train.add_argument("--steps", type=int, default=2)
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--coverage", choices=["as_printed", "per_step"], default="as_printed")

    p_serve = sub.add_parser("serve", help="read path JSON on stdin, write candidates")
    p_serve.add_argument("--checkpoint", type=Path, required=True)
    p_serve.add_argument("--max-candidates", type=int, default=5)
    p_serve.add_argument("--temperature", type=float, default=0.7)
    p_serve.add_argument("--seed", type=int, default=0)

    args = parser.parse_args(argv)
    if args.command == "train":
        config = TrainConfig(
            pairs_path=args.pairs,
            checkpoint_path=args.checkpoint,
            lam=args.lam,
            learning_rate=args.lr,
            momentum=args.momentum,
            epochs=args.epochs,
            seed=args.seed,
            d=args.d,
            steps=args.steps,
            coverage=args.coverage,
        )
        train(config)
        return 0
    return serve(args.checkpoint, args.max_candidates, args.temperature, args.seed)


if __name__ == "__main__":
    sys.exit(main())
