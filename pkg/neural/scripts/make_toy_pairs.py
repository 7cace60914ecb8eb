"""Build the toy training set by driving the kgstega CLI.

Each run of ``kgstega embed`` writes carrier sentences plus a sidecar of
path-interchange objects; pairing them line-to-line gives (graph, sentence)
training examples. Running once per template file realizes every walk in
every surface form. Only the CLI and its file formats are touched here.
"""

from __future__ import annotations

import json
import random
import subprocess
import sys
import tempfile
from pathlib import Path

OUT_DIR = Path(__file__).resolve().parent.parent / "data"


def fixture(name: str) -> Path:
    out = subprocess.run(
        [sys.executable, "-c",
         f"from kgstega.fixtures import {name}; print({name}())"],
        capture_output=True, text=True, check=True,
    )
    return Path(out.stdout.strip())


def main() -> int:
    nodes = fixture("demo_nodes_path")
    edges = fixture("demo_edges_path")
    template_lines = fixture("templates_path").read_text().strip().split("\n")

    rng = random.Random(7)
    pairs: dict[tuple, dict] = {}
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        key = tmp / "key.bin"
        key.write_bytes(b"toy-pairs-key-0123456789")
        for t_index, line in enumerate(template_lines):
            template_file = tmp / f"t{t_index}.tsv"
            template_file.write_text(line + "\n", encoding="utf-8")
            for round_no in range(40):
                payload = tmp / "payload.bin"
                payload.write_bytes(bytes(rng.getrandbits(8) for _ in range(6)))
                carrier = tmp / "carrier.txt"
                subprocess.run(
                    ["kgstega", "embed",
                     "--nodes", str(nodes), "--edges", str(edges),
                     "--templates", str(template_file),
                     "--key-file", str(key),
                     "--in", str(payload), "--out", str(carrier)],
                    check=True,
                )
                sentences = carrier.read_text().strip().split("\n")
                sidecar = json.loads((tmp / "carrier.txt.paths.json").read_text())
                for graph, sentence in zip(sidecar, sentences):
                    graph = dict(graph)
                    graph["pinned_hops"] = []  # training data is pin-agnostic
                    pairs[(tuple(graph["order"]), sentence)] = {
                        "graph": graph, "sentence": sentence,
                    }

    ordered = [pairs[k] for k in sorted(pairs)]
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    (OUT_DIR / "toy_pairs.jsonl").write_text(
        "\n".join(json.dumps(p, ensure_ascii=False) for p in ordered) + "\n",
        encoding="utf-8",
    )
    # fixed 10-pair subset for the overfit check: every walk appears at least once
    by_order: dict[tuple, list[dict]] = {}
    for p in ordered:
        by_order.setdefault(tuple(p["graph"]["order"]), []).append(p)
    subset: list[dict] = [variants[0] for variants in by_order.values()]
    for variants in by_order.values():
        for extra in variants[1:]:
            if len(subset) >= 10:
                break
            subset.append(extra)
    subset = subset[:10]
    (OUT_DIR / "toy_pairs_10.jsonl").write_text(
        "\n".join(json.dumps(p, ensure_ascii=False) for p in subset) + "\n",
        encoding="utf-8",
    )
    print(f"wrote {len(ordered)} pairs, subset of {len(subset)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
