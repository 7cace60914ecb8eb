"""Report rendering for the CLI: delimited summaries plus matplotlib figures."""

from __future__ import annotations

from pathlib import Path
from typing import Any, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


def _config_names(rows: Sequence[dict[str, Any]]) -> list[str]:
    names = []
    for row in rows:
        pins = row.get("pins") or []
        names.append("no pins" if not pins else " + ".join(f"{lv}:{lb}" for lv, lb in pins))
    return names


def write_eval_tsv(rows: Sequence[dict[str, Any]], path: Path) -> None:
    columns = ["pins", "measured_bpw", "literal_paper_rate", "mean_perplexity",
               "bleu1", "bleu2", "rouge_l", "n_sentences"]
    lines = ["\t".join(columns)]
    for name, row in zip(_config_names(rows), rows):
        metrics = row["metrics"]
        lines.append("\t".join([name] + [str(metrics[c]) for c in columns[1:]]))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_roundtrip_tsv(rows: Sequence[dict[str, Any]], path: Path) -> None:
    columns = ["pins", "trials", "passed", "failed", "measured_bpw"]
    lines = ["\t".join(columns)]
    for name, row in zip(_config_names(rows), rows):
        lines.append("\t".join([name] + [str(row[c]) for c in columns[1:]]))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def rate_figure(rows: Sequence[dict[str, Any]], path: Path) -> None:
    """Bar chart of measured vs as-printed embedding rate per pin config."""
    names = _config_names(rows)
    measured = [row["metrics"]["measured_bpw"] for row in rows]
    literal = [row["metrics"]["literal_paper_rate"] for row in rows]
    x = range(len(names))
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar([i - 0.2 for i in x], measured, width=0.4, label="measured")
    ax.bar([i + 0.2 for i in x], literal, width=0.4, label="edge-count formula")
    ax.set_xticks(list(x))
    ax.set_xticklabels(names, rotation=15)
    ax.set_ylabel("bits per carrier bit")
    ax.set_title("embedding rate by pin configuration")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def perplexity_figure(rows: Sequence[dict[str, Any]], training_ppl: float, path: Path) -> None:
    names = _config_names(rows) + ["training"]
    values = [row["metrics"]["mean_perplexity"] for row in rows] + [training_ppl]
    fig, ax = plt.subplots(figsize=(6, 4))
    colors = ["tab:blue"] * (len(names) - 1) + ["tab:gray"]
    ax.bar(names, values, color=colors)
    ax.set_ylabel("mean perplexity")
    ax.set_title("carrier quality vs training sentences")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def roundtrip_figure(rows: Sequence[dict[str, Any]], path: Path) -> None:
    names = _config_names(rows)
    rates = [row["measured_bpw"] for row in rows]
    failures = [row["failed"] for row in rows]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8, 4))
    ax1.bar(names, rates)
    ax1.set_ylabel("measured bpw")
    ax1.set_title("rate per pin configuration")
    ax1.tick_params(axis="x", rotation=15)
    ax2.bar(names, failures, color="tab:red")
    ax2.set_ylabel("failed trials")
    ax2.set_title("round-trip failures")
    ax2.tick_params(axis="x", rotation=15)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
