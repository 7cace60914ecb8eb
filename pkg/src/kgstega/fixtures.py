"""Paths to the packaged demo fixture (graph, templates, corpus)."""

from __future__ import annotations

from importlib import resources
from pathlib import Path


def _data_path(name: str) -> Path:
    return Path(resources.files("kgstega").joinpath("data", name))


def demo_nodes_path() -> Path:
    return _data_path("demo_nodes.tsv")


def demo_edges_path() -> Path:
    return _data_path("demo_edges.tsv")


def templates_path() -> Path:
    return _data_path("templates.tsv")


def corpus_path() -> Path:
    return _data_path("corpus.txt")
