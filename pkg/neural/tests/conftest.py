from pathlib import Path

import pytest

from kgstega_neural import Graph2SeqModel, Vocab, load_pairs

DATA = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture(scope="session")
def toy_pairs():
    return load_pairs(DATA / "toy_pairs.jsonl")


@pytest.fixture(scope="session")
def toy_pairs_10_path():
    return DATA / "toy_pairs_10.jsonl"


@pytest.fixture(scope="session")
def toy_pairs_10(toy_pairs_10_path):
    return load_pairs(toy_pairs_10_path)


@pytest.fixture
def small_model(toy_pairs):
    vocab = Vocab.from_pairs(toy_pairs)
    return Graph2SeqModel(vocab, d=6, steps=2, seed=1)


@pytest.fixture
def demo_path_graph(toy_pairs):
    return toy_pairs[0].graph
