"""Trainable graph-to-sentence generator for the kgstega realizer contract."""

from .data import Pair, Vocab, load_pairs, segment_units
from .model import Graph2SeqModel, GraphState, TargetOOV, load_checkpoint, save_checkpoint
from .train import TrainConfig, TrainResult, coverage_rate, train

__all__ = [
    "Graph2SeqModel",
    "GraphState",
    "Pair",
    "TargetOOV",
    "TrainConfig",
    "TrainResult",
    "Vocab",
    "coverage_rate",
    "load_checkpoint",
    "load_pairs",
    "save_checkpoint",
    "segment_units",
    "train",
]
