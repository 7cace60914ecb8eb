"""kgstega: hide bitstreams as coded paths through a leveled knowledge graph."""

from .codec import (
    CapacityReport,
    EdgeCodebook,
    Payload,
    StegoKey,
    StegoPath,
    build_codebook,
    capacity_report,
    embed_message,
    embed_path,
    extract_message,
    extract_path,
    start_codebook,
)
from .graph import (
    Edge,
    KnowledgeGraph,
    Node,
    enumerate_paths,
    estimate_edge_weights,
    load_graph,
    validate_hierarchy,
    viable_subgraph,
)

__all__ = [
    "CapacityReport",
    "Edge",
    "EdgeCodebook",
    "KnowledgeGraph",
    "Node",
    "Payload",
    "StegoKey",
    "StegoPath",
    "build_codebook",
    "capacity_report",
    "embed_message",
    "embed_path",
    "enumerate_paths",
    "estimate_edge_weights",
    "extract_message",
    "extract_path",
    "load_graph",
    "start_codebook",
    "validate_hierarchy",
    "viable_subgraph",
]

__version__ = "0.1.0"
