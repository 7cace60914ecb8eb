"""Path-interchange JSON: the wire format between codec, realizer, extractor
and any external sentence generator.

Object shape (field order fixed, UTF-8):
``{"nodes": [{"id", "label", "level"}...], "edges": [{"src", "rel", "dst"}...],
"order": [node ids], "pinned_hops": [hop indices]}``
"""

from __future__ import annotations

import json
from typing import Any

from .codec import StegoPath
from .errors import EdgeNotInGraph
from .graph import KnowledgeGraph


def path_to_obj(p: StegoPath, g: KnowledgeGraph) -> dict[str, Any]:
    nodes = [
        {"id": nid, "label": g.node(nid).label, "level": g.node(nid).level}
        for nid in p.nodes
    ]
    edges = []
    for u, v in zip(p.nodes, p.nodes[1:]):
        edge = g.edge(u, v)
        if edge is None:
            raise EdgeNotInGraph(f"no edge {u}->{v}")
        edges.append({"src": u, "rel": edge.relation, "dst": v})
    return {
        "nodes": nodes,
        "edges": edges,
        "order": list(p.nodes),
        "pinned_hops": sorted(p.pinned_hops),
    }


def path_to_json(p: StegoPath, g: KnowledgeGraph) -> str:
    return json.dumps(path_to_obj(p, g), ensure_ascii=False)


def path_from_obj(obj: dict[str, Any]) -> StegoPath:
    order = tuple(int(n) for n in obj["order"])
    pinned = frozenset(int(h) for h in obj.get("pinned_hops", ()))
    return StegoPath(order, 0, pinned)


def path_from_json(text: str) -> StegoPath:
    return path_from_obj(json.loads(text))
