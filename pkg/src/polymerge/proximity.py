"""Proximity graph over map elements: who is close enough to merge with whom."""

from __future__ import annotations

import networkx as nx
import numpy as np

from .geometry import min_distance_to_polyline
from .map_model import MapElement, VectorMap

__all__ = ["polyline_merge_check", "build_graph", "merge_chains"]


def _bbox_gap(a: np.ndarray, b: np.ndarray) -> float:
    """Lower bound on the distance between two point sets via their boxes."""
    lo = np.maximum(a.min(axis=0), b.min(axis=0))
    hi = np.minimum(a.max(axis=0), b.max(axis=0))
    gap = np.maximum(lo - hi, 0.0)
    return float(np.hypot(gap[0], gap[1]))


def polyline_merge_check(a: MapElement, b: MapElement, th_prox: float) -> bool:
    """Decide whether two elements are close enough to merge.

    True when the labels match and at least one vertex of either element
    lies strictly closer than ``th_prox`` to the other element (closest
    point on any segment).  Symmetric in its arguments.
    """
    if th_prox <= 0:
        raise ValueError("th_prox must be positive")
    if a.label != b.label:
        return False
    if _bbox_gap(a.points, b.points) >= th_prox:
        return False
    return (
        min_distance_to_polyline(a.points, b.points) < th_prox
        or min_distance_to_polyline(b.points, a.points) < th_prox
    )


def build_graph(vmap: VectorMap, th_prox: float) -> nx.Graph:
    """Build the merge-candidate graph of a concatenated world map.

    Nodes are element ids.  Every element that is not yet part of the main
    map is checked against all other elements; passing pairs become edges.
    Main-map elements are never checked against each other, so every edge
    has at least one non-main endpoint.
    """
    if vmap.frame != "world":
        raise ValueError("proximity graph requires a world-frame map")
    graph = nx.Graph()
    elements = vmap.elements
    graph.add_nodes_from(el.id for el in elements)
    for i, a in enumerate(elements):
        if a.is_main:
            continue
        for j, b in enumerate(elements):
            if i == j:
                continue
            if polyline_merge_check(a, b, th_prox):
                graph.add_edge(a.id, b.id)
    return graph


def merge_chains(graph: nx.Graph) -> list[list[str]]:
    """Connected components with at least 2 nodes, as id lists.

    Components are ordered by their first node's insertion order in the
    graph, and ids inside a component the same way, so the result is
    deterministic for a deterministically built graph.
    """
    order = {node: k for k, node in enumerate(graph.nodes)}
    chains = []
    for component in nx.connected_components(graph):
        if len(component) < 2:
            continue
        chains.append(sorted(component, key=order.__getitem__))
    chains.sort(key=lambda chain: order[chain[0]])
    return chains
