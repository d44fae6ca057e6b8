"""Folding observed polylines into a growing global map.

Each source vertex is projected onto the base polyline and handled by one
of four cases: midpoint insertion inside a segment, midpoint replacement
of a hit vertex, or extension past the first or last vertex.  Chains of
mutually close elements collapse into a single merged element.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from .geometry import arc_length, as_points, project_point_to_polyline, segment_parameter
from .map_model import LABEL_PED_CROSSING, MapElement, VectorMap, concatenate
from .metrics import discrete_frechet
from .proximity import build_graph, merge_chains, polyline_merge_check
from .quads import merge_quads

__all__ = [
    "MergeConfig",
    "MergeReport",
    "merge_point",
    "merge_polyline",
    "merge_chain",
    "merge_maps",
    "smooth",
]

ENDPOINT_MODES = ("foot", "source")


@dataclass(frozen=True)
class MergeConfig:
    """Tuning knobs of the merge pipeline.

    ``endpoint_mode`` selects what gets attached when a source vertex lies
    beyond an end of the base polyline: the perpendicular foot point on the
    end segment's supporting line ("foot", default) or the source vertex
    itself ("source").
    """

    th_prox: float = 1.0
    th_cov: float = 0.5
    cell_size: float = 0.1
    blur_sigma_cells: float = 2.0
    smoothing_enabled: bool = False
    smoothing_window: int = 5
    endpoint_mode: str = "foot"

    def __post_init__(self):
        if self.th_prox <= 0:
            raise ValueError("th_prox must be positive")
        if not 0.0 < self.th_cov < 1.0:
            raise ValueError("th_cov must lie strictly between 0 and 1")
        if self.cell_size <= 0:
            raise ValueError("cell_size must be positive")
        if self.blur_sigma_cells <= 0:
            raise ValueError("blur_sigma_cells must be positive")
        if self.smoothing_window < 3 or self.smoothing_window % 2 == 0:
            raise ValueError("smoothing_window must be an odd number >= 3")
        if self.endpoint_mode not in ENDPOINT_MODES:
            raise ValueError(f"endpoint_mode must be one of {ENDPOINT_MODES}")


@dataclass
class ChainRecord:
    """What happened to one merge chain."""

    label: str
    members: list[str]
    base_id: str
    kind: str
    scenarios: dict[int, int] | None = None
    fallback: bool = False


@dataclass
class MergeReport:
    """Collected bookkeeping of a merge run, serializable as JSON."""

    chains: list[ChainRecord] = field(default_factory=list)
    isolated: list[str] = field(default_factory=list)
    passes: int = 0

    def add_chain(self, label, members, base_id, kind, scenarios=None, fallback=False):
        self.chains.append(ChainRecord(label, members, base_id, kind, scenarios, fallback))

    def to_dict(self) -> dict:
        return {
            "passes": self.passes,
            "chains": [
                {
                    "label": c.label,
                    "members": c.members,
                    "base": c.base_id,
                    "kind": c.kind,
                    "scenarios": {str(k): v for k, v in sorted(c.scenarios.items())}
                    if c.scenarios is not None
                    else None,
                    "fallback": c.fallback,
                }
                for c in self.chains
            ],
            "isolated": self.isolated,
        }


def _merge_point(a: np.ndarray, base: np.ndarray, endpoint_mode: str) -> tuple[np.ndarray, int]:
    """Merge one source vertex into the base; returns (new base, scenario)."""
    pr = project_point_to_polyline(a, base)
    k = pr.segment_index
    raw = segment_parameter(a, base[k], base[k + 1])
    last = len(base) - 2
    if k == 0 and raw < 0.0:
        # beyond the start: extend backwards
        new_pt = a if endpoint_mode == "source" else base[0] + raw * (base[1] - base[0])
        return np.vstack([new_pt, base]), 3
    if k == last and raw > 1.0:
        # beyond the end: extend forwards
        new_pt = a if endpoint_mode == "source" else base[-2] + raw * (base[-1] - base[-2])
        return np.vstack([base, new_pt]), 4
    if pr.t == 0.0 or pr.t == 1.0:
        # foot coincides with a vertex: replace it by the midpoint
        j = k if pr.t == 0.0 else k + 1
        out = base.copy()
        out[j] = 0.5 * (a + base[j])
        return out, 2
    # foot strictly inside a segment: insert the midpoint
    midpoint = 0.5 * (a + pr.point)
    return np.vstack([base[: k + 1], midpoint, base[k + 1 :]]), 1


def merge_point(a, base, endpoint_mode: str = "foot") -> np.ndarray:
    """Merge a single source vertex ``a`` into the base polyline.

    The vertex is projected onto the base.  A foot point strictly inside a
    segment inserts the midpoint of vertex and foot; a foot point on a base
    vertex replaces that vertex with the midpoint; a vertex whose projection
    clamps at the first or last vertex extends the base past that end.
    """
    if endpoint_mode not in ENDPOINT_MODES:
        raise ValueError(f"endpoint_mode must be one of {ENDPOINT_MODES}")
    a = np.asarray(a, dtype=float).reshape(2)
    pts = as_points(base)
    if len(pts) < 2:
        raise ValueError("base polyline needs at least 2 vertices")
    out, _ = _merge_point(a, pts, endpoint_mode)
    return out


def merge_polyline(source, base, endpoint_mode: str = "foot", scenario_counts=None) -> np.ndarray:
    """Fold every vertex of ``source`` into ``base``, in order.

    The updated base is threaded through the fold, so later vertices see
    the effect of earlier ones.
    """
    src = as_points(source)
    out = as_points(base)
    if len(out) < 2:
        raise ValueError("base polyline needs at least 2 vertices")
    for a in src:
        out, scenario = _merge_point(a, out, endpoint_mode)
        if scenario_counts is not None:
            scenario_counts[scenario] = scenario_counts.get(scenario, 0) + 1
    return out


def _select_base(members: list[MapElement]) -> MapElement:
    mains = [el for el in members if el.is_main]
    if len(mains) == 1:
        return mains[0]
    pool = mains if mains else members
    return sorted(pool, key=lambda el: (-arc_length(el.points), el.id))[0]


def merge_chain(chain, config: MergeConfig, report=None) -> MapElement:
    """Merge a chain of same-label open polylines into one element.

    The base is the chain's main element (several mains: the longest one;
    none: the longest element overall, ties by smallest id).  The remaining
    members are folded in by descending arc length; each is reversed first
    when its reversed orientation is closer to the base in Frechet distance.
    The result keeps the base's id and label and is flagged as main.
    """
    members = list(chain)
    if len(members) < 2:
        raise ValueError("a merge chain needs at least 2 elements")
    labels = {el.label for el in members}
    if len(labels) != 1:
        raise ValueError(f"chain mixes labels: {sorted(labels)}")
    label = members[0].label
    if label == LABEL_PED_CROSSING:
        raise ValueError("crossing chains are merged via merge_quads")

    base_el = _select_base(members)
    rest = [el for el in members if el is not base_el]
    rest.sort(key=lambda el: -arc_length(el.points))

    base = np.array(base_el.points)
    counts: dict[int, int] = {}
    for el in rest:
        src = el.points
        if discrete_frechet(src[::-1], base) < discrete_frechet(src, base):
            src = src[::-1]
        base = merge_polyline(src, base, config.endpoint_mode, counts)
    if config.smoothing_enabled:
        base = smooth(base, config.smoothing_window)
    if report is not None:
        report.add_chain(
            label=label,
            members=[el.id for el in members],
            base_id=base_el.id,
            kind="polyline",
            scenarios=counts,
        )
    return MapElement(base_el.id, label, base, is_main=True)


def _pairwise_graph(elements: list[MapElement], th_prox: float) -> nx.Graph:
    """Merge-candidate graph ignoring main flags, for fixpoint re-checks."""
    graph = nx.Graph()
    graph.add_nodes_from(el.id for el in elements)
    for i, a in enumerate(elements):
        for b in elements[i + 1 :]:
            if polyline_merge_check(a, b, th_prox):
                graph.add_edge(a.id, b.id)
    return graph


def _run_pass(elements: list[MapElement], chains, config, report) -> list[MapElement]:
    by_id = {el.id: el for el in elements}
    chain_of: dict[str, int] = {}
    for c_idx, chain in enumerate(chains):
        for el_id in chain:
            chain_of[el_id] = c_idx
    emitted: set[int] = set()
    out: list[MapElement] = []
    for el in elements:
        c_idx = chain_of.get(el.id)
        if c_idx is None:
            if not el.is_main and report is not None:
                report.isolated.append(el.id)
            out.append(el if el.is_main else el.with_points(el.points, is_main=True))
            continue
        if c_idx in emitted:
            continue
        emitted.add(c_idx)
        members = [by_id[i] for i in chains[c_idx]]
        if members[0].label == LABEL_PED_CROSSING:
            out.append(merge_quads(members, config, report))
        else:
            out.append(merge_chain(members, config, report))
    return out


def merge_maps(main: VectorMap, secondaries, config: MergeConfig | None = None, report=None) -> VectorMap:
    """Merge secondary maps into the main map, producing one world map.

    The maps are concatenated, the proximity graph is built, and every
    chain collapses into a single element (crossings via the coverage-grid
    pipeline, everything else via polyline folding).  Isolated elements
    pass through unchanged, flagged as main.  Because merging can move
    elements, the pairwise check is re-run on the output and further merge
    passes follow while candidates remain, capped at 3 passes in total.
    """
    if config is None:
        config = MergeConfig()
    elements = list(concatenate(main, secondaries).elements)

    graph = build_graph(VectorMap(tuple(elements), "world"), config.th_prox)
    chains = merge_chains(graph)
    elements = _run_pass(elements, chains, config, report)
    passes = 1

    while passes < 3:
        graph = _pairwise_graph(elements, config.th_prox)
        chains = merge_chains(graph)
        if not chains:
            break
        elements = _run_pass(elements, chains, config, report)
        passes += 1
    if report is not None:
        report.passes = passes
    return VectorMap(tuple(elements), "world")


def smooth(points, window: int) -> np.ndarray:
    """Moving-average smoothing that keeps both endpoints fixed.

    Every interior vertex becomes the mean of the vertices in a centered
    window, shrunk symmetrically near the ends; the vertex count never
    changes.
    """
    if window < 3 or window % 2 == 0:
        raise ValueError("window must be an odd number >= 3")
    pts = as_points(points)
    n = len(pts)
    out = pts.copy()
    for i in range(1, n - 1):
        half = min(window // 2, i, n - 1 - i)
        out[i] = pts[i - half : i + half + 1].mean(axis=0)
    return out
