"""Synthetic observation generator: noisy windowed views of a ground-truth map.

For every pose the ground truth is expressed in that pose's ego frame,
cropped to a rectangular sensing window around the origin, thinned by a
per-element dropout and jittered with Gaussian vertex noise.  The i-th
instance uses the RNG stream seeded with ``seed ^ i``, so any instance can
be regenerated independently and the whole run is deterministic.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .geometry import Pose, arc_length, transform_to_world
from .map_model import (
    LABEL_PED_CROSSING,
    MapElement,
    VectorMap,
    save_map,
    to_world,
    write_json_atomic,
)
from .quads import min_rotated_rect

__all__ = [
    "NoiseConfig",
    "generate_instances",
    "write_instances",
    "straight_path_poses",
]


@dataclass(frozen=True)
class NoiseConfig:
    """Parameters of the synthetic observation model."""

    sigma: float = 0.0
    dropout: float = 0.0
    window: tuple[float, float] = (30.0, 60.0)
    n_instances: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must lie in [0, 1)")
        w, h = self.window
        if w <= 0 or h <= 0:
            raise ValueError("window sides must be positive")
        if self.n_instances < 1:
            raise ValueError("n_instances must be >= 1")


def _clip_segment(p: np.ndarray, q: np.ndarray, half_w: float, half_h: float):
    """Liang-Barsky clip of segment p-q against the centered window rect.

    Returns (a, b) endpoints of the clipped piece, or None when the
    segment misses the window.
    """
    d = q - p
    t0, t1 = 0.0, 1.0
    for delta, lo, hi in ((d[0], -half_w - p[0], half_w - p[0]),
                          (d[1], -half_h - p[1], half_h - p[1])):
        if delta == 0.0:
            if lo > 0.0 or hi < 0.0:
                return None
            continue
        ta, tb = lo / delta, hi / delta
        if ta > tb:
            ta, tb = tb, ta
        t0 = max(t0, ta)
        t1 = min(t1, tb)
        if t0 > t1:
            return None
    return p + t0 * d, p + t1 * d


def _crop_polyline(pts: np.ndarray, half_w: float, half_h: float) -> list[np.ndarray]:
    """Crop a polyline to the window, splitting it where it leaves."""
    pieces: list[np.ndarray] = []
    current: list[np.ndarray] = []

    def flush():
        nonlocal current
        if len(current) >= 2 and arc_length(np.array(current)) > 1e-9:
            pieces.append(np.array(current))
        current = []

    for p, q in zip(pts[:-1], pts[1:]):
        clipped = _clip_segment(p, q, half_w, half_h)
        if clipped is None:
            flush()
            continue
        a, b = clipped
        if current and np.allclose(current[-1], a, atol=1e-9):
            current.append(b)
        else:
            flush()
            current = [a, b]
    flush()
    return pieces


def _clip_polygon(pts: np.ndarray, half_w: float, half_h: float) -> np.ndarray:
    """Sutherland-Hodgman clip of a closed polygon against the window rect."""
    def clip_edge(poly, inside, intersect):
        out = []
        for i, cur in enumerate(poly):
            prev = poly[i - 1]
            cur_in, prev_in = inside(cur), inside(prev)
            if cur_in:
                if not prev_in:
                    out.append(intersect(prev, cur))
                out.append(cur)
            elif prev_in:
                out.append(intersect(prev, cur))
        return out

    def x_cut(value):
        def intersect(a, b):
            t = (value - a[0]) / (b[0] - a[0])
            return np.array([value, a[1] + t * (b[1] - a[1])])
        return intersect

    def y_cut(value):
        def intersect(a, b):
            t = (value - a[1]) / (b[1] - a[1])
            return np.array([a[0] + t * (b[0] - a[0]), value])
        return intersect

    poly = list(pts)
    for inside, intersect in (
        (lambda p: p[0] >= -half_w, x_cut(-half_w)),
        (lambda p: p[0] <= half_w, x_cut(half_w)),
        (lambda p: p[1] >= -half_h, y_cut(-half_h)),
        (lambda p: p[1] <= half_h, y_cut(half_h)),
    ):
        if not poly:
            break
        poly = clip_edge(poly, inside, intersect)
    return np.array(poly).reshape(-1, 2)


def _crop_quad(pts: np.ndarray, half_w: float, half_h: float) -> np.ndarray | None:
    """Crop a crossing quad; partially visible quads are re-fit to 4 corners."""
    inside = (np.abs(pts[:, 0]) <= half_w) & (np.abs(pts[:, 1]) <= half_h)
    if np.all(inside):
        return pts
    clipped = _clip_polygon(pts, half_w, half_h)
    if len(clipped) < 3:
        return None
    try:
        return min_rotated_rect(clipped)
    except ValueError:
        return None


def _quad_element(el_id: str, pts: np.ndarray) -> MapElement | None:
    """Build a crossing element, re-fitting when noise broke the quad shape."""
    try:
        return MapElement(el_id, LABEL_PED_CROSSING, pts)
    except ValueError:
        pass
    try:
        return MapElement(el_id, LABEL_PED_CROSSING, min_rotated_rect(pts))
    except ValueError:
        return None


def generate_instances(gt: VectorMap, poses, cfg: NoiseConfig) -> list[VectorMap]:
    """Produce one ego-frame instance of the ground truth per pose."""
    gt_world = to_world(gt)
    half_w, half_h = cfg.window[0] / 2.0, cfg.window[1] / 2.0
    instances = []
    for k, pose in enumerate(poses):
        rng = np.random.default_rng(cfg.seed ^ k)
        inv = pose.inverse()
        observed: list[MapElement] = []
        for el in gt_world.elements:
            ego_pts = transform_to_world(el.points, inv)
            if el.label == LABEL_PED_CROSSING:
                cropped = _crop_quad(ego_pts, half_w, half_h)
                pieces = [] if cropped is None else [(el.id, cropped)]
            else:
                runs = _crop_polyline(ego_pts, half_w, half_h)
                pieces = [
                    (el.id if j == 0 else f"{el.id}#{j}", run)
                    for j, run in enumerate(runs)
                ]
            for piece_id, pts in pieces:
                if rng.random() < cfg.dropout:
                    continue
                if cfg.sigma > 0:
                    pts = pts + rng.normal(0.0, cfg.sigma, pts.shape)
                if el.label == LABEL_PED_CROSSING:
                    noisy = _quad_element(piece_id, pts)
                    if noisy is not None:
                        observed.append(noisy)
                else:
                    observed.append(MapElement(piece_id, el.label, pts))
        instances.append(VectorMap(tuple(observed), "ego", pose))
    return instances


def write_instances(instances, out_dir) -> list[str]:
    """Write instance_<k>.json files plus a poses.json manifest."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    poses = []
    for k, inst in enumerate(instances):
        path = os.path.join(out_dir, f"instance_{k}.json")
        save_map(inst, path)
        paths.append(path)
        poses.append(
            {
                "rotation": [float(v) for v in inst.pose.rotation],
                "translation": [float(v) for v in inst.pose.translation],
            }
        )
    manifest = os.path.join(out_dir, "poses.json")
    write_json_atomic({"poses": poses}, manifest)
    paths.append(manifest)
    return paths


def straight_path_poses(gt: VectorMap, n: int) -> list[Pose]:
    """Evenly spaced poses sweeping the map's longer bounding-box axis.

    The path runs through the middle of the shorter axis with identity
    heading, which suits the default tall sensing window.
    """
    if n < 1:
        raise ValueError("need at least one pose")
    world = to_world(gt)
    if not world.elements:
        return [Pose.identity() for _ in range(n)]
    stacked = np.vstack([el.points for el in world.elements])
    lo, hi = stacked.min(axis=0), stacked.max(axis=0)
    mid = 0.5 * (lo + hi)
    along = 0 if (hi - lo)[0] >= (hi - lo)[1] else 1
    stops = np.linspace(lo[along], hi[along], n) if n > 1 else [mid[along]]
    poses = []
    for s in stops:
        origin = mid.copy()
        origin[along] = s
        poses.append(Pose.from_yaw(0.0, origin[0], origin[1]))
    return poses
