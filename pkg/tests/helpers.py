"""Shared builders for test maps and random geometry."""

from __future__ import annotations

import numpy as np

from polymerge import MapElement, Pose, VectorMap


def line_element(el_id, label, start, end, n=2, is_main=False):
    pts = np.linspace(np.asarray(start, float), np.asarray(end, float), n)
    return MapElement(el_id, label, pts, is_main)


def rect_quad(cx, cy, w, h, angle=0.0):
    """Corners of a w x h rectangle centered at (cx, cy), rotated by angle."""
    local = np.array([[-w / 2, -h / 2], [w / 2, -h / 2], [w / 2, h / 2], [-w / 2, h / 2]])
    c, s = np.cos(angle), np.sin(angle)
    rot = local @ np.array([[c, s], [-s, c]])
    return rot + np.array([cx, cy])


def quad_element(el_id, cx, cy, w=3.0, h=2.0, angle=0.0, is_main=False):
    return MapElement(el_id, "ped_crossing", rect_quad(cx, cy, w, h, angle), is_main)


def random_polyline(rng, n_min=2, n_max=8, scale=10.0):
    n = int(rng.integers(n_min, n_max + 1))
    start = rng.uniform(-scale, scale, 2)
    steps = rng.uniform(-2.0, 2.0, (n - 1, 2))
    pts = np.vstack([start, start + np.cumsum(steps, axis=0)])
    # re-draw duplicate consecutive vertices so arc length stays positive
    while np.any(np.linalg.norm(np.diff(pts, axis=0), axis=1) < 1e-6):
        return random_polyline(rng, n_min, n_max, scale)
    return pts


def random_world_map(rng, n_elements, scale=20.0, main_fraction=0.3):
    """A random world map mixing all three labels, some flagged main."""
    elements = []
    for k in range(n_elements):
        is_main = bool(rng.random() < main_fraction)
        roll = rng.random()
        if roll < 0.25:
            cx, cy = rng.uniform(-scale, scale, 2)
            elements.append(
                quad_element(f"e{k}", cx, cy, w=rng.uniform(2, 4), h=rng.uniform(1.5, 3),
                             angle=rng.uniform(0, np.pi), is_main=is_main)
            )
        else:
            label = "divider" if roll < 0.6 else "boundary"
            pts = random_polyline(rng, scale=scale)
            elements.append(MapElement(f"e{k}", label, pts, is_main))
    return VectorMap(tuple(elements), "world")


def random_pose(rng, span=10.0):
    return Pose.from_yaw(rng.uniform(-np.pi, np.pi), *rng.uniform(-span, span, 2))
