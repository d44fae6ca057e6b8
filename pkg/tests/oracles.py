"""Independent oracles used to freeze expected values and cross-check results.

Everything here is deliberately brute force: dense sampling, exhaustive
enumeration, or fine sweeps.  None of it shares code with the package
implementations it checks.
"""

from __future__ import annotations

import numpy as np


def dense_projection(a, b, c, n: int = 100_000) -> tuple[float, np.ndarray]:
    """Closest point of segment b-c to a, by sampling n parameters."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    t = np.linspace(0.0, 1.0, n)
    v = c - b
    d2 = (b[0] + t * v[0] - a[0]) ** 2 + (b[1] + t * v[1] - a[1]) ** 2
    k = int(np.argmin(d2))
    return float(np.sqrt(d2[k])), b + t[k] * v


def dense_polyline_projection(a, polyline, n: int = 100_000) -> float:
    """Min distance of a to a polyline by dense sampling of every segment."""
    best = np.inf
    pts = np.asarray(polyline, dtype=float)
    for b, c in zip(pts[:-1], pts[1:]):
        d, _ = dense_projection(a, b, c, n)
        best = min(best, d)
    return best


def frechet_exhaustive(p, q) -> float:
    """Discrete Frechet distance by enumerating every monotone coupling."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    n, m = len(p), len(q)
    dist = np.linalg.norm(p[:, np.newaxis, :] - q[np.newaxis, :, :], axis=2)
    best = [np.inf]

    def walk(i, j, current):
        current = max(current, dist[i, j])
        if current >= best[0]:
            return
        if i == n - 1 and j == m - 1:
            best[0] = current
            return
        if i + 1 < n:
            walk(i + 1, j, current)
        if j + 1 < m:
            walk(i, j + 1, current)
        if i + 1 < n and j + 1 < m:
            walk(i + 1, j + 1, current)

    walk(0, 0, 0.0)
    return best[0]


def frechet_exhaustive_noprune(p, q) -> float:
    """Same enumeration without pruning; only for very small inputs."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    n, m = len(p), len(q)
    dist = np.linalg.norm(p[:, np.newaxis, :] - q[np.newaxis, :, :], axis=2)
    results = []

    def walk(i, j, current):
        current = max(current, dist[i, j])
        if i == n - 1 and j == m - 1:
            results.append(current)
            return
        if i + 1 < n:
            walk(i + 1, j, current)
        if j + 1 < m:
            walk(i, j + 1, current)
        if i + 1 < n and j + 1 < m:
            walk(i + 1, j + 1, current)

    walk(0, 0, 0.0)
    return min(results)


def _segment_distance_matrix(points, poly):
    """Min distance of each point to a polyline, no shared code with the
    package: per-vertex loop over segments with the textbook formula."""
    out = []
    for p in points:
        best = np.inf
        for b, c in zip(poly[:-1], poly[1:]):
            bc = c - b
            denom = float(bc @ bc)
            if denom < 1e-24:
                d = float(np.linalg.norm(p - b))
            else:
                t = float((p - b) @ bc) / denom
                t = min(1.0, max(0.0, t))
                d = float(np.linalg.norm(p - (b + t * bc)))
            best = min(best, d)
        out.append(best)
    return out


def naive_merge_check(a, b, th_prox: float) -> bool:
    """Re-statement of the merge criterion from first principles."""
    if a.label != b.label:
        return False
    da = _segment_distance_matrix(a.points, b.points)
    db = _segment_distance_matrix(b.points, a.points)
    return min(da) < th_prox or min(db) < th_prox


def naive_graph_edges(vmap, th_prox: float) -> set[frozenset]:
    """All merge edges by the quadratic double loop over elements."""
    edges = set()
    for a in vmap.elements:
        if a.is_main:
            continue
        for b in vmap.elements:
            if a.id == b.id:
                continue
            if naive_merge_check(a, b, th_prox):
                edges.add(frozenset((a.id, b.id)))
    return edges


def sweep_min_rect_area(points, step_deg: float = 0.1) -> float:
    """Min enclosing-rectangle area over a fine sweep of orientations."""
    pts = np.asarray(points, dtype=float)
    angles = np.deg2rad(np.arange(0.0, 90.0, step_deg))
    c, s = np.cos(angles), np.sin(angles)
    xs = np.outer(c, pts[:, 0]) + np.outer(s, pts[:, 1])
    ys = -np.outer(s, pts[:, 0]) + np.outer(c, pts[:, 1])
    areas = (xs.max(axis=1) - xs.min(axis=1)) * (ys.max(axis=1) - ys.min(axis=1))
    return float(areas.min())


def convex_polygon_clip(subject, clipper):
    """Sutherland-Hodgman intersection of convex polygons (CCW)."""
    subject = [np.asarray(p, dtype=float) for p in subject]
    clipper = [np.asarray(p, dtype=float) for p in clipper]
    output = subject
    for i in range(len(clipper)):
        if not output:
            break
        a, b = clipper[i], clipper[(i + 1) % len(clipper)]
        edge = b - a

        def inside(p):
            return edge[0] * (p[1] - a[1]) - edge[1] * (p[0] - a[0]) >= -1e-12

        def intersect(p, q):
            d = q - p
            denom = edge[0] * d[1] - edge[1] * d[0]
            t = (edge[0] * (a[1] - p[1]) - edge[1] * (a[0] - p[0])) / -denom
            return p + t * d

        current = output
        output = []
        for k, cur in enumerate(current):
            prev = current[k - 1]
            if inside(cur):
                if not inside(prev):
                    output.append(intersect(prev, cur))
                output.append(cur)
            elif inside(prev):
                output.append(intersect(prev, cur))
    return output


def polygon_area(points) -> float:
    pts = np.asarray(points, dtype=float)
    if len(pts) < 3:
        return 0.0
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * abs(float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)))


def quad_iou(a, b) -> float:
    """Intersection over union of two convex quadrilaterals."""
    a = _ccw(np.asarray(a, dtype=float))
    b = _ccw(np.asarray(b, dtype=float))
    inter = polygon_area(convex_polygon_clip(list(a), list(b)))
    union = polygon_area(a) + polygon_area(b) - inter
    return inter / union if union > 0 else 0.0


def _ccw(pts):
    x, y = pts[:, 0], pts[:, 1]
    if 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)) < 0:
        return pts[::-1]
    return pts


def pcm_offset_sweep(p, q, step: float = 0.01) -> float:
    """Partial-curve area with a dense offset sweep instead of vertex
    candidates; used to sanity-check optimal-subsection values."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)

    def cum(pts):
        return np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(pts, axis=0), axis=1))])

    def interp(pts, arcs, s):
        return np.column_stack([np.interp(s, arcs, pts[:, 0]), np.interp(s, arcs, pts[:, 1])])

    ap, aq = cum(p), cum(q)
    if ap[-1] <= aq[-1]:
        short, a_s, long, a_l = p, ap, q, aq
    else:
        short, a_s, long, a_l = q, aq, p, ap
    span = a_l[-1] - a_s[-1]
    best = np.inf
    for off in np.arange(0.0, span + step, step):
        off = min(off, span)
        s = np.unique(np.concatenate([a_s, np.linspace(0, a_s[-1], 64)]))
        d = np.linalg.norm(interp(short, a_s, s) - interp(long, a_l, s + off), axis=1)
        area = float(np.sum(0.5 * (d[:-1] + d[1:]) * np.diff(s)))
        best = min(best, area)
    return best / float(aq[-1])
