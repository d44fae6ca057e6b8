"""Vector map data model and its JSON file format.

A map holds labeled elements: open polylines for dividers and road
boundaries, and pedestrian crossings stored as the 4 corners of a
quadrilateral (the closing edge is implied, never stored).  Maps are either
in a local ego frame (with the recording pose attached) or in the world
frame, and are immutable once built.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from .geometry import Pose, as_points, transform_to_world

__all__ = [
    "LABELS",
    "LABEL_PED_CROSSING",
    "LABEL_DIVIDER",
    "LABEL_BOUNDARY",
    "MapFormatError",
    "MapElement",
    "VectorMap",
    "concatenate",
    "to_world",
    "load_map",
    "save_map",
]

LABEL_PED_CROSSING = "ped_crossing"
LABEL_DIVIDER = "divider"
LABEL_BOUNDARY = "boundary"
LABELS = (LABEL_PED_CROSSING, LABEL_DIVIDER, LABEL_BOUNDARY)

FRAMES = ("ego", "world")


class MapFormatError(ValueError):
    """A map file or element violates the format contract."""


def _segments_cross(p1, p2, p3, p4) -> bool:
    """True if open segments p1-p2 and p3-p4 properly intersect."""

    def orient(a, b, c):
        v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        if v > 1e-12:
            return 1
        if v < -1e-12:
            return -1
        return 0

    o1 = orient(p1, p2, p3)
    o2 = orient(p1, p2, p4)
    o3 = orient(p3, p4, p1)
    o4 = orient(p3, p4, p2)
    return o1 != o2 and o3 != o4 and o1 != 0 and o2 != 0 and o3 != 0 and o4 != 0


def _signed_area(pts: np.ndarray) -> float:
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _validate_quad(pts: np.ndarray) -> str | None:
    """Check that 4 points form a simple quadrilateral.  Returns an error text."""
    if len(pts) != 4:
        return f"a {LABEL_PED_CROSSING} needs exactly 4 vertices, got {len(pts)}"
    for i in range(4):
        for j in range(i + 1, 4):
            if np.allclose(pts[i], pts[j], atol=1e-12):
                return f"{LABEL_PED_CROSSING} vertices {i} and {j} coincide"
    # opposite edges of the implied closed ring must not cross
    ring = [pts[0], pts[1], pts[2], pts[3]]
    if _segments_cross(ring[0], ring[1], ring[2], ring[3]) or _segments_cross(
        ring[1], ring[2], ring[3], ring[0]
    ):
        return f"{LABEL_PED_CROSSING} edges self-intersect"
    if abs(_signed_area(pts)) < 1e-12:
        return f"{LABEL_PED_CROSSING} has zero area"
    return None


def _canonical_quad(pts: np.ndarray) -> np.ndarray:
    """Rotate the vertex cycle to start at the lexicographically smallest
    corner, winding counter-clockwise.  The stored ring of a quadrilateral
    has no natural first vertex; the canonical form keeps serialization and
    curve comparisons stable."""
    if _signed_area(pts) < 0:
        pts = pts[::-1]
    start = min(range(4), key=lambda i: (pts[i, 0], pts[i, 1]))
    return np.roll(pts, -start, axis=0)


@dataclass(frozen=True)
class MapElement:
    """One labeled map element.

    ``points`` is the open vertex chain; ``is_main`` marks elements that
    already belong to the growing global map.
    """

    id: str
    label: str
    points: np.ndarray
    is_main: bool = False

    def __post_init__(self):
        if not isinstance(self.id, str) or not self.id:
            raise ValueError("element id must be a non-empty string")
        if self.label not in LABELS:
            raise ValueError(
                f"element '{self.id}': unknown label '{self.label}'"
                f" (expected one of {', '.join(LABELS)})"
            )
        try:
            pts = as_points(self.points)
        except ValueError as exc:
            raise ValueError(f"element '{self.id}': {exc}") from None
        if len(pts) < 2:
            raise ValueError(
                f"element '{self.id}': a polyline needs at least 2 vertices, got {len(pts)}"
            )
        if self.label == LABEL_PED_CROSSING:
            problem = _validate_quad(pts)
            if problem is not None:
                raise ValueError(f"element '{self.id}': {problem}")
            pts = _canonical_quad(pts)
        pts = np.ascontiguousarray(pts)
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    def with_points(self, points, is_main: bool | None = None) -> "MapElement":
        return MapElement(
            self.id,
            self.label,
            points,
            self.is_main if is_main is None else is_main,
        )


@dataclass(frozen=True)
class VectorMap:
    """An immutable collection of map elements in one coordinate frame."""

    elements: tuple[MapElement, ...]
    frame: str = "world"
    pose: Pose | None = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        if self.frame not in FRAMES:
            raise ValueError(f"unknown frame '{self.frame}' (expected 'ego' or 'world')")
        if self.frame == "ego" and self.pose is None:
            raise ValueError("frame is 'ego' but no pose is given")
        seen = set()
        for el in self.elements:
            if not isinstance(el, MapElement):
                raise ValueError("map elements must be MapElement instances")
            if el.id in seen:
                raise ValueError(f"duplicate element id '{el.id}'")
            seen.add(el.id)

    def __len__(self) -> int:
        return len(self.elements)

    def element(self, element_id: str) -> MapElement:
        for el in self.elements:
            if el.id == element_id:
                return el
        raise KeyError(element_id)


def to_world(vmap: VectorMap) -> VectorMap:
    """Express a map in the world frame (identity for world maps)."""
    if vmap.frame == "world":
        return vmap
    elements = tuple(
        el.with_points(transform_to_world(el.points, vmap.pose)) for el in vmap.elements
    )
    return VectorMap(elements, "world")


def concatenate(main: VectorMap, secondaries) -> VectorMap:
    """Stack the main map and secondary maps into one world-frame map.

    Every element id is remapped to "<source-index>:<original-id>" (the main
    map is source 0) so the result stays collision-free, and elements of the
    main map are flagged ``is_main``.  An empty main map is legal; it
    bootstraps a global map from scratch.
    """
    sources = [main, *secondaries]
    merged: list[MapElement] = []
    for idx, src in enumerate(sources):
        world = to_world(src)
        for el in world.elements:
            merged.append(
                MapElement(f"{idx}:{el.id}", el.label, el.points, is_main=(idx == 0))
            )
    return VectorMap(tuple(merged), "world")


def _parse_pose(obj, where: str) -> Pose:
    if not isinstance(obj, dict):
        raise MapFormatError(f"{where}: pose must be an object")
    for key in ("rotation", "translation"):
        if key not in obj:
            raise MapFormatError(f"{where}: pose is missing '{key}'")
    rot = obj["rotation"]
    trans = obj["translation"]
    if not isinstance(rot, list) or len(rot) != 4:
        raise MapFormatError(f"{where}: pose rotation must be [w, x, y, z]")
    if not isinstance(trans, list) or len(trans) != 3:
        raise MapFormatError(f"{where}: pose translation must be [x, y, z]")
    try:
        return Pose(np.array(rot, dtype=float), np.array(trans, dtype=float))
    except (TypeError, ValueError) as exc:
        raise MapFormatError(f"{where}: {exc}") from None


def _parse_element(obj, index: int) -> MapElement:
    where = f"element #{index}"
    if not isinstance(obj, dict):
        raise MapFormatError(f"{where}: must be an object")
    el_id = obj.get("id")
    if not isinstance(el_id, str) or not el_id:
        raise MapFormatError(f"{where}: field 'id' must be a non-empty string")
    where = f"element '{el_id}'"
    label = obj.get("label")
    if label is None:
        raise MapFormatError(f"{where}: missing field 'label'")
    pts = obj.get("points")
    if not isinstance(pts, list):
        raise MapFormatError(f"{where}: field 'points' must be a list of [x, y] pairs")
    for k, p in enumerate(pts):
        if not isinstance(p, list) or len(p) != 2:
            raise MapFormatError(f"{where}: points[{k}] must be an [x, y] pair")
    is_main = obj.get("is_main", False)
    if not isinstance(is_main, bool):
        raise MapFormatError(f"{where}: field 'is_main' must be a boolean")
    try:
        return MapElement(el_id, label, np.array(pts, dtype=float).reshape(-1, 2), is_main)
    except (TypeError, ValueError) as exc:
        raise MapFormatError(str(exc)) from None


def load_map(path) -> VectorMap:
    """Read a vector map from a JSON file.

    Raises MapFormatError naming the offending element or field whenever
    the file violates the format.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise MapFormatError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise MapFormatError(f"{path}: top level must be an object")
    frame = doc.get("frame")
    if frame not in FRAMES:
        raise MapFormatError(f"{path}: field 'frame' must be 'ego' or 'world', got {frame!r}")
    pose = None
    if "pose" in doc and doc["pose"] is not None:
        pose = _parse_pose(doc["pose"], path)
    if frame == "ego" and pose is None:
        raise MapFormatError(f"{path}: frame is 'ego' but field 'pose' is missing")
    raw_elements = doc.get("elements")
    if not isinstance(raw_elements, list):
        raise MapFormatError(f"{path}: field 'elements' must be a list")
    elements = []
    for k, obj in enumerate(raw_elements):
        try:
            elements.append(_parse_element(obj, k))
        except MapFormatError as exc:
            raise MapFormatError(f"{path}: {exc}") from None
    try:
        return VectorMap(tuple(elements), frame, pose)
    except ValueError as exc:
        raise MapFormatError(f"{path}: {exc}") from None


def _map_to_doc(vmap: VectorMap) -> dict:
    doc: dict = {"frame": vmap.frame}
    if vmap.pose is not None:
        doc["pose"] = {
            "rotation": [float(v) for v in vmap.pose.rotation],
            "translation": [float(v) for v in vmap.pose.translation],
        }
    doc["elements"] = [
        {
            "id": el.id,
            "label": el.label,
            "is_main": el.is_main,
            "points": [[float(x), float(y)] for x, y in el.points],
        }
        for el in vmap.elements
    ]
    return doc


def write_json_atomic(doc, path) -> None:
    """Serialize ``doc`` to ``path`` via a temp file and atomic rename."""
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_map(vmap: VectorMap, path) -> None:
    """Write a vector map as JSON.  Floats keep their full round-trip
    precision, and the file is replaced atomically."""
    write_json_atomic(_map_to_doc(vmap), path)
