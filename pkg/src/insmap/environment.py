"""Ground-truth polygonal worlds and their text file format.

File layout (line oriented, ``#`` comments, blank lines ignored)::

    boundary: 0,0 10,0 10,10 0,10
    obstacle: 2,2 3,2 3,3
    start: 5,5,0
    agent_radius: 0.2
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from .geometry import (
    Point2,
    Pose,
    Segment2,
    point_in_polygon,
    point_segment_distances,
    points_in_polygon,
    polygon_edges,
    segments_intersect,
    segments_to_array,
)


class EnvironmentParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class EnvironmentValidationError(ValueError):
    pass


Polygon = tuple[Point2, ...]


@dataclass(frozen=True, eq=True)
class EnvironmentModel:
    boundary: Polygon
    obstacles: tuple[Polygon, ...]
    start_pose: Pose
    agent_radius: float
    name: str = field(default="", compare=False)

    def __post_init__(self):
        _validate(self)

    @cached_property
    def segment_array(self) -> np.ndarray:
        return segments_to_array(all_segments(self))

    @cached_property
    def _boundary_array(self) -> np.ndarray:
        return np.array([(p.x, p.y) for p in self.boundary])

    @cached_property
    def _obstacle_arrays(self) -> tuple[np.ndarray, ...]:
        return tuple(np.array([(p.x, p.y) for p in poly]) for poly in self.obstacles)

    @property
    def perimeter(self) -> float:
        return float(np.hypot(self.segment_array[:, 2] - self.segment_array[:, 0],
                              self.segment_array[:, 3] - self.segment_array[:, 1]).sum())


def all_segments(model: EnvironmentModel) -> list[Segment2]:
    """Every edge of the boundary, then each obstacle, in file order."""
    segs = polygon_edges(model.boundary)
    for poly in model.obstacles:
        segs.extend(polygon_edges(poly))
    return segs


def is_pose_free(model: EnvironmentModel, p: Point2) -> bool:
    """Inside the boundary, outside every obstacle, and agent_radius clear of all walls."""
    xy = np.array([[p.x, p.y]])
    if point_segment_distances(xy, model.segment_array).min() < model.agent_radius:
        return False
    if not points_in_polygon(xy, model._boundary_array)[0]:
        return False
    return not any(points_in_polygon(xy, poly)[0] for poly in model._obstacle_arrays)


def _simple(poly: Polygon) -> bool:
    edges = polygon_edges(poly)
    n = len(edges)
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            if segments_intersect(edges[i], edges[j]):
                return False
    return True


def _validate(model: EnvironmentModel) -> None:
    polys = [("boundary", model.boundary)] + [(f"obstacle {i}", o) for i, o in enumerate(model.obstacles)]
    for label, poly in polys:
        if len(poly) < 3:
            raise EnvironmentValidationError(f"{label}: polygon needs >=3 vertices")
        if len(set(poly)) != len(poly):
            raise EnvironmentValidationError(f"{label}: repeated vertex")
    if not _simple(model.boundary):
        raise EnvironmentValidationError("boundary is self-intersecting")
    if not (model.agent_radius > 0 and math.isfinite(model.agent_radius)):
        raise EnvironmentValidationError("agent_radius must be positive")
    barr = np.array([(p.x, p.y) for p in model.boundary])
    oarrs = [np.array([(p.x, p.y) for p in o]) for o in model.obstacles]
    for i, o in enumerate(model.obstacles):
        if not _simple(o):
            raise EnvironmentValidationError(f"obstacle {i} is self-intersecting")
        if not all(point_in_polygon(v, barr) for v in o):
            raise EnvironmentValidationError(f"obstacle {i} leaves the boundary")
        for j, other in enumerate(oarrs):
            if j != i and all(point_in_polygon(v, other) for v in o):
                raise EnvironmentValidationError(f"obstacle {i} is nested inside obstacle {j}")
    start = model.start_pose.position
    if not point_in_polygon(start, barr):
        raise EnvironmentValidationError("start is outside the boundary")
    for i, o in enumerate(oarrs):
        if point_in_polygon(start, o):
            raise EnvironmentValidationError(f"start is inside obstacle {i}")
    segs = segments_to_array(all_segments_of(model.boundary, model.obstacles))
    if point_segment_distances(np.array([[start.x, start.y]]), segs).min() < model.agent_radius:
        raise EnvironmentValidationError("start is closer than agent_radius to a wall")


def all_segments_of(boundary: Polygon, obstacles: Sequence[Polygon]) -> list[Segment2]:
    segs = polygon_edges(boundary)
    for o in obstacles:
        segs.extend(polygon_edges(o))
    return segs


_SECTIONS = ("boundary", "obstacle", "start", "agent_radius")


def _parse_points(body: str, lineno: int) -> Polygon:
    pts = []
    for tok in body.split():
        parts = tok.split(",")
        if len(parts) != 2:
            raise EnvironmentParseError(f"expected x,y but got {tok!r}", lineno)
        try:
            pts.append(Point2(float(parts[0]), float(parts[1])))
        except ValueError as exc:
            raise EnvironmentParseError(f"bad coordinate {tok!r}: {exc}", lineno) from None
    return tuple(pts)


def load_environment(text: str, name: str = "") -> EnvironmentModel:
    boundary = None
    obstacles: list[Polygon] = []
    start = None
    radius = None
    last_section = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, body = line.partition(":")
        key = key.strip()
        if not sep or key not in _SECTIONS:
            raise EnvironmentParseError(f"unknown line {line!r}", lineno)
        order = _SECTIONS.index(key)
        if order < last_section or (order == last_section and key != "obstacle"):
            raise EnvironmentParseError(f"section {key!r} out of order", lineno)
        last_section = order
        body = body.strip()
        if key == "boundary":
            boundary = _parse_points(body, lineno)
        elif key == "obstacle":
            obstacles.append(_parse_points(body, lineno))
        elif key == "start":
            parts = body.split(",")
            if len(parts) != 3:
                raise EnvironmentParseError("start needs x,y,heading_rad", lineno)
            try:
                start = Pose.from_xyh(*(float(v) for v in parts))
            except ValueError as exc:
                raise EnvironmentParseError(f"bad start: {exc}", lineno) from None
        else:
            try:
                radius = float(body)
            except ValueError:
                raise EnvironmentParseError(f"bad agent_radius {body!r}", lineno) from None
    for label, value in (("boundary", boundary), ("start", start), ("agent_radius", radius)):
        if value is None:
            raise EnvironmentParseError(f"missing {label} line")
    return EnvironmentModel(boundary, tuple(obstacles), start, radius, name=name)


def _fmt(v: float) -> str:
    return repr(float(v))


def serialize_environment(model: EnvironmentModel) -> str:
    def pts(poly):
        return " ".join(f"{_fmt(p.x)},{_fmt(p.y)}" for p in poly)

    lines = [f"boundary: {pts(model.boundary)}"]
    lines += [f"obstacle: {pts(o)}" for o in model.obstacles]
    s = model.start_pose
    lines.append(f"start: {_fmt(s.x)},{_fmt(s.y)},{_fmt(s.heading)}")
    lines.append(f"agent_radius: {_fmt(model.agent_radius)}")
    return "\n".join(lines) + "\n"


def read_environment(path: str | Path) -> EnvironmentModel:
    path = Path(path)
    return load_environment(path.read_text(encoding="utf-8"), name=path.stem)
