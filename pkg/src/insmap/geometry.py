"""Planar primitives and ray casting."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

TWO_PI = 2.0 * math.pi

# Two hits closer than this are treated as the same distance.
TIE_TOLERANCE = 1e-12
_ORIENT_EPS = 1e-12


def normalize_angle(theta: float) -> float:
    """Wrap an angle into [-pi, pi)."""
    if -math.pi <= theta < math.pi:
        return float(theta)
    out = (theta + math.pi) % TWO_PI - math.pi
    # float modulo can land exactly on the excluded endpoint
    if out >= math.pi:
        out -= TWO_PI
    elif out < -math.pi:
        out += TWO_PI
    return out


def normalize_angles(theta: np.ndarray) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    out = np.mod(theta + math.pi, TWO_PI) - math.pi
    out = np.where(out >= math.pi, out - TWO_PI, out)
    out = np.where(out < -math.pi, out + TWO_PI, out)
    return np.where((theta >= -math.pi) & (theta < math.pi), theta, out)


@dataclass(frozen=True)
class Point2:
    x: float
    y: float

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite point ({self.x}, {self.y})")

    def __iter__(self):
        yield self.x
        yield self.y

    def distance_to(self, other: "Point2") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y])


@dataclass(frozen=True)
class Pose:
    position: Point2
    heading: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.heading):
            raise ValueError("non-finite heading")
        object.__setattr__(self, "heading", normalize_angle(self.heading))

    @classmethod
    def from_xyh(cls, x: float, y: float, heading: float = 0.0) -> "Pose":
        return cls(Point2(float(x), float(y)), float(heading))

    @property
    def x(self) -> float:
        return self.position.x

    @property
    def y(self) -> float:
        return self.position.y

    def as_array(self) -> np.ndarray:
        return np.array([self.position.x, self.position.y, self.heading])

    def distance_to(self, other: "Pose") -> float:
        return self.position.distance_to(other.position)


@dataclass(frozen=True)
class Segment2:
    a: Point2
    b: Point2

    def __post_init__(self):
        if self.a == self.b:
            raise ValueError("degenerate segment: endpoints coincide")

    @property
    def length(self) -> float:
        return self.a.distance_to(self.b)


def segments_to_array(segments: Iterable[Segment2]) -> np.ndarray:
    """Pack segments into an (M, 4) array of ``ax, ay, bx, by`` rows."""
    rows = [(s.a.x, s.a.y, s.b.x, s.b.y) for s in segments]
    if not rows:
        return np.zeros((0, 4))
    return np.asarray(rows, dtype=float)


def _orient(ax, ay, bx, by, cx, cy) -> float:
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def _sign(v: float) -> int:
    if v > _ORIENT_EPS:
        return 1
    if v < -_ORIENT_EPS:
        return -1
    return 0


def _on_segment(ax, ay, bx, by, px, py) -> bool:
    # assumes collinearity
    return (min(ax, bx) - _ORIENT_EPS <= px <= max(ax, bx) + _ORIENT_EPS
            and min(ay, by) - _ORIENT_EPS <= py <= max(ay, by) + _ORIENT_EPS)


def segments_intersect(s1: Segment2, s2: Segment2) -> bool:
    """True iff the closed segments share a point (collinear overlap included)."""
    ax, ay, bx, by = s1.a.x, s1.a.y, s1.b.x, s1.b.y
    cx, cy, dx, dy = s2.a.x, s2.a.y, s2.b.x, s2.b.y
    o1 = _sign(_orient(ax, ay, bx, by, cx, cy))
    o2 = _sign(_orient(ax, ay, bx, by, dx, dy))
    o3 = _sign(_orient(cx, cy, dx, dy, ax, ay))
    o4 = _sign(_orient(cx, cy, dx, dy, bx, by))
    if o1 != o2 and o3 != o4:
        return True
    if o1 == 0 and _on_segment(ax, ay, bx, by, cx, cy):
        return True
    if o2 == 0 and _on_segment(ax, ay, bx, by, dx, dy):
        return True
    if o3 == 0 and _on_segment(cx, cy, dx, dy, ax, ay):
        return True
    if o4 == 0 and _on_segment(cx, cy, dx, dy, bx, by):
        return True
    return False


def segment_intersects_any(a: np.ndarray, b: np.ndarray, segs: np.ndarray) -> bool:
    """Vectorised proper-or-touching intersection of segment ``a-b`` with rows of ``segs``."""
    if len(segs) == 0:
        return False
    cx, cy, dx, dy = segs[:, 0], segs[:, 1], segs[:, 2], segs[:, 3]
    ax, ay = a
    bx, by = b

    def sgn(v):
        return np.where(v > _ORIENT_EPS, 1, np.where(v < -_ORIENT_EPS, -1, 0))

    o1 = sgn((bx - ax) * (cy - ay) - (by - ay) * (cx - ax))
    o2 = sgn((bx - ax) * (dy - ay) - (by - ay) * (dx - ax))
    o3 = sgn((dx - cx) * (ay - cy) - (dy - cy) * (ax - cx))
    o4 = sgn((dx - cx) * (by - cy) - (dy - cy) * (bx - cx))
    proper = (o1 != o2) & (o3 != o4)
    if proper.any():
        return True

    def within(px, py, qx, qy, rx, ry):
        return ((np.minimum(px, qx) - _ORIENT_EPS <= rx) & (rx <= np.maximum(px, qx) + _ORIENT_EPS)
                & (np.minimum(py, qy) - _ORIENT_EPS <= ry) & (ry <= np.maximum(py, qy) + _ORIENT_EPS))

    touch = ((o1 == 0) & within(ax, ay, bx, by, cx, cy)) | ((o2 == 0) & within(ax, ay, bx, by, dx, dy))
    touch |= ((o3 == 0) & within(cx, cy, dx, dy, ax, ay)) | ((o4 == 0) & within(cx, cy, dx, dy, bx, by))
    return bool(touch.any())


def _ray_hits(origin: np.ndarray, directions: np.ndarray, segs: np.ndarray,
              max_range: float) -> np.ndarray:
    """(R, M) matrix of hit distances along each ray to each segment, ``inf`` for misses."""
    ux = np.cos(directions)[:, None]
    uy = np.sin(directions)[:, None]
    ax = segs[:, 0][None, :] - origin[0]
    ay = segs[:, 1][None, :] - origin[1]
    ex = (segs[:, 2] - segs[:, 0])[None, :]
    ey = (segs[:, 3] - segs[:, 1])[None, :]
    # solve origin + t*u = a + s*e
    denom = ux * ey - uy * ex
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        t = (ax * ey - ay * ex) / denom
        s = (ax * uy - ay * ux) / denom
    ok = (np.abs(denom) > 1e-15) & (s >= -1e-12) & (s <= 1 + 1e-12) & (t > 0) & (t <= max_range)
    return np.where(ok, t, np.inf)


def ray_distances(origin: np.ndarray, directions: np.ndarray, segs: np.ndarray,
                  max_range: float) -> np.ndarray:
    """Distance to the nearest segment for each ray bearing; ``inf`` when nothing is hit.

    ``directions`` are absolute bearings in radians; ``segs`` is an (M, 4) array.
    """
    directions = np.atleast_1d(np.asarray(directions, dtype=float))
    if len(segs) == 0:
        return np.full(directions.shape, np.inf)
    return _ray_hits(np.asarray(origin, dtype=float), directions, segs, max_range).min(axis=1)


def ray_cast(origin: Point2, direction: float, segments: Sequence[Segment2],
             max_range: float) -> Optional[tuple[float, Point2]]:
    """Nearest hit of a ray against the segments, or None.

    Ties within ``TIE_TOLERANCE`` go to the segment listed first.
    """
    if max_range <= 0:
        raise ValueError("max_range must be positive")
    segs = segments_to_array(segments)
    if len(segs) == 0:
        return None
    o = origin.as_array()
    t = _ray_hits(o, np.array([float(direction)]), segs, max_range)[0]
    best = t.min()
    if not np.isfinite(best):
        return None
    i = int(np.flatnonzero(t <= best + TIE_TOLERANCE)[0])
    d = float(t[i])
    return d, Point2(o[0] + d * math.cos(direction), o[1] + d * math.sin(direction))


def point_segment_distances(points: np.ndarray, segs: np.ndarray) -> np.ndarray:
    """(N, M) matrix of distances from each point to each segment."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if len(segs) == 0:
        return np.full((len(points), 0), np.inf)
    a = segs[None, :, 0:2]
    e = segs[None, :, 2:4] - segs[None, :, 0:2]
    p = points[:, None, :]
    ee = np.einsum("ijk,ijk->ij", e, e)
    t = np.einsum("ijk,ijk->ij", p - a, e) / ee
    t = np.clip(t, 0.0, 1.0)
    closest = a + t[..., None] * e
    return np.linalg.norm(p - closest, axis=2)


def segment_point_clearance(a: np.ndarray, b: np.ndarray, points: np.ndarray) -> float:
    """Smallest distance from segment ``a-b`` to any of ``points``."""
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(points) == 0:
        return math.inf
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    e = b - a
    ee = float(e @ e)
    if ee == 0.0:
        return float(np.linalg.norm(points - a, axis=1).min())
    t = np.clip((points - a) @ e / ee, 0.0, 1.0)
    closest = a + t[:, None] * e
    return float(np.linalg.norm(points - closest, axis=1).min())


def point_in_polygon(p: Point2 | np.ndarray, polygon: np.ndarray) -> bool:
    """Even-odd test; points on an edge count as inside."""
    px, py = (p.x, p.y) if isinstance(p, Point2) else (float(p[0]), float(p[1]))
    poly = np.asarray(polygon, dtype=float)
    nxt = np.roll(poly, -1, axis=0)
    edges = np.hstack([poly, nxt])
    if point_segment_distances(np.array([[px, py]]), edges).min() <= 1e-12:
        return True
    inside = False
    for (x1, y1), (x2, y2) in zip(poly, nxt):
        if (y1 > py) != (y2 > py):
            xint = x1 + (py - y1) * (x2 - x1) / (y2 - y1)
            if px < xint:
                inside = not inside
    return inside


def points_in_polygon(points: np.ndarray, polygon: np.ndarray) -> np.ndarray:
    """Vectorised even-odd test; points on an edge count as inside."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    poly = np.asarray(polygon, dtype=float)
    nxt = np.roll(poly, -1, axis=0)
    px, py = pts[:, 0:1], pts[:, 1:2]
    x1, y1, x2, y2 = poly[:, 0], poly[:, 1], nxt[:, 0], nxt[:, 1]
    straddle = (y1 > py) != (y2 > py)
    with np.errstate(divide="ignore", invalid="ignore"):
        xint = x1 + (py - y1) * (x2 - x1) / (y2 - y1)
    inside = (straddle & (px < xint)).sum(axis=1) % 2 == 1
    on_edge = point_segment_distances(pts, np.hstack([poly, nxt])).min(axis=1) <= 1e-12
    return inside | on_edge


def polygon_edges(vertices: Sequence[Point2]) -> list[Segment2]:
    n = len(vertices)
    return [Segment2(vertices[i], vertices[(i + 1) % n]) for i in range(n)]


def rotation(alpha: float) -> np.ndarray:
    c, s = math.cos(alpha), math.sin(alpha)
    return np.array([[c, -s], [s, c]])
