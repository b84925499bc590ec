"""Wall/gap classification of a sweep and jump-edge feature extraction."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .geometry import Point2, normalize_angle
from .lidar import N_DEGREES, Sweep, arc_order

DEFAULT_GAP_THRESHOLD = 2.5
DEFAULT_MIN_GAP_DEGREES = 5
DEFAULT_JUMP_THRESHOLD = 0.3
FEATURE_MERGE_DEGREES = 2
MAX_GAP_SPAN = 180


@dataclass
class GapDescriptor:
    start_degree: int
    end_degree: int
    width: float
    centroid: Point2
    left: Point2  # bounding point before start_degree
    right: Point2  # bounding point after end_degree
    explored: bool = False

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("gap width must be positive")

    @property
    def n_degrees(self) -> int:
        return (self.end_degree - self.start_degree) % N_DEGREES + 1

    @property
    def chord(self) -> tuple[Point2, Point2]:
        return self.left, self.right


@dataclass(frozen=True)
class WallDescriptor:
    start_degree: int
    end_degree: int
    points: tuple[Point2, ...] = field(default=())


@dataclass(frozen=True)
class Feature:
    position: Point2
    range: float
    bearing: float  # relative to the sensor heading
    degree: int
    kind: str = "jump-edge"


class Classification(NamedTuple):
    gaps: list[GapDescriptor]
    walls: list[WallDescriptor]
    degenerate: bool = False


def _runs(labels: np.ndarray, circular: bool) -> list[tuple[int, int, bool]]:
    """Maximal runs ``(first, last, label)`` over sequence positions.

    For circular sequences a run may wrap, in which case ``last < first``.
    """
    n = len(labels)
    if n == 0:
        return []
    if circular and (labels == labels[0]).all():
        return [(0, n - 1, bool(labels[0]))]
    change = np.flatnonzero(labels[1:] != labels[:-1]) + 1
    starts = [0] + change.tolist()
    ends = (change - 1).tolist() + [n - 1]
    runs = [(s, e, bool(labels[s])) for s, e in zip(starts, ends)]
    if circular and len(runs) > 1 and runs[0][2] == runs[-1][2]:
        first = runs.pop(0)
        last = runs.pop()
        runs.append((last[0], first[1], first[2]))
    return runs


def _run_len(first: int, last: int, n: int) -> int:
    return (last - first) % n + 1


def _positions(first: int, last: int, n: int) -> list[int]:
    return [(first + k) % n for k in range(_run_len(first, last, n))]


def classify(sweep: Sweep, gap_threshold: float = DEFAULT_GAP_THRESHOLD,
             min_gap_degrees: int = DEFAULT_MIN_GAP_DEGREES) -> Classification:
    """Split the in-arc degrees of a sweep into gaps and walls.

    A degree is a gap point when its range exceeds ``gap_threshold`` or it has
    no return. Gap runs shorter than ``min_gap_degrees`` are absorbed by the
    walls around them. Gap width is the chord between the bounding wall
    samples; the centroid sits at ``gap_threshold`` from the sensor, in the
    direction of the chord midpoint.
    """
    if not 0 < gap_threshold <= sweep.max_range:
        raise ValueError("gap_threshold must lie in (0, max_range]")
    if min_gap_degrees < 1:
        raise ValueError("min_gap_degrees must be >= 1")
    if not sweep.valid.any():
        return Classification([], [], True)

    order = arc_order(sweep.arc)
    circular = sweep.arc == "full"
    n = len(order)
    r = sweep.ranges[order]
    wall_pt = np.isfinite(r) & (r <= gap_threshold)
    is_gap = ~wall_pt

    for first, last, label in _runs(is_gap, circular):
        if label and _run_len(first, last, n) < min_gap_degrees:
            is_gap[_positions(first, last, n)] = False

    pose = sweep.origin_pose
    heading = pose.heading
    origin = np.array([pose.x, pose.y])

    def bearing_of(deg: float) -> float:
        return heading + math.radians(deg)

    def bounding_point(deg: int) -> Point2:
        deg %= N_DEGREES
        rng = sweep.ranges[deg]
        if not (np.isfinite(rng) and rng <= gap_threshold):
            rng = gap_threshold
        b = bearing_of(deg)
        return Point2(origin[0] + rng * math.cos(b), origin[1] + rng * math.sin(b))

    runs = _runs(is_gap, circular)
    gap_runs: list[tuple[int, int]] = []
    for first, last, label in runs:
        if not label:
            continue
        span = _run_len(first, last, n)
        if circular and span == n:
            first = 0
        # a chord across more than a half-turn runs behind the sensor, so wide runs are cut into
        # equal pieces of at most half a turn (a full circle becomes two half-circles)
        pieces = -(-span // MAX_GAP_SPAN)
        for k in range(pieces):
            a = first + (k * span) // pieces
            b = first + ((k + 1) * span) // pieces - 1
            gap_runs.append((a % n, b % n))

    gaps = []
    for first, last in gap_runs:
        d0 = int(order[first])
        d1 = int(order[last])
        left = bounding_point(d0 - 1)
        right = bounding_point(d1 + 1)
        width = left.distance_to(right)
        span = _run_len(first, last, n)
        bisector = bearing_of(d0 + (span - 1) / 2.0)
        mid_bearing = math.atan2((left.y + right.y) / 2 - origin[1], (left.x + right.x) / 2 - origin[0])
        half = math.radians(span + 1) / 2.0
        if span < N_DEGREES / 2 and abs(normalize_angle(mid_bearing - bisector)) < half:
            bisector = mid_bearing
        centroid = Point2(origin[0] + gap_threshold * math.cos(bisector),
                          origin[1] + gap_threshold * math.sin(bisector))
        gaps.append(GapDescriptor(d0, d1, width, centroid, left, right))

    walls = []
    for first, last, label in runs:
        if label:
            continue
        pos = _positions(first, last, n)
        degs = order[pos]
        pts = []
        for d in degs:
            rng = sweep.ranges[d]
            if np.isfinite(rng) and rng <= gap_threshold:
                b = bearing_of(int(d))
                pts.append(Point2(origin[0] + rng * math.cos(b), origin[1] + rng * math.sin(b)))
        walls.append(WallDescriptor(int(degs[0]), int(degs[-1]), tuple(pts)))
    return Classification(gaps, walls, False)


def extract_features(sweep: Sweep, jump_threshold: float = DEFAULT_JUMP_THRESHOLD) -> list[Feature]:
    """Jump edges: nearer sample of each large first difference of the valid ranges.

    Invalid slots are skipped, so the difference is taken between successive
    valid samples in scan order (wrapping around for a full sweep).
    """
    if not jump_threshold > 0:
        raise ValueError("jump_threshold must be positive")
    order = arc_order(sweep.arc)
    r = sweep.ranges[order]
    n = len(order)
    valid = np.flatnonzero(np.isfinite(r))
    m = len(valid)
    pairs = m if (sweep.arc == "full" and m > 2) else m - 1
    hits: list[int] = []  # sequence positions of nearer samples
    for k in range(max(pairs, 0)):
        i, j = valid[k], valid[(k + 1) % m]
        a, b = r[i], r[j]
        if abs(b - a) > jump_threshold:
            hits.append(int(i if a < b else j))
    if not hits:
        return []
    hits = sorted(set(hits))
    groups: list[list[int]] = [[hits[0]]]
    for h in hits[1:]:
        if h - groups[-1][-1] <= FEATURE_MERGE_DEGREES:
            groups[-1].append(h)
        else:
            groups.append([h])
    if sweep.arc == "full" and len(groups) > 1 and (groups[0][0] + n) - groups[-1][-1] <= FEATURE_MERGE_DEGREES:
        groups[0] = groups.pop() + groups[0]

    pose = sweep.origin_pose
    feats = []
    for g in groups:
        best = min(g, key=lambda i: (r[i], i))
        d = int(order[best])
        rng = float(r[best])
        rel = normalize_angle(math.radians(d))
        b = pose.heading + rel
        feats.append(Feature(Point2(pose.x + rng * math.cos(b), pose.y + rng * math.sin(b)), rng, rel, d))
    return feats
