"""Global point map built from sweeps, with retroactive corrections and exports."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

import numpy as np
from scipy.spatial import cKDTree

from .environment import EnvironmentModel
from .geometry import Point2, Pose, point_segment_distances
from .lidar import Sweep
from .slam_similarity import SimilarityTransform

COVERAGE_STEP = 0.05
COVERAGE_RADIUS = 0.15


@dataclass(frozen=True)
class MapPoint:
    position: Point2
    source_node: int
    source_degree: int


@dataclass(frozen=True)
class PointChunk:
    xy: np.ndarray  # (k, 2), read-only
    node: int
    degrees: np.ndarray  # (k,)


@dataclass(frozen=True)
class TrajectoryEntry:
    t: int
    node: int  # node this leg of travel leads to
    true: Pose
    odometry: Pose
    corrected: Pose


@dataclass
class GlobalMap:
    chunks: list[PointChunk] = field(default_factory=list)
    trajectory: list[TrajectoryEntry] = field(default_factory=list)

    def __len__(self) -> int:
        return sum(len(c.xy) for c in self.chunks)

    @property
    def xy(self) -> np.ndarray:
        if not self.chunks:
            return np.zeros((0, 2))
        return np.vstack([c.xy for c in self.chunks])

    @property
    def points(self) -> Iterator[MapPoint]:
        for c in self.chunks:
            for (x, y), d in zip(c.xy, c.degrees):
                yield MapPoint(Point2(float(x), float(y)), c.node, int(d))


class MapError(NamedTuple):
    mean_point_to_wall: float
    hausdorff: float
    coverage_fraction: float


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def integrate_sweep(gmap: GlobalMap, sweep: Sweep, estimated_pose: Pose, node: int) -> GlobalMap:
    """Project the sweep's valid samples from ``estimated_pose`` and append them."""
    degs = np.flatnonzero(sweep.valid)
    degs.setflags(write=False)
    gmap.chunks.append(PointChunk(_frozen(sweep.points_array(estimated_pose)), node, degs))
    return gmap


def record_pose(gmap: GlobalMap, node: int, true: Pose, odometry: Pose, corrected: Pose) -> GlobalMap:
    gmap.trajectory.append(TrajectoryEntry(len(gmap.trajectory), node, true, odometry, corrected))
    return gmap


def apply_correction(gmap: GlobalMap, node: int, T: SimilarityTransform) -> GlobalMap:
    """Remap every point and corrected trajectory pose sourced at or after ``node``."""
    for i, c in enumerate(gmap.chunks):
        if c.node >= node and len(c.xy):
            gmap.chunks[i] = PointChunk(_frozen(T.apply_array(c.xy)), c.node, c.degrees)
    for i, e in enumerate(gmap.trajectory):
        if e.node >= node:
            gmap.trajectory[i] = TrajectoryEntry(e.t, e.node, e.true, e.odometry, T.apply_pose(e.corrected))
    return gmap


def perimeter_samples(truth: EnvironmentModel, step: float = COVERAGE_STEP) -> np.ndarray:
    out = []
    for ax, ay, bx, by in truth.segment_array:
        length = float(np.hypot(bx - ax, by - ay))
        k = max(1, int(np.ceil(length / step)))
        t = (np.arange(k) + 0.5) / k
        out.append(np.column_stack([ax + t * (bx - ax), ay + t * (by - ay)]))
    return np.vstack(out)


def map_error(gmap: GlobalMap, truth: EnvironmentModel) -> MapError:
    """Point-to-wall mean and max distance, and the fraction of wall length observed."""
    xy = gmap.xy
    if len(xy) == 0:
        raise ValueError("map is empty")
    segs = truth.segment_array
    nearest = np.empty(len(xy))
    for lo in range(0, len(xy), 4096):
        nearest[lo:lo + 4096] = point_segment_distances(xy[lo:lo + 4096], segs).min(axis=1)
    samples = perimeter_samples(truth)
    d, _ = cKDTree(xy).query(samples)
    coverage = float(np.mean(d <= COVERAGE_RADIUS))
    return MapError(float(nearest.mean()), float(nearest.max()), coverage)


def dump_map(gmap: GlobalMap) -> str:
    lines = []
    for c in gmap.chunks:
        for (x, y), d in zip(c.xy, c.degrees):
            lines.append(f"{float(x)!r} {float(y)!r} {c.node} {int(d)}")
    return "\n".join(lines) + ("\n" if lines else "")


def dump_trajectory(gmap: GlobalMap) -> str:
    lines = []
    for e in gmap.trajectory:
        vals = [e.true.x, e.true.y, e.true.heading, e.odometry.x, e.odometry.y, e.odometry.heading,
                e.corrected.x, e.corrected.y, e.corrected.heading]
        lines.append(f"{e.t} " + " ".join(repr(float(v)) for v in vals))
    return "\n".join(lines) + ("\n" if lines else "")


def render_svg(gmap: GlobalMap, truth: EnvironmentModel, scale: float = 80.0, margin: float = 0.5) -> str:
    """Map points, true walls and the three trajectories as a standalone SVG document."""
    segs = truth.segment_array
    xs = np.r_[segs[:, 0], segs[:, 2]]
    ys = np.r_[segs[:, 1], segs[:, 3]]
    x0, x1 = xs.min() - margin, xs.max() + margin
    y0, y1 = ys.min() - margin, ys.max() + margin
    w, h = (x1 - x0) * scale, (y1 - y0) * scale

    def px(x, y):
        return (x - x0) * scale, (y1 - y) * scale

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w:.1f}" height="{h:.1f}" '
        f'viewBox="0 0 {w:.1f} {h:.1f}">',
        f'<rect x="0" y="0" width="{w:.1f}" height="{h:.1f}" fill="white"/>',
        '<g id="walls" stroke="#888" stroke-width="2">',
    ]
    for ax, ay, bx, by in segs:
        (sx, sy), (ex, ey) = px(ax, ay), px(bx, by)
        parts.append(f'<line x1="{sx:.1f}" y1="{sy:.1f}" x2="{ex:.1f}" y2="{ey:.1f}"/>')
    parts.append("</g>")
    parts.append('<g id="map" fill="#1f4fbf">')
    for x, y in gmap.xy:
        cx, cy = px(x, y)
        parts.append(f'<circle cx="{cx:.1f}" cy="{cy:.1f}" r="1.2"/>')
    parts.append("</g>")
    for name, color, attr in (("true", "#2a9d3a", "true"), ("odometry", "#d62728", "odometry"),
                              ("corrected", "#ff9f1c", "corrected")):
        pts = [px(getattr(e, attr).x, getattr(e, attr).y) for e in gmap.trajectory]
        if len(pts) < 2:
            continue
        path = " ".join(f"{x:.1f},{y:.1f}" for x, y in pts)
        parts.append(f'<polyline id="{name}" fill="none" stroke="{color}" stroke-width="1.5" points="{path}"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
