"""Simulated one-sample-per-degree laser range finder."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Literal

import numpy as np

from .environment import EnvironmentModel
from .geometry import Point2, Pose, normalize_angles, ray_distances

N_DEGREES = 360
FORWARD_HALF_ARC = 150

Arc = Literal["full", "forward"]


@dataclass(frozen=True)
class LidarConfig:
    max_range: float = 3.0
    noise_sigma_fraction: float = 0.015
    realizations: int = 5
    dropout_probability: float = 0.02
    rng_seed: int = 0

    def __post_init__(self):
        if not self.max_range > 0:
            raise ValueError("max_range must be positive")
        if self.realizations < 1:
            raise ValueError("realizations must be >= 1")
        if self.noise_sigma_fraction < 0:
            raise ValueError("noise_sigma_fraction must be >= 0")
        if not 0 <= self.dropout_probability < 1:
            raise ValueError("dropout_probability must lie in [0, 1)")

    @classmethod
    def noiseless(cls, **kw) -> "LidarConfig":
        return cls(noise_sigma_fraction=0.0, realizations=1, dropout_probability=0.0, **kw)


def arc_mask(arc: Arc) -> np.ndarray:
    if arc == "full":
        return np.ones(N_DEGREES, dtype=bool)
    if arc == "forward":
        d = np.arange(N_DEGREES)
        return (d <= FORWARD_HALF_ARC) | (d >= N_DEGREES - FORWARD_HALF_ARC)
    raise ValueError(f"unknown arc {arc!r}")


def arc_order(arc: Arc) -> np.ndarray:
    """In-arc degree indices in angular order (forward arcs start at -150 deg)."""
    if arc == "full":
        return np.arange(N_DEGREES)
    return np.r_[np.arange(N_DEGREES - FORWARD_HALF_ARC, N_DEGREES), np.arange(0, FORWARD_HALF_ARC + 1)]


@dataclass(frozen=True)
class Sweep:
    """360 per-degree slots; ``ranges`` holds NaN where a slot is invalid."""

    ranges: np.ndarray
    origin_pose: Pose
    arc: Arc = "full"
    max_range: float = 3.0

    def __post_init__(self):
        r = np.array(self.ranges, dtype=float)
        if r.shape != (N_DEGREES,):
            raise ValueError("a sweep has exactly 360 slots")
        r[~arc_mask(self.arc)] = np.nan
        bad = np.isfinite(r) & ((r <= 0) | (r > self.max_range))
        if bad.any():
            raise ValueError("valid ranges must lie in (0, max_range]")
        r[~np.isfinite(r)] = np.nan
        r.setflags(write=False)
        object.__setattr__(self, "ranges", r)

    @property
    def valid(self) -> np.ndarray:
        return np.isfinite(self.ranges)

    @property
    def in_arc(self) -> np.ndarray:
        return arc_mask(self.arc)

    def bearings(self, pose: Pose | None = None) -> np.ndarray:
        pose = pose or self.origin_pose
        return normalize_angles(pose.heading + np.radians(np.arange(N_DEGREES)))

    def reanchored(self, pose: Pose) -> "Sweep":
        """The same measurements interpreted from another (e.g. estimated) pose."""
        return replace(self, origin_pose=pose)

    def points_array(self, pose: Pose | None = None) -> np.ndarray:
        pose = pose or self.origin_pose
        v = self.valid
        b = self.bearings(pose)[v]
        r = self.ranges[v]
        return np.column_stack([pose.x + r * np.cos(b), pose.y + r * np.sin(b)])


def scan(model: EnvironmentModel, pose: Pose, arc: Arc, cfg: LidarConfig,
         rng: np.random.Generator) -> Sweep:
    """Take one sweep from ``pose``.

    Each in-arc degree is cast against the world; the reported range is the
    median of ``cfg.realizations`` noisy draws ``true * (1 + eps)``. Draws can
    drop out, and a degree with more than half its draws dropped is invalid.
    """
    mask = arc_mask(arc)
    bearings = normalize_angles(pose.heading + np.radians(np.arange(N_DEGREES)))
    true = np.full(N_DEGREES, np.inf)
    true[mask] = ray_distances(pose.position.as_array(), bearings[mask], model.segment_array, cfg.max_range)

    # draws are taken for all slots so the stream does not depend on the arc
    k = cfg.realizations
    eps = rng.standard_normal((k, N_DEGREES)) * cfg.noise_sigma_fraction
    dropped = rng.random((k, N_DEGREES)) < cfg.dropout_probability
    draws = true[None, :] * (1.0 + eps)
    draws = np.where(dropped, np.nan, draws)

    hit = np.isfinite(true)
    out = np.full(N_DEGREES, np.nan)
    kept = (~dropped).sum(axis=0)
    ok = hit & (kept * 2 >= k) & (kept > 0)
    if k == 1:
        out[ok] = draws[0, ok]
    elif ok.any():
        out[ok] = np.nanmedian(draws[:, ok], axis=0)
    out = np.where(np.isfinite(out), np.clip(out, 1e-9, cfg.max_range), np.nan)
    return Sweep(out, pose, arc, cfg.max_range)


def sweep_to_points(sweep: Sweep, assumed_pose: Pose) -> list[Point2]:
    return [Point2(float(x), float(y)) for x, y in sweep.points_array(assumed_pose)]


def degree_of_bearing(pose: Pose, bearing: np.ndarray | float) -> np.ndarray:
    """Nearest sweep slot index for absolute bearings seen from ``pose``."""
    rel = np.degrees(np.asarray(bearing) - pose.heading)
    return np.mod(np.rint(rel), N_DEGREES).astype(int)
