"""Robust similarity-transform alignment of drifted features to reference features.

Finds scale, rotation and translation with ``scale * R(alpha) @ l_i + t ~= r_i``
by minimising the sum of Euclidean residual norms. The minimisation runs as
iteratively reweighted least squares around the closed-form weighted fit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .geometry import Point2, Pose, normalize_angle, rotation
from .scan_analysis import Feature

WEIGHT_EPS = 1e-6
SCALE_BOUNDS = (0.9, 1.1)


class DegenerateGeometryError(ValueError):
    pass


@dataclass(frozen=True)
class SimilarityTransform:
    scale: float = 1.0
    rotation: float = 0.0
    tx: float = 0.0
    ty: float = 0.0

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("scale must be positive")

    @property
    def R(self) -> np.ndarray:
        return rotation(self.rotation)

    @property
    def t(self) -> np.ndarray:
        return np.array([self.tx, self.ty])

    def apply_array(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        return self.scale * pts @ self.R.T + self.t

    def apply_pose(self, pose: Pose) -> Pose:
        x, y = self.apply_array(np.array([[pose.x, pose.y]]))[0]
        return Pose(Point2(float(x), float(y)), normalize_angle(pose.heading + self.rotation))

    def inverse(self) -> "SimilarityTransform":
        inv_scale = 1.0 / self.scale
        t = -inv_scale * (rotation(-self.rotation) @ self.t)
        return SimilarityTransform(inv_scale, normalize_angle(-self.rotation), float(t[0]), float(t[1]))

    def is_identity(self) -> bool:
        return self.scale == 1.0 and self.rotation == 0.0 and self.tx == 0.0 and self.ty == 0.0


IDENTITY = SimilarityTransform()


@dataclass(frozen=True)
class Correspondence:
    observed: Point2
    reference: Point2


@dataclass
class FitReport:
    transform: SimilarityTransform
    iterations: int
    objective_history: list[float] = field(default_factory=list)
    converged: bool = False


def apply_transform(T: SimilarityTransform, points: Sequence[Point2]) -> list[Point2]:
    if not points:
        return []
    arr = T.apply_array(np.array([(p.x, p.y) for p in points]))
    return [Point2(float(x), float(y)) for x, y in arr]


def match_features(observed: Sequence[Feature | Point2], reference: Sequence[Feature | Point2],
                   gate_radius: float) -> list[Correspondence]:
    """Mutual nearest neighbours closer than ``gate_radius``."""
    if not gate_radius > 0:
        raise ValueError("gate_radius must be positive")
    if not observed or not reference:
        return []
    obs = [f.position if isinstance(f, Feature) else f for f in observed]
    ref = [f.position if isinstance(f, Feature) else f for f in reference]
    a = np.array([(p.x, p.y) for p in obs])
    b = np.array([(p.x, p.y) for p in ref])
    d = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=2)
    best_ref = d.argmin(axis=1)
    best_obs = d.argmin(axis=0)
    pairs = []
    for i, j in enumerate(best_ref):
        if best_obs[j] == i and d[i, j] <= gate_radius:
            pairs.append(Correspondence(obs[i], ref[j]))
    return pairs


def _weighted_fit(L: np.ndarray, Rf: np.ndarray, w: np.ndarray) -> tuple[float, float, np.ndarray]:
    wsum = w.sum()
    lbar = (w[:, None] * L).sum(axis=0) / wsum
    rbar = (w[:, None] * Rf).sum(axis=0) / wsum
    lc = L - lbar
    rc = Rf - rbar
    a = float((w * (lc[:, 0] * rc[:, 0] + lc[:, 1] * rc[:, 1])).sum())
    b = float((w * (lc[:, 0] * rc[:, 1] - lc[:, 1] * rc[:, 0])).sum())
    ll = float((w * (lc ** 2).sum(axis=1)).sum())
    alpha = math.atan2(b, a)
    scale = math.hypot(a, b) / ll
    # the objective is convex in scale for fixed alpha, so clipping keeps the constrained optimum
    scale = min(max(scale, SCALE_BOUNDS[0]), SCALE_BOUNDS[1])
    t = rbar - scale * (rotation(alpha) @ lbar)
    return scale, alpha, t


def _residuals(L, Rf, scale, alpha, t) -> np.ndarray:
    return np.linalg.norm(scale * L @ rotation(alpha).T + t - Rf, axis=1)


def fit_transform(pairs: Sequence[Correspondence], max_iterations: int = 100,
                  tolerance: float = 1e-10) -> FitReport:
    """IRLS fit with per-round objective history. See :func:`estimate_transform`."""
    if len(pairs) < 2:
        raise DegenerateGeometryError("need at least two correspondences")
    L = np.array([(c.observed.x, c.observed.y) for c in pairs])
    Rf = np.array([(c.reference.x, c.reference.y) for c in pairs])
    if np.ptp(L, axis=0).max() < 1e-12:
        raise DegenerateGeometryError("all observed points coincide")

    w = np.ones(len(L))
    scale, alpha, t = _weighted_fit(L, Rf, w)
    res = _residuals(L, Rf, scale, alpha, t)
    history = [float(res.sum())]
    converged = False
    it = 1
    while it < max_iterations:
        w = 1.0 / np.maximum(res, WEIGHT_EPS)
        n_scale, n_alpha, n_t = _weighted_fit(L, Rf, w)
        n_res = _residuals(L, Rf, n_scale, n_alpha, n_t)
        it += 1
        change = max(abs(n_scale - scale), abs(normalize_angle(n_alpha - alpha)), float(np.abs(n_t - t).max()))
        if n_res.sum() > history[-1]:
            # past the smoothing floor a reweighted step can fail to descend; keep the better point
            break
        scale, alpha, t, res = n_scale, n_alpha, n_t, n_res
        history.append(float(res.sum()))
        if change < tolerance:
            converged = True
            break
    T = SimilarityTransform(float(scale), normalize_angle(alpha), float(t[0]), float(t[1]))
    return FitReport(T, it, history, converged)


def estimate_transform(pairs: Sequence[Correspondence], max_iterations: int = 100,
                       tolerance: float = 1e-10) -> SimilarityTransform:
    """Similarity transform minimising the summed residual norms over ``pairs``.

    Raises DegenerateGeometryError for fewer than two pairs or coincident
    observed points.
    """
    return fit_transform(pairs, max_iterations, tolerance).transform


def transform_objective(T: SimilarityTransform, pairs: Sequence[Correspondence]) -> float:
    L = np.array([(c.observed.x, c.observed.y) for c in pairs])
    Rf = np.array([(c.reference.x, c.reference.y) for c in pairs])
    return float(_residuals(L, Rf, T.scale, T.rotation, T.t).sum())
