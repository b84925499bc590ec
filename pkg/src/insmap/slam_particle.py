"""Monte Carlo localisation over jump-edge landmarks.

Particles live in an (n, 3) array of ``x, y, heading`` rows with a weight
vector alongside. One cycle is predict -> weigh -> resample -> estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .geometry import Point2, Pose, normalize_angle, normalize_angles

LANDMARK_GATE = 0.5
FLOOR_SIGMAS = 5.0


@dataclass(frozen=True)
class FilterNoise:
    sigma_trans: float = 0.02
    sigma_rot: float = 0.01
    sigma_d: float = 0.05
    sigma_alpha: float = 0.02

    def __post_init__(self):
        if min(self.sigma_trans, self.sigma_rot, self.sigma_d, self.sigma_alpha) < 0:
            raise ValueError("noise parameters must be >= 0")


@dataclass(frozen=True)
class Particle:
    pose: Pose
    weight: float


@dataclass
class ParticleSet:
    poses: np.ndarray  # (n, 3)
    weights: np.ndarray  # (n,)
    rng_seed: int = 0
    degenerate: bool = False

    def __post_init__(self):
        self.poses = np.asarray(self.poses, dtype=float).reshape(-1, 3)
        self.weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if len(self.poses) < 1:
            raise ValueError("a particle set needs at least one particle")
        if len(self.weights) != len(self.poses):
            raise ValueError("one weight per particle")

    def __len__(self) -> int:
        return len(self.poses)

    @property
    def particles(self) -> list[Particle]:
        return [Particle(Pose(Point2(float(x), float(y)), float(h)), float(w))
                for (x, y, h), w in zip(self.poses, self.weights)]

    def effective_sample_size(self) -> float:
        w = self.weights / self.weights.sum()
        return float(1.0 / np.sum(w ** 2))


@dataclass(frozen=True)
class Estimate:
    pose: Pose
    degenerate: bool = False


def initialize(n: int, initial_pose: Pose, spread: FilterNoise, rng: np.random.Generator,
               rng_seed: int = 0) -> ParticleSet:
    """n particles drawn around ``initial_pose`` with uniform weights."""
    if n < 1:
        raise ValueError("n must be >= 1")
    noise = rng.standard_normal((n, 3))
    poses = np.empty((n, 3))
    poses[:, 0] = initial_pose.x + spread.sigma_trans * noise[:, 0]
    poses[:, 1] = initial_pose.y + spread.sigma_trans * noise[:, 1]
    poses[:, 2] = normalize_angles(initial_pose.heading + spread.sigma_rot * noise[:, 2])
    return ParticleSet(poses, np.full(n, 1.0 / n), rng_seed)


def predict(pset: ParticleSet, control: tuple[float, float, float], noise: FilterNoise,
            rng: np.random.Generator) -> ParticleSet:
    """Move every particle by a body-frame control ``(forward, left, dtheta)``.

    The heading turns first, the translation is applied in the particle's own
    frame, then independent Gaussian noise is added per axis.
    """
    fx, fy, dth = control
    p = pset.poses
    n = len(p)
    eps = rng.standard_normal((n, 3))
    c, s = np.cos(p[:, 2]), np.sin(p[:, 2])
    out = np.empty_like(p)
    out[:, 0] = p[:, 0] + c * fx - s * fy + noise.sigma_trans * eps[:, 0]
    out[:, 1] = p[:, 1] + s * fx + c * fy + noise.sigma_trans * eps[:, 1]
    out[:, 2] = normalize_angles(p[:, 2] + dth + noise.sigma_rot * eps[:, 2])
    return replace(pset, poses=out, weights=pset.weights.copy(), degenerate=False)


def _log_gauss(x: np.ndarray, sigma: float) -> np.ndarray:
    return -0.5 * (x / sigma) ** 2 - math.log(sigma * math.sqrt(2.0 * math.pi))


def log_likelihoods(poses: np.ndarray, observed: Sequence[tuple[float, float]],
                    landmarks: np.ndarray, noise: FilterNoise, gate: float = LANDMARK_GATE) -> np.ndarray:
    """Per-particle log of the product of range and bearing Gaussians."""
    n = len(poses)
    if len(observed) == 0:
        return np.zeros(n)
    obs = np.asarray(observed, dtype=float).reshape(-1, 2)
    d, a = obs[:, 0][None, :], obs[:, 1][None, :]
    x, y, h = poses[:, 0:1], poses[:, 1:2], poses[:, 2:3]
    wx = x + d * np.cos(h + a)
    wy = y + d * np.sin(h + a)
    floor = _log_gauss(np.array(FLOOR_SIGMAS * noise.sigma_d), noise.sigma_d) + \
        _log_gauss(np.array(FLOOR_SIGMAS * noise.sigma_alpha), noise.sigma_alpha)
    lm = np.asarray(landmarks, dtype=float).reshape(-1, 2)
    if len(lm) == 0:
        return np.full(n, float(floor) * obs.shape[0])
    dist = np.hypot(wx[..., None] - lm[:, 0], wy[..., None] - lm[:, 1])  # (n, k, m)
    j = dist.argmin(axis=2)
    matched = np.take_along_axis(dist, j[..., None], axis=2)[..., 0] <= gate
    lx, ly = lm[j, 0], lm[j, 1]
    d_hat = np.hypot(lx - x, ly - y)
    a_hat = np.arctan2(ly - y, lx - x) - h
    da = normalize_angles(a - a_hat)
    ll = _log_gauss(d - d_hat, noise.sigma_d) + _log_gauss(da, noise.sigma_alpha)
    ll = np.where(matched, ll, floor)
    return ll.sum(axis=1)


def weigh(pset: ParticleSet, observed_features: Sequence[tuple[float, float]], landmark_map: Sequence[Point2] | np.ndarray,
          noise: FilterNoise) -> ParticleSet:
    """Multiply weights by the measurement likelihood and normalise.

    ``observed_features`` are ``(range, bearing)`` pairs relative to the
    sensor. Each is associated with the nearest landmark to its world
    projection; unmatched features contribute the density at five sigma.
    """
    if not (noise.sigma_d > 0 and noise.sigma_alpha > 0):
        raise ValueError("sigma_d and sigma_alpha must be positive to weigh")
    lm = _landmark_array(landmark_map)
    ll = log_likelihoods(pset.poses, observed_features, lm, noise)
    with np.errstate(divide="ignore"):
        logw = np.log(pset.weights) + ll
    top = logw.max()
    if not np.isfinite(top):
        n = len(pset)
        return replace(pset, weights=np.full(n, 1.0 / n), degenerate=True)
    w = np.exp(logw - top)
    return replace(pset, weights=w / w.sum(), degenerate=False)


def unnormalized_weights(pset: ParticleSet, observed_features, landmark_map, noise: FilterNoise) -> np.ndarray:
    return np.exp(log_likelihoods(pset.poses, observed_features, _landmark_array(landmark_map), noise))


def _landmark_array(landmark_map) -> np.ndarray:
    if isinstance(landmark_map, np.ndarray):
        return landmark_map.reshape(-1, 2)
    return np.array([(p.x, p.y) for p in landmark_map]).reshape(-1, 2)


def resample(pset: ParticleSet, rng: np.random.Generator) -> ParticleSet:
    """Resampling wheel: draws with replacement, probability proportional to weight."""
    w = pset.weights
    n = len(w)
    wmax = float(w.max())
    index = int(rng.integers(n))
    steps = rng.uniform(0.0, 2.0 * wmax, size=n)
    beta = 0.0
    picks = np.empty(n, dtype=int)
    for k in range(n):
        beta += steps[k]
        while beta > w[index]:
            beta -= w[index]
            index = (index + 1) % n
        picks[k] = index
    return replace(pset, poses=pset.poses[picks].copy(), weights=np.full(n, 1.0 / n), degenerate=False)


def estimate(pset: ParticleSet, previous: Optional[Pose] = None) -> Estimate:
    """Mean position and circular-mean heading of the particles.

    The heading is ``atan2(sum sin, sum cos)``. When the summed unit vectors cancel the
    heading is undefined and ``previous`` is returned, flagged.
    """
    p = pset.poses
    # offsets from the first particle keep identical sets exact
    x = float(p[0, 0] + (p[:, 0] - p[0, 0]).mean())
    y = float(p[0, 1] + (p[:, 1] - p[0, 1]).mean())
    ss = float(np.sin(p[:, 2]).sum())
    cs = float(np.cos(p[:, 2]).sum())
    if math.hypot(ss, cs) < 1e-12 * len(p):
        if previous is None:
            return Estimate(Pose(Point2(x, y), 0.0), True)
        return Estimate(previous, True)
    if np.all(p[:, 2] == p[0, 2]):
        heading = float(p[0, 2])
    else:
        heading = math.atan2(ss, cs)
    return Estimate(Pose(Point2(x, y), normalize_angle(heading)), False)
