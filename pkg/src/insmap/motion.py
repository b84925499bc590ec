"""Kinematic omni-directional mover with noisy odometry.

The true pose follows the commanded straight segments exactly and its
heading tracks the travel bearing. Odometry integrates the same body-frame
increments corrupted by Gaussian noise and occasional slip, so it drifts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .environment import EnvironmentModel, is_pose_free
from .geometry import Point2, Pose, normalize_angle


@dataclass(frozen=True)
class MotionConfig:
    step_length: float = 0.05
    odo_noise_trans: float = 0.01
    odo_noise_rot: float = 0.002
    slip_probability: float = 0.01
    slip_magnitude: float = 0.03
    rng_seed: int = 0

    def __post_init__(self):
        if not self.step_length > 0:
            raise ValueError("step_length must be positive")
        if min(self.odo_noise_trans, self.odo_noise_rot, self.slip_magnitude) < 0:
            raise ValueError("noise parameters must be >= 0")
        if not 0 <= self.slip_probability <= 1:
            raise ValueError("slip_probability must lie in [0, 1]")

    @classmethod
    def noiseless(cls, **kw) -> "MotionConfig":
        return cls(odo_noise_trans=0.0, odo_noise_rot=0.0, slip_probability=0.0, slip_magnitude=0.0, **kw)


@dataclass(frozen=True)
class MotionLogEntry:
    commanded_delta: tuple[float, float, float]
    true_pose: Pose
    odometry_pose: Pose


class CollisionError(RuntimeError):
    def __init__(self, message: str, last_safe_pose: Pose, log: list[MotionLogEntry]):
        super().__init__(message)
        self.last_safe_pose = last_safe_pose
        self.log = log


def execute_path(model: EnvironmentModel, start: Pose, waypoints: Sequence[Point2], cfg: MotionConfig,
                 rng: np.random.Generator, odometry_start: Optional[Pose] = None) -> list[MotionLogEntry]:
    """Drive through ``waypoints`` in straight lines, in steps of at most ``cfg.step_length``.

    Raises CollisionError as soon as a step would leave free space.
    """
    odo0 = odometry_start or start
    # odometry is tracked as an offset from truth so zero noise reproduces truth bit for bit
    err_x = odo0.x - start.x
    err_y = odo0.y - start.y
    err_h = normalize_angle(odo0.heading - start.heading)

    x, y, h = start.x, start.y, start.heading
    log: list[MotionLogEntry] = []
    last_safe = start
    for wp in waypoints:
        dx_total, dy_total = wp.x - x, wp.y - y
        length = math.hypot(dx_total, dy_total)
        if length < 1e-12:
            continue
        bearing = math.atan2(dy_total, dx_total)
        n_steps = max(1, math.ceil(length / cfg.step_length - 1e-9))
        s = length / n_steps
        ux, uy = math.cos(bearing), math.sin(bearing)
        for k in range(n_steps):
            n_trans, n_rot = rng.standard_normal(2)
            slip_draw, slip_dir = rng.random(2)

            dtheta = normalize_angle(bearing - h)
            if k == n_steps - 1:
                nx, ny = wp.x, wp.y
            else:
                nx, ny = x + s * ux, y + s * uy
            step_dx, step_dy = nx - x, ny - y
            if not is_pose_free(model, Point2(nx, ny)):
                raise CollisionError(f"collision at ({nx:.3f}, {ny:.3f})", last_safe, log)

            err_h = normalize_angle(err_h + n_rot * cfg.odo_noise_rot)
            s_meas = s * (1.0 + n_trans * cfg.odo_noise_trans)
            odo_b = bearing + err_h
            err_x += s_meas * math.cos(odo_b) - s * ux
            err_y += s_meas * math.sin(odo_b) - s * uy
            if slip_draw < cfg.slip_probability:
                phi = 2.0 * math.pi * slip_dir
                err_x += cfg.slip_magnitude * math.cos(phi)
                err_y += cfg.slip_magnitude * math.sin(phi)

            x, y, h = nx, ny, bearing
            true_pose = Pose(Point2(x, y), h)
            odo_pose = Pose(Point2(x + err_x, y + err_y), normalize_angle(h + err_h))
            log.append(MotionLogEntry((step_dx, step_dy, dtheta), true_pose, odo_pose))
            last_safe = true_pose
    return log


def relative_motion(a: Pose, b: Pose) -> tuple[float, float, float]:
    """Displacement from ``a`` to ``b`` expressed in ``a``'s body frame."""
    dx, dy = b.x - a.x, b.y - a.y
    c, s = math.cos(a.heading), math.sin(a.heading)
    return c * dx + s * dy, -s * dx + c * dy, normalize_angle(b.heading - a.heading)


def compose(p: Pose, delta: tuple[float, float, float]) -> Pose:
    fx, fy, dth = delta
    c, s = math.cos(p.heading), math.sin(p.heading)
    return Pose(Point2(p.x + c * fx - s * fy, p.y + s * fx + c * fy), normalize_angle(p.heading + dth))
