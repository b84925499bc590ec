"""Closed-loop exploration episodes and the min-gap vs max-gap comparison."""

from __future__ import annotations

import dataclasses
import math
import time
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import navigation as nav
from .config import RunConfig
from .environment import EnvironmentModel, read_environment
from .geometry import Point2, Pose, normalize_angle
from .lidar import Sweep, scan
from .mapper import GlobalMap, MapError, apply_correction, integrate_sweep, map_error, record_pose
from .motion import CollisionError, compose, execute_path, relative_motion
from .scan_analysis import Feature, classify, extract_features
from .slam_particle import FilterNoise, ParticleSet, estimate, initialize, predict, resample, weigh
from .slam_similarity import (
    DegenerateGeometryError,
    SimilarityTransform,
    estimate_transform,
    match_features,
)


class EpisodeError(RuntimeError):
    def __init__(self, message: str, result: "EpisodeResult"):
        super().__init__(message)
        self.result = result


@dataclass
class RunMetrics:
    node_count: int = 0
    travel_distance: float = 0.0
    sim_steps: int = 0
    complete: bool = False
    map_mean_error: float = math.nan
    map_hausdorff: float = math.nan
    map_coverage: float = math.nan
    final_pose_error: float = math.nan
    odometry_pose_error: float = math.nan
    slam_corrections: int = 0
    wall_clock: float = 0.0
    phase_seconds: dict[str, float] = field(default_factory=lambda: defaultdict(float))

    def deterministic_items(self) -> list[tuple[str, object]]:
        return [
            ("node_count", self.node_count),
            ("travel_distance", self.travel_distance),
            ("sim_steps", self.sim_steps),
            ("complete", self.complete),
            ("map_mean_error", self.map_mean_error),
            ("map_hausdorff", self.map_hausdorff),
            ("map_coverage", self.map_coverage),
            ("final_pose_error", self.final_pose_error),
            ("odometry_pose_error", self.odometry_pose_error),
            ("slam_corrections", self.slam_corrections),
        ]

    def dump(self) -> str:
        def fmt(v):
            if isinstance(v, bool):
                return str(v).lower()
            if isinstance(v, float):
                return repr(v)
            return str(v)

        return "".join(f"{k} = {fmt(v)}\n" for k, v in self.deterministic_items())

    def dump_timing(self) -> str:
        lines = [f"wall_clock = {self.wall_clock!r}"]
        lines += [f"phase.{k} = {v!r}" for k, v in sorted(self.phase_seconds.items())]
        return "\n".join(lines) + "\n"


@dataclass
class Leg:
    """One travel decision: from the node just created to a gap of ``target_node``."""

    from_node: int
    target_node: int
    gap_index: int
    path: list[int]
    planned_cost: float
    distance: float = 0.0
    arrived_node: Optional[int] = None


@dataclass
class EpisodeResult:
    map: GlobalMap
    graph: nav.NavGraph
    metrics: RunMetrics
    legs: list[Leg]
    environment: EnvironmentModel
    landmarks: np.ndarray
    error: Optional[str] = None

    def __iter__(self):
        yield self.map
        yield self.graph
        yield self.metrics


class _Timer:
    def __init__(self, metrics: RunMetrics):
        self.m = metrics

    def __call__(self, phase: str):
        timer = self

        class _Ctx:
            def __enter__(self):
                self.t0 = time.perf_counter()

            def __exit__(self, *exc):
                timer.m.phase_seconds[phase] += time.perf_counter() - self.t0

        return _Ctx()


def _streams(seed: int, cfg: RunConfig) -> tuple[np.random.Generator, ...]:
    root = np.random.SeedSequence([seed, cfg.lidar.rng_seed, cfg.motion.rng_seed])
    return tuple(np.random.default_rng(s) for s in root.spawn(3))


def _merge_landmarks(landmarks: np.ndarray, feats: Sequence[Feature], radius: float) -> np.ndarray:
    pts = [(f.position.x, f.position.y) for f in feats]
    for p in pts:
        if len(landmarks) and np.hypot(*(landmarks - p).T).min() <= radius:
            continue
        landmarks = np.vstack([landmarks, p])
    return landmarks


def _rigid_between(a: Pose, b: Pose) -> SimilarityTransform:
    """Rigid transform taking pose ``a`` onto pose ``b``."""
    alpha = normalize_angle(b.heading - a.heading)
    c, s = math.cos(alpha), math.sin(alpha)
    tx = b.x - (c * a.x - s * a.y)
    ty = b.y - (s * a.x + c * a.y)
    return SimilarityTransform(1.0, alpha, tx, ty)


def _believed_to_true(waypoints: Sequence[Point2], belief: Pose, true_pose: Pose) -> list[Point2]:
    """Where body-frame commands toward believed waypoints actually lead."""
    if belief == true_pose:
        return list(waypoints)
    dh = normalize_angle(true_pose.heading - belief.heading)
    c, s = math.cos(dh), math.sin(dh)
    out = []
    for w in waypoints:
        rx, ry = w.x - belief.x, w.y - belief.y
        out.append(Point2(true_pose.x + c * rx - s * ry, true_pose.y + s * rx + c * ry))
    return out


def run_episode(cfg: RunConfig, env: EnvironmentModel | None = None) -> EpisodeResult:
    """Explore one environment until no traversable unexplored gap is left.

    Every node: scan (full circle first, forward arc after), SLAM correction,
    classify, add node, neighbour rules, cost update, select a target, drive.
    The agent plans in its believed frame; the simulator holds the truth.
    """
    t_start = time.perf_counter()
    model = env if env is not None else read_environment(cfg.environment)
    lidar_rng, motion_rng, filter_rng = _streams(cfg.seed, cfg)
    ncfg, scfg = cfg.nav, cfg.slam_params
    radius = model.agent_radius
    diameter = 2.0 * radius

    metrics = RunMetrics()
    timed = _Timer(metrics)
    gmap = GlobalMap()
    graph = nav.NavGraph()
    legs: list[Leg] = []

    true_pose = model.start_pose
    odo = true_pose
    belief = true_pose
    landmarks = np.zeros((0, 2))
    pset: Optional[ParticleSet] = None
    if cfg.slam == "particle":
        pset = initialize(scfg.particles, belief, FilterNoise(0.0, 0.0, 1.0, 1.0), filter_rng)

    odo_at_cycle = odo
    record_pose(gmap, 0, true_pose, odo, belief)
    link_to: Optional[int] = None
    pending_gap: Optional[tuple[int, int]] = None
    arc = "full"
    error = None

    def finish() -> EpisodeResult:
        metrics.node_count = len(graph.nodes)
        if len(gmap):
            with timed("metrics"):
                me: MapError = map_error(gmap, model)
            metrics.map_mean_error, metrics.map_hausdorff, metrics.map_coverage = me
        metrics.final_pose_error = true_pose.distance_to(belief)
        metrics.odometry_pose_error = true_pose.distance_to(odo)
        metrics.wall_clock = time.perf_counter() - t_start
        return EpisodeResult(gmap, graph, metrics, legs, model, landmarks, error)

    while True:
        if len(graph.nodes) >= cfg.max_nodes:
            break
        new_id = len(graph.nodes)
        with timed("scan"):
            raw: Sweep = scan(model, true_pose, arc, cfg.lidar, lidar_rng)

        if new_id > 0 and cfg.slam != "none":
            with timed("slam"):
                before = belief
                if pset is not None:
                    # one filter cycle per node: the control is the odometry since the last one
                    pset = predict(pset, relative_motion(odo_at_cycle, odo), cfg.filter, filter_rng)
                    odo_at_cycle = odo
                belief, pset = _correct(cfg, raw, belief, landmarks, pset, filter_rng)
                if belief != before:
                    metrics.slam_corrections += 1
                    apply_correction(gmap, new_id, _rigid_between(before, belief))

        sweep = raw.reanchored(belief)
        with timed("analysis"):
            gaps, walls, _ = classify(sweep, ncfg.gap_threshold, ncfg.min_gap_degrees)
            if cfg.slam != "none":
                feats = [f for f in extract_features(sweep, scfg.jump_threshold) if f.range <= scfg.feature_max_range]
                landmarks = _merge_landmarks(landmarks, feats, scfg.landmark_merge_radius)

        with timed("navigation"):
            nid = nav.add_node(graph, belief, gaps, sweep, walls, link_to)
            if pending_gap is not None:
                nav.mark_gap_explored(graph, *pending_gap)
            nav.identify_neighbours(graph, nid, cfg.lidar.max_range, diameter, ncfg.clearance_margin)
            nav.prune_observed_gaps(graph, nid, ncfg.gap_threshold, ncfg.frontier_depth)
            graph.current_node = nid
            nav.update_cost_table(graph)
            target, waypoints = _choose(graph, cfg, radius)
        with timed("mapping"):
            integrate_sweep(gmap, sweep, belief, nid)
        if legs:
            legs[-1].arrived_node = nid

        if target is None:
            metrics.complete = True
            break
        if metrics.sim_steps >= cfg.max_steps:
            break

        leg = Leg(nid, target.node_id, target.gap_index, target.path, target.cost)
        legs.append(leg)
        true_wps = _believed_to_true(waypoints, belief, true_pose)
        try:
            with timed("motion"):
                log = execute_path(model, true_pose, true_wps, cfg.motion, motion_rng, odometry_start=odo)
        except CollisionError as exc:
            log = exc.log
            error = f"{exc} while travelling from node {nid} to node {target.node_id} gap {target.gap_index}"

        stopped = False
        for entry in log:
            prev_odo, prev_true = odo, true_pose
            odo, true_pose = entry.odometry_pose, entry.true_pose
            delta = relative_motion(prev_odo, odo)
            with timed("slam"):
                if cfg.slam == "none":
                    belief = odo
                else:
                    belief = compose(belief, delta)
            step = prev_true.distance_to(true_pose)
            leg.distance += step
            metrics.travel_distance += step
            metrics.sim_steps += 1
            record_pose(gmap, new_id + 1, true_pose, odo, belief)
            if metrics.sim_steps >= cfg.max_steps:
                stopped = True
                break
        if error is not None:
            result = finish()
            raise EpisodeError(error, result)
        if stopped:
            break
        link_to = target.node_id
        pending_gap = (target.node_id, target.gap_index)
        arc = "forward"
    return finish()


def _choose(graph: nav.NavGraph, cfg: RunConfig, radius: float):
    """Select a target and plan its final approach; unreachable gaps are retired."""
    while True:
        target = nav.select_target(graph, 2.0 * radius, cfg.strategy)
        if target is None:
            return None, []
        node = graph.nodes[target.node_id]
        approach = nav.plan_approach(node, node.gaps[target.gap_index], radius, cfg.nav.clearance_margin)
        if approach is None:
            nav.mark_gap_explored(graph, target.node_id, target.gap_index)
            continue
        return target, target.waypoints[:-1] + [approach]


def _correct(cfg: RunConfig, raw: Sweep, belief: Pose, landmarks: np.ndarray,
             pset: Optional[ParticleSet], rng: np.random.Generator):
    scfg = cfg.slam_params
    sweep = raw.reanchored(belief)
    feats = [f for f in extract_features(sweep, scfg.jump_threshold) if f.range <= scfg.feature_max_range]
    if cfg.slam == "similarity":
        refs = [Point2(float(x), float(y)) for x, y in landmarks]
        pairs = match_features([f.position for f in feats], refs, scfg.match_gate)
        if len(pairs) < 3:
            return belief, pset
        try:
            T = estimate_transform(pairs, scfg.max_iterations, scfg.tolerance)
        except DegenerateGeometryError:
            return belief, pset
        return T.apply_pose(belief), pset
    observed = [(f.range, f.bearing) for f in feats]
    pset = weigh(pset, observed, landmarks, cfg.filter)
    if pset.effective_sample_size() < scfg.resample_ess_fraction * len(pset):
        pset = resample(pset, rng)
    est = estimate(pset, previous=belief)
    return est.pose, pset


@dataclass
class ComparisonRow:
    environment: str
    strategy: str
    node_count: int
    travel_distance: float
    sim_steps: int
    complete: bool
    error: Optional[str] = None


def compare_strategies(cfg: RunConfig, environments: Sequence[str | Path]) -> list[ComparisonRow]:
    """Run min-gap and max-gap with identical seeds on each environment.

    An episode that ends in a collision is reported as incomplete with its
    error message instead of aborting the comparison.
    """
    if not environments:
        raise ValueError("need at least one environment")
    rows = []
    for path in environments:
        model = read_environment(path)
        for strategy in ("min-gap", "max-gap"):
            run_cfg = dataclasses.replace(cfg, strategy=strategy, environment=str(path))
            try:
                res, error = run_episode(run_cfg, model), None
            except EpisodeError as exc:
                res, error = exc.result, str(exc)
            m = res.metrics
            rows.append(ComparisonRow(model.name, strategy, m.node_count, m.travel_distance, m.sim_steps,
                                      m.complete, error))
    return rows


def format_comparison(rows: Sequence[ComparisonRow]) -> str:
    lines = ["environment strategy node_count travel_distance sim_steps complete"]
    for r in rows:
        lines.append(f"{r.environment} {r.strategy} {r.node_count} {r.travel_distance:.4f} {r.sim_steps} "
                     f"{str(r.complete).lower()}")
    return "\n".join(lines) + "\n"
