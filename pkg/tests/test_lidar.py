import math

import numpy as np
import pytest

from insmap.environment import load_environment
from insmap.geometry import Point2, Pose, ray_cast
from insmap.environment import all_segments
from insmap.lidar import LidarConfig, Sweep, scan, sweep_to_points

from conftest import JUNCTION
from insmap.environment import read_environment

NOISELESS = LidarConfig.noiseless()


def test_polygon_ranges_near_two(polygon72):
    sw = scan(polygon72, Pose.from_xyh(0, 0, 0), "full", NOISELESS, np.random.default_rng(0))
    apothem = 2.0 * math.cos(math.pi / 72)
    assert sw.valid.all()
    assert np.all(sw.ranges >= apothem - 1e-9) and np.all(sw.ranges <= 2.0 + 1e-9)
    assert np.abs(sw.ranges - 2.0).max() < 0.01


def test_forward_arc_has_301_valid(polygon72):
    sw = scan(polygon72, Pose.from_xyh(0, 0, 0.4), "forward", NOISELESS, np.random.default_rng(0))
    assert sw.valid.sum() == 301
    deg = np.flatnonzero(sw.valid)
    assert set(deg) == set(range(0, 151)) | set(range(210, 360))


def test_noiseless_scan_equals_ray_cast():
    env = read_environment(JUNCTION)
    pose = env.start_pose
    sw = scan(env, pose, "full", NOISELESS, np.random.default_rng(1))
    segs = all_segments(env)
    for d in range(0, 360, 7):
        hit = ray_cast(pose.position, sw.bearings()[d], segs, 3.0)
        if hit is None:
            assert not sw.valid[d]
        else:
            assert sw.ranges[d] == hit[0]


def test_median_aggregate_statistics():
    env = load_environment("boundary: -2,-5 2,-5 2,5 -2,5\nstart: 0,0,0\nagent_radius: 0.1\n")
    cfg = LidarConfig(noise_sigma_fraction=0.01, realizations=5, dropout_probability=0.0)
    vals = np.array([scan(env, env.start_pose, "full", cfg, np.random.default_rng(s)).ranges[0]
                     for s in range(1000)])
    sigma = 0.01 * 2.0
    assert abs(vals.mean() - 2.0) < 3 * sigma / math.sqrt(5)
    # the median of 5 has a larger spread than their mean but far smaller than one draw
    assert vals.std() < sigma


def test_scan_reproducible_and_bounded():
    env = read_environment(JUNCTION)
    cfg = LidarConfig()
    a = scan(env, env.start_pose, "full", cfg, np.random.default_rng(5))
    b = scan(env, env.start_pose, "full", cfg, np.random.default_rng(5))
    assert np.array_equal(a.ranges, b.ranges, equal_nan=True)
    assert np.nanmax(a.ranges) <= cfg.max_range


def test_all_dropped_degrees_invalid(polygon72):
    cfg = LidarConfig(noise_sigma_fraction=0.0, realizations=3, dropout_probability=0.999)
    sw = scan(polygon72, Pose.from_xyh(0, 0, 0), "full", cfg, np.random.default_rng(0))
    assert sw.valid.sum() < 5


def test_sweep_to_points_examples():
    r = np.full(360, np.nan)
    r[0] = 1.0
    sw = Sweep(r, Pose.from_xyh(0, 0, 0))
    assert sweep_to_points(sw, Pose.from_xyh(0, 0, 0)) == [Point2(1.0, 0.0)]
    (p,) = sweep_to_points(sw, Pose.from_xyh(0, 0, math.pi / 2))
    assert abs(p.x) < 1e-15 and p.y == 1.0


def test_point_count_matches_valid():
    env = read_environment(JUNCTION)
    sw = scan(env, env.start_pose, "full", LidarConfig(), np.random.default_rng(2))
    assert len(sweep_to_points(sw, env.start_pose)) == sw.valid.sum()


def test_sweep_rejects_out_of_range_and_masks_arc():
    with pytest.raises(ValueError):
        Sweep(np.full(360, 4.0), Pose.from_xyh(0, 0, 0), max_range=3.0)
    with pytest.raises(ValueError):
        Sweep(np.ones(10), Pose.from_xyh(0, 0, 0))
    sw = Sweep(np.ones(360), Pose.from_xyh(0, 0, 0), "forward")
    assert sw.valid.sum() == 301


@pytest.mark.parametrize("kw", [dict(max_range=0), dict(realizations=0), dict(noise_sigma_fraction=-1),
                                dict(dropout_probability=1.0)])
def test_bad_lidar_config(kw):
    with pytest.raises(ValueError):
        LidarConfig(**kw)
