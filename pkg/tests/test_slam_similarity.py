import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from insmap.geometry import Point2, Pose
from insmap.slam_similarity import (
    Correspondence,
    DegenerateGeometryError,
    IDENTITY,
    SimilarityTransform,
    apply_transform,
    estimate_transform,
    fit_transform,
    match_features,
    transform_objective,
)


def synth(T, pts):
    """Forward synthesis: reference = T(observed), computed independently of the library."""
    c, s = math.cos(T.rotation), math.sin(T.rotation)
    out = []
    for x, y in pts:
        out.append(Point2(T.scale * (c * x - s * y) + T.tx, T.scale * (s * x + c * y) + T.ty))
    return out


def pairs_for(T, pts):
    return [Correspondence(Point2(*p), r) for p, r in zip(pts, synth(T, pts))]


def close(T, U, tol):
    return (abs(T.scale - U.scale) < tol and abs(T.rotation - U.rotation) < tol
            and abs(T.tx - U.tx) < tol and abs(T.ty - U.ty) < tol)


def test_identity_recovered():
    pts = np.random.default_rng(0).uniform(-2, 2, (6, 2))
    assert close(estimate_transform(pairs_for(IDENTITY, pts)), IDENTITY, 1e-9)


def test_known_transform_recovered():
    T = SimilarityTransform(1.02, 0.05, 0.3, -0.1)
    pts = np.random.default_rng(1).uniform(-3, 3, (6, 2))
    assert close(estimate_transform(pairs_for(T, pts), 100, 1e-12), T, 1e-6)


def test_one_gross_outlier_among_ten():
    T = SimilarityTransform(1.02, 0.05, 0.3, -0.1)
    pts = np.random.default_rng(2).uniform(-3, 3, (10, 2))
    pairs = pairs_for(T, pts)
    pairs[4] = Correspondence(pairs[4].observed, Point2(pairs[4].reference.x + 2.0, pairs[4].reference.y - 1.5))
    assert close(estimate_transform(pairs, 200, 1e-12), T, 1e-2)


def test_objective_non_increasing_and_rotation_orthonormal():
    rng = np.random.default_rng(3)
    T = SimilarityTransform(0.97, -0.2, -0.5, 0.8)
    pts = rng.uniform(-3, 3, (12, 2))
    pairs = pairs_for(T, pts)
    for k in (1, 7):
        pairs[k] = Correspondence(pairs[k].observed, Point2(*rng.uniform(-5, 5, 2)))
    rep = fit_transform(pairs, 100, 1e-12)
    h = rep.objective_history
    assert all(b <= a + 1e-12 for a, b in zip(h[:-1], h[1:]))
    R = rep.transform.R
    assert np.allclose(R.T @ R, np.eye(2), atol=1e-12) and abs(np.linalg.det(R) - 1) < 1e-12


@settings(max_examples=50, deadline=None)
@given(st.floats(0.95, 1.05), st.floats(-0.3, 0.3), st.floats(-0.7, 0.7), st.floats(-0.7, 0.7),
       st.integers(0, 2 ** 31))
def test_noiseless_residual_vanishes(scale, alpha, tx, ty, seed):
    T = SimilarityTransform(scale, alpha, tx, ty)
    pts = np.random.default_rng(seed).uniform(-3, 3, (6, 2))
    pairs = pairs_for(T, pts)
    assert transform_objective(estimate_transform(pairs, 100, 1e-12), pairs) <= 1e-9


def test_degenerate_inputs():
    with pytest.raises(DegenerateGeometryError):
        estimate_transform([Correspondence(Point2(0, 0), Point2(1, 1))])
    same = [Correspondence(Point2(1, 1), Point2(k, 0)) for k in range(3)]
    with pytest.raises(DegenerateGeometryError):
        estimate_transform(same)


def test_apply_transform_examples():
    pts = [Point2(1, 0), Point2(-2, 3.5)]
    assert apply_transform(IDENTITY, pts) == pts
    (q,) = apply_transform(SimilarityTransform(1.0, math.pi / 2), [Point2(1, 0)])
    assert abs(q.x) < 1e-15 and abs(q.y - 1) < 1e-15


@given(st.floats(0.5, 2), st.floats(-3, 3), st.floats(-5, 5), st.floats(-5, 5))
def test_inverse_round_trip(scale, alpha, tx, ty):
    T = SimilarityTransform(scale, alpha, tx, ty)
    pts = np.random.default_rng(0).uniform(-4, 4, (5, 2))
    back = T.inverse().apply_array(T.apply_array(pts))
    assert np.abs(back - pts).max() < 1e-9


def test_apply_pose_rotates_heading():
    p = SimilarityTransform(1.0, 0.5, 1, 0).apply_pose(Pose.from_xyh(0, 0, 0.25))
    assert p.position == Point2(1, 0) and abs(p.heading - 0.75) < 1e-15


def test_match_features_examples():
    ref = [Point2(0, 0), Point2(2, 0), Point2(0, 3)]
    assert [(c.observed, c.reference) for c in match_features(ref, ref, 0.5)] == list(zip(ref, ref))
    shifted = [Point2(p.x + 0.1, p.y) for p in ref]
    assert len(match_features(shifted, ref, 0.5)) == 3
    pairs = match_features([Point2(-0.2, 0), Point2(0.2, 0.01)], [Point2(0, 0)], 0.5)
    assert len(pairs) == 1 and pairs[0].observed == Point2(-0.2, 0)
    assert match_features(ref, [Point2(10, 10)], 0.5) == []
