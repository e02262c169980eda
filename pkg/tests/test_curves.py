import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.spatial.transform import Rotation

from conftest import helix, polygon
from hypertda import curves as ck
from hypertda.curves import Curve, CurveError


finite = st.floats(-50, 50, allow_nan=False, allow_infinity=False)


def random_curve(n, seed):
    rng = np.random.default_rng(seed)
    return Curve(np.cumsum(rng.normal(size=(n, 3)), axis=0))


def test_curve_rejects_repeated_consecutive_points():
    with pytest.raises(CurveError):
        Curve(np.array([[0, 0, 0], [0, 0, 0], [1, 0, 0]], dtype=float))
    with pytest.raises(CurveError):
        Curve(np.zeros((1, 3)))


@pytest.mark.parametrize("pts, expected", [
    ([[0, 0, 0], [1, 0, 0]], [[0, 1], [1, 0]]),
    ([[0, 0, 0], [3, 4, 0]], [[0, 5], [5, 0]]),
])
def test_distance_matrix_small(pts, expected):
    np.testing.assert_array_equal(ck.distance_matrix(Curve(np.array(pts, float))), expected)


def test_distance_matrix_square(square):
    d = ck.distance_matrix(square)
    assert d[0, 1] == d[1, 2] == d[2, 3] == d[0, 3] == 1
    assert d[0, 2] == d[1, 3] == pytest.approx(np.sqrt(2), abs=1e-15)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 30), st.integers(0, 10_000))
def test_distance_matrix_symmetric(n, seed):
    d = ck.distance_matrix(random_curve(n, seed))
    assert np.array_equal(d, d.T)
    assert np.all(np.diag(d) == 0)


def test_curvature_examples():
    line = Curve(np.array([[0, 0, 0], [1, 0, 0], [2, 0, 0]], float))
    assert ck.curvature(line)[1] == 0
    corner = Curve(np.array([[0, 0, 0], [1, 0, 0], [1, 1, 0]], float))
    assert ck.curvature(corner)[1] == pytest.approx(np.pi / 2, abs=1e-12)
    # endpoints copy the neighbouring interior value
    np.testing.assert_allclose(ck.curvature(corner), np.pi / 2)


@pytest.mark.parametrize("k", [5, 8, 13])
def test_curvature_regular_polygon(k):
    c = polygon(k, side=0.7)
    expected = (2 * np.pi / k) / 0.7
    np.testing.assert_allclose(ck.curvature(c)[1:-1], expected, rtol=1e-12)


def test_torsion_planar_is_zero():
    c = random_curve(20, 3)
    flat = Curve(np.column_stack([c.points[:, :2], np.zeros(c.n)]))
    assert np.all(ck.torsion(flat) == 0)


def test_torsion_helix_closed_form():
    # quarter-turn helix rising 1 per step: consecutive binormals (2,0,2) and
    # (0,2,2) meet at 60 degrees, segment length sqrt(3)
    c = helix(12, pitch=1.0)
    np.testing.assert_allclose(ck.torsion(c), np.pi / (3 * np.sqrt(3)), rtol=1e-12)


def test_torsion_mirror_flips_sign():
    c = helix(12, pitch=0.4)
    mirrored = Curve(c.points * np.array([1, 1, -1]))
    np.testing.assert_allclose(ck.torsion(mirrored), -ck.torsion(c), atol=1e-12)


def test_torsion_collinear_triple_is_zero():
    pts = np.array([[0, 0, 0], [1, 0, 0], [2, 0, 0], [2, 1, 0], [2, 1, 1]], float)
    assert ck.torsion(Curve(pts))[1] == 0


@settings(max_examples=25, deadline=None)
@given(st.integers(5, 25), st.integers(0, 10_000), st.integers(0, 10_000))
def test_rigid_motion_invariance(n, seed, rseed):
    c = random_curve(n, seed)
    R = Rotation.random(random_state=rseed).as_matrix()
    moved = Curve(c.points @ R.T + np.array([3.0, -1.0, 2.0]))
    np.testing.assert_allclose(ck.curvature(moved), ck.curvature(c), atol=1e-9)
    np.testing.assert_allclose(ck.torsion(moved), ck.torsion(c), atol=1e-9)
    reflected = Curve(moved.points * np.array([-1, 1, 1]))
    np.testing.assert_allclose(ck.torsion(reflected), -ck.torsion(c), atol=1e-9)


@pytest.mark.parametrize("pts, radius, expected", [
    ([[0, 0, 0], [1, 0, 0]], 2.0, [1.0, 1.0]),
    ([[0, 0, 0], [5, 0, 0]], 2.0, [0.5, 0.5]),
    ([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]], 1.2, [0.75] * 4),
])
def test_density_examples(pts, radius, expected):
    np.testing.assert_allclose(ck.density(Curve(np.array(pts, float)), radius), expected)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 30), st.integers(0, 10_000), st.floats(0.1, 5), st.floats(0.1, 5))
def test_density_range_and_monotone(n, seed, r1, r2):
    c = random_curve(n, seed)
    lo, hi = sorted([r1, r2])
    a, b = ck.density(c, lo), ck.density(c, hi)
    assert np.all(a >= 1 / n) and np.all(b <= 1)
    assert np.all(a <= b)


@pytest.mark.parametrize("pts, expected", [
    ([[2, 3, 4]], 0.0),
    ([[0, 0, 0], [2, 0, 0]], 1.0),
    ([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]], np.sqrt(0.5)),
])
def test_radius_of_gyration(pts, expected):
    assert ck.radius_of_gyration(np.array(pts, float)) == pytest.approx(expected, abs=1e-15)


def test_radius_of_gyration_empty():
    with pytest.raises(CurveError):
        ck.radius_of_gyration(np.zeros((0, 3)))


def _check_sarw(c, length):
    seg = c.segment_lengths()
    assert c.n == length
    np.testing.assert_allclose(seg, 1.0, atol=1e-12)
    d = ck.distance_matrix(c)
    far = np.triu(np.ones_like(d, dtype=bool), k=2)
    if far.any():
        assert d[far].min() >= 1.0


def test_sarw_length_two():
    _check_sarw(ck.generate_sarw(2, 0), 2)


@pytest.mark.parametrize("seed", range(100))
def test_sarw_postconditions(seed):
    _check_sarw(ck.generate_sarw(100, seed), 100)


def test_sarw_deterministic():
    np.testing.assert_array_equal(ck.generate_sarw(50, 7).points, ck.generate_sarw(50, 7).points)
    assert not np.array_equal(ck.generate_sarw(50, 7).points, ck.generate_sarw(50, 8).points)


def test_sarw_budget_error_reports_attempts():
    with pytest.raises(ck.SARWGenerationError, match="attempt"):
        ck.generate_sarw(50, 0, d_min=1.9, max_attempts=5, max_total_attempts=200)


def test_perturb_zero_sigma_is_identity():
    c = ck.generate_sarw(30, 1)
    np.testing.assert_array_equal(ck.perturb(c, 0.0, 5).points, c.points)


def test_perturb_rms_displacement():
    c = ck.generate_sarw(200, 2)
    disp = np.concatenate([
        np.linalg.norm(ck.perturb(c, 0.05, s).points - c.points, axis=1) for s in range(60)
    ])
    assert disp.size >= 10_000
    rms = np.sqrt(np.mean(disp ** 2))
    assert rms == pytest.approx(0.05 * np.sqrt(3), rel=0.05)


def test_perturb_deterministic():
    c = ck.generate_sarw(30, 1)
    np.testing.assert_array_equal(ck.perturb(c, 0.1, 3).points, ck.perturb(c, 0.1, 3).points)


def test_smooth_line_unchanged():
    line = Curve(np.column_stack([np.arange(10.0), 2 * np.arange(10.0), np.zeros(10)]))
    np.testing.assert_allclose(ck.smooth(line, 3, 5).points, line.points, atol=1e-12)


def test_smooth_zigzag_one_pass():
    pts = np.array([[0, 0, 0], [1, 1, 0], [2, 0, 0], [3, 1, 0], [4, 0, 0]], float)
    out = ck.smooth(Curve(pts), 3, 1).points
    np.testing.assert_allclose(out[:, 1], [0, 1 / 3, 2 / 3, 1 / 3, 0], atol=1e-15)
    np.testing.assert_allclose(out[:, 0], pts[:, 0], atol=1e-15)


@pytest.mark.parametrize("seed", range(20))
def test_smooth_reduces_bending(seed):
    def bend(p):
        return float((np.diff(p, 2, axis=0) ** 2).sum())

    c = random_curve(40, seed)
    prev = bend(c.points)
    for k in range(1, 6):
        cur = bend(ck.smooth(c, 3, k).points)
        assert cur <= prev + 1e-12
        prev = cur


def test_interpolation_counts_trace():
    assert ck.interpolation_counts(np.array([2.0, 1.0]), 3).tolist() == [2, 1]


def test_interpolate_three_point_example():
    c = Curve(np.array([[0, 0, 0], [2, 0, 0], [3, 0, 0]], float))
    new, imap = ck.interpolate(c, 6)
    np.testing.assert_allclose(new.points[:, 0], [0, 2 / 3, 4 / 3, 2, 2.5, 3])
    D = imap.D.toarray()
    assert D.shape == (3, 6)
    np.testing.assert_allclose(D[:, 1], [2 / 3, 1 / 3, 0])
    np.testing.assert_allclose(D[:, 4], [0, 0.5, 0.5])


def test_interpolate_equilateral_round_robin():
    c = ck.generate_sarw(20, 4)
    new, imap = ck.interpolate(c, 20 + 3 * 19)
    assert imap.counts.tolist() == [3] * 19


def test_interpolate_199_to_500():
    c = ck.generate_sarw(199, 11)
    new, imap = ck.interpolate(c, 500)
    assert new.n == 500 and int(imap.counts.sum()) == 301
    D = imap.D.toarray()
    np.testing.assert_allclose(D.sum(axis=0), 1.0, atol=1e-12)
    ones = np.ones((500, 3))
    np.testing.assert_allclose(ck.uninterpolate(imap, ones).sum(), D.sum() * 3, atol=1e-9)
    assert abs(ck.uninterpolate(imap, np.ones(500)).sum() - 500) < 1e-12 * 500


def test_interpolate_requires_growth():
    with pytest.raises(CurveError):
        ck.interpolate(ck.generate_sarw(10, 0), 10)


def test_original_vertex_columns_are_unit():
    c = ck.generate_sarw(15, 3)
    new, imap = ck.interpolate(c, 40)
    D = imap.D.toarray()
    orig_cols = np.flatnonzero(np.isclose(D.max(axis=0), 1.0))
    assert len(orig_cols) == 15
    for row, col in enumerate(orig_cols):
        assert D[row, col] == 1.0 and D[:, col].sum() == 1.0
        np.testing.assert_array_equal(new.points[col], c.points[row])


def test_uninterpolate_quarter_fraction():
    # one point at t = 0.25 is impossible with even spacing, so build D by hand
    imap = ck.InterpolationMap.from_json(
        {"n_orig": 2, "n_interp": 3, "triplets": [[0, 0, 1.0], [0, 1, 0.75], [1, 1, 0.25], [1, 2, 1.0]]}
    )
    np.testing.assert_allclose(ck.uninterpolate(imap, np.array([0.0, 1.0, 0.0])), [0.75, 0.25])


def test_uninterpolate_average_keeps_memberships_in_unit_interval():
    c = ck.generate_sarw(20, 1)
    _, imap = ck.interpolate(c, 55)
    M = np.zeros((55, 2))
    M[:30, 0] = 1
    M[30:, 1] = 1
    out = ck.uninterpolate(imap, M, average=True)
    assert np.all((out >= 0) & (out <= 1 + 1e-12))
    np.testing.assert_allclose(out.sum(axis=1), 1.0, atol=1e-12)
    # the plain product conserves mass instead
    assert ck.uninterpolate(imap, M).sum() == pytest.approx(55.0, abs=1e-12)


def test_uninterpolate_identity_and_shape_check():
    imap = ck.identity_map(4)
    x = np.arange(4.0)
    np.testing.assert_array_equal(ck.uninterpolate(imap, x), x)
    with pytest.raises(CurveError):
        ck.uninterpolate(imap, np.ones(5))


@settings(max_examples=25, deadline=None)
@given(st.integers(3, 25), st.integers(0, 10_000), st.integers(1, 40))
def test_uninterpolate_conserves_indicator_mass(n, seed, extra):
    c = random_curve(n, seed)
    new, imap = ck.interpolate(c, n + extra)
    D = imap.D.toarray()
    np.testing.assert_allclose(D.sum(axis=0), 1.0, atol=1e-12)
    x = (np.random.default_rng(seed).random(n + extra) > 0.5).astype(float)
    assert abs(ck.uninterpolate(imap, x).sum() - x.sum()) < 1e-12 * max(1, x.sum())


def test_interpolation_map_json_roundtrip(tmp_path):
    _, imap = ck.interpolate(ck.generate_sarw(12, 0), 30)
    obj = json.loads(json.dumps(imap.to_json()))
    back = ck.InterpolationMap.from_json(obj)
    assert (back.D != imap.D).nnz == 0


def test_csv_roundtrip_and_time_lift(tmp_path):
    c = ck.generate_sarw(10, 5)
    ck.write_curve_csv(c, tmp_path / "c.csv", {"k": 1})
    back = ck.read_curve_csv(tmp_path / "c.csv")
    np.testing.assert_array_equal(back.points, c.points)
    (tmp_path / "xy.csv").write_text("x,y\n0,0\n1,0\n1,1\n")
    with pytest.raises(CurveError):
        ck.read_curve_csv(tmp_path / "xy.csv")
    lifted = ck.read_curve_csv(tmp_path / "xy.csv", time_as_z=True, time_step=0.5)
    np.testing.assert_array_equal(lifted.points[:, 2], [0, 0.5, 1.0])
