"""Radial profile, ball diffeomorphism and shift map checks.

The bridge values below were pinned by direct evaluation of the chosen
blend before the operators were built on top of it; they guard against
accidental changes to the profile, which every downstream fixture depends
on.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eqmollify import ballmap as bm

# direct-evaluation fixtures of the frozen bridge
BRIDGE_AT_HALF = 27.549075016572129
BRIDGE_AT_045 = 4.4360183608033266
BRIDGE_AT_06 = 517.46912222622609
DERIVATIVE_AT_HALF = 843.02132551373575


def test_profile_pieces():
    # identity piece, exact
    assert bm.radial_profile(0.2) == 0.2
    assert bm.radial_profile(1.0 / 3.0) == 1.0 / 3.0
    assert bm.radial_profile(bm.BRIDGE_LO) == bm.BRIDGE_LO
    # frozen bridge values
    assert bm.radial_profile(0.45) == pytest.approx(BRIDGE_AT_045, rel=1e-14)
    assert bm.radial_profile(0.5) == pytest.approx(BRIDGE_AT_HALF, rel=1e-14)
    assert bm.radial_profile(0.6) == pytest.approx(BRIDGE_AT_06, rel=1e-14)
    # pure exp branch from the window end onwards
    assert bm.radial_profile(2.0 / 3.0) == pytest.approx(np.exp(9.0), rel=1e-12)
    assert bm.radial_profile(0.7) == pytest.approx(np.exp(1.0 / 0.09), rel=1e-12)


def test_profile_domain_errors():
    with pytest.raises(bm.BallDomainError):
        bm.radial_profile(0.0)
    with pytest.raises(bm.BallDomainError):
        bm.radial_profile(-0.3)
    with pytest.raises(bm.BallDomainError):
        bm.radial_profile(0.97)  # overflow guard


def test_profile_derivative_matches_finite_differences():
    h = 1e-7
    for r in (0.2, 0.4, 0.5, 0.62, 0.7, 0.8):
        fd = (bm.radial_profile(r + h) - bm.radial_profile(r - h)) / (2 * h)
        assert bm.radial_profile_derivative(r) == pytest.approx(fd, rel=1e-6)
    assert bm.radial_profile_derivative(0.5) == pytest.approx(DERIVATIVE_AT_HALF, rel=1e-13)


def test_monotonicity_certificate():
    r, d = bm.monotonicity_certificate()
    assert len(r) >= 10001
    assert np.all(d > 0.0)


def test_inverse_round_trip_log_spaced():
    s = np.logspace(-2, 6, 20)
    r = bm.radial_profile_inverse(s)
    assert np.all((r > 0) & (r < 1))
    back = bm.radial_profile(r)
    assert np.max(np.abs(back - s) / np.maximum(1.0, s)) <= 1e-10


def test_inverse_exact_passthrough_small():
    for s in (0.1, 0.25, 1.0 / 3.0):
        assert bm.radial_profile_inverse(s) == s


def test_inverse_closed_form_large():
    # on the exp branch the inverse has a closed form
    s = 1e9
    r = bm.radial_profile_inverse(s)
    assert r == 1.0 - 1.0 / np.sqrt(np.log(s))


def test_smooth_step_shape():
    assert bm.smooth_step(-1.0) == 0.0
    assert bm.smooth_step(0.0) == 0.0
    assert bm.smooth_step(1.0) == 1.0
    assert bm.smooth_step(2.0) == 1.0
    assert bm.smooth_step(0.5) == pytest.approx(0.5, abs=1e-15)
    u = np.linspace(0.01, 0.99, 199)
    vals = bm.smooth_step(u)
    assert np.all(np.diff(vals) >= 0.0)
    mid = bm.smooth_step(np.linspace(0.15, 0.85, 71))
    assert np.all(np.diff(mid) > 0.0)  # saturation to exactly 0/1 only at the ends
    # derivative consistent with FD
    h = 1e-6
    for t in (0.2, 0.5, 0.8):
        fd = (bm.smooth_step(t + h) - bm.smooth_step(t - h)) / (2 * h)
        assert bm.smooth_step_derivative(t) == pytest.approx(fd, rel=1e-7)


def test_compress_expand_round_trip():
    rng = np.random.default_rng(7)
    x = rng.normal(size=(300, 2)) * np.exp(rng.uniform(-2, 6, size=(300, 1)))
    u = bm.ball_compress(x)
    assert np.all(np.linalg.norm(u, axis=1) < 1.0)
    back = bm.ball_expand(u)
    rel = np.linalg.norm(back - x, axis=1) / np.maximum(1.0, np.linalg.norm(x, axis=1))
    assert np.max(rel) <= 1e-9


def test_compress_identity_near_origin():
    x = np.array([0.21, -0.11])
    assert np.array_equal(bm.ball_compress(x), x)
    assert np.array_equal(bm.ball_expand(x), x)
    assert np.array_equal(bm.ball_compress(np.zeros(3)), np.zeros(3))


def test_expand_rejects_boundary():
    with pytest.raises(bm.BallDomainError):
        bm.ball_expand(np.array([1.0 - 1e-4, 0.0]))
    with pytest.raises(bm.BallDomainError):
        bm.ball_expand(np.array([1.2, 0.0]))


@settings(max_examples=60, deadline=None)
@given(
    st.floats(-0.9, 0.9),
    st.floats(-0.9, 0.9),
    st.floats(-0.9, 0.9),
)
def test_expand_compress_round_trip_property(a, b, c):
    u = np.array([a, b, c])
    r = float(np.linalg.norm(u))
    if r >= 0.95:  # stay clear of the overflow guard
        return
    x = bm.ball_expand(u)
    back = bm.ball_compress(x)
    assert np.linalg.norm(back - u) <= 1e-9 * max(1.0, np.linalg.norm(x))


def test_shift_identity_outside_is_bit_exact():
    y = np.array([0.07, -0.02])
    pts = np.array([
        [1.0, 0.0],
        [0.95, 0.31],
        [bm.R_IDENTITY, 0.0],
        [3.7, -2.2],
    ])
    out = bm.shift_points(pts, y)
    assert np.array_equal(out, pts)
    out2, jac = bm.shift_with_jacobian(pts, np.broadcast_to(y, pts.shape).copy())
    assert np.array_equal(out2, pts)
    assert np.array_equal(jac, np.broadcast_to(np.eye(2), jac.shape))


def test_shift_is_translation_near_origin():
    y = np.array([0.05, 0.02])
    x = np.array([0.12, -0.2])
    # both x and x+y inside the identity region: exact translation
    assert np.array_equal(bm.shift_points(x, y), x + y)
    _, jac = bm.shift_with_jacobian(x, y)
    assert np.array_equal(jac, np.eye(2))


def test_shift_group_law_and_inverse():
    rng = np.random.default_rng(11)
    x = rng.uniform(-0.9, 0.9, size=(400, 2))
    y = np.array([0.04, -0.015])
    z = np.array([-0.02, 0.03])
    lhs = bm.shift_points(bm.shift_points(x, y), z)
    rhs = bm.shift_points(x, y + z)
    assert np.max(np.linalg.norm(lhs - rhs, axis=1)) <= 1e-8
    sm = bm.ShiftMap(y)
    back = sm.inverse().apply(sm.apply(x))
    assert np.max(np.linalg.norm(back - x, axis=1)) <= 1e-8


def test_shift_stays_inside_ball():
    rng = np.random.default_rng(3)
    x = rng.uniform(-0.99, 0.99, size=(500, 2))
    x = x[np.linalg.norm(x, axis=1) < 1.0]
    out = bm.shift_points(x, np.array([0.09, -0.04]))
    assert np.all(np.linalg.norm(out, axis=1) < 1.0)


def test_shrinking_shifts_sweep():
    # sup over a fixed grid of |s_y - id| shrinks with |y| down to 1e-4,
    # allowing 5% slack per step, and ends below 1e-3
    grid_1d = np.linspace(-0.95, 0.95, 21)
    X = np.array([[a, b] for a in grid_1d for b in grid_1d])
    X = X[np.linalg.norm(X, axis=1) < 1.0]
    norms = []
    size = 0.128
    while size >= 1e-4:
        y = np.array([size, 0.0]) / np.sqrt(2.0) + np.array([0.0, size]) / np.sqrt(2.0)
        moved = bm.shift_points(X, y)
        norms.append(np.max(np.linalg.norm(moved - X, axis=1)))
        size /= 2.0
    for a, b in zip(norms, norms[1:]):
        assert b <= 1.05 * a
    assert norms[-1] < 1e-3


def test_shift_jacobian_matches_finite_differences():
    rng = np.random.default_rng(5)
    pts = rng.uniform(-0.9, 0.9, size=(200, 2))
    y = np.array([0.03, -0.05])
    _, jac = bm.shift_with_jacobian(pts, np.broadcast_to(y, pts.shape).copy())
    h = 1e-6
    worst = 0.0
    for axis in range(2):
        e = np.zeros(2)
        e[axis] = h
        fd = (bm.shift_points(pts + e, y) - bm.shift_points(pts - e, y)) / (2 * h)
        worst = max(worst, float(np.max(np.abs(fd - jac[:, :, axis]))))
    assert worst <= 1e-5


def test_shift_jacobian_in_three_dimensions():
    rng = np.random.default_rng(9)
    pts = rng.uniform(-0.5, 0.5, size=(50, 3))
    y = np.array([0.02, 0.01, -0.03])
    moved, jac = bm.shift_with_jacobian(pts, np.broadcast_to(y, pts.shape).copy())
    h = 1e-6
    for axis in range(3):
        e = np.zeros(3)
        e[axis] = h
        fd = (bm.shift_points(pts + e, y) - bm.shift_points(pts - e, y)) / (2 * h)
        assert np.max(np.abs(fd - jac[:, :, axis])) <= 1e-5
