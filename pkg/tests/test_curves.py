import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kleinkit import curves
from kleinkit.curves import (
    Interval,
    ToleranceConfig,
    check_closure_conditions,
    eval_jet,
    eval_radius,
    eval_radius_derivative,
    fit_exponent,
    position,
    rotate90,
    unit_tangent,
)
from kleinkit.errors import (
    DegenerateVelocity,
    DerivativeUnbounded,
    DomainMismatch,
    NonpositiveRadiusBase,
    OutOfDomain,
    RadiusNotPositive,
    ZeroParameter,
)

TWO_PI = 2 * math.pi
finite = st.floats(-1e6, 1e6, allow_nan=False)

CURVES = {
    "piriform": (curves.make_piriform(3.0, 2.0), 0.0, TWO_PI),
    "cusp-piriform": (curves.make_cusp_piriform(20.0, 8.0), 0.0, TWO_PI),
    "dickson-piriform": (curves.make_dickson_piriform(), 0.0, TWO_PI),
    "dumbbell": (curves.make_dumbbell(5.0, 2.0), 0.0, math.pi),
    "trott": (curves.make_trott_directrix(), -20.0, 20.0),
    "circle": (curves.make_circle(2.0), 0.0, TWO_PI),
}


# -- rotate90 ---------------------------------------------------------------


def test_rotate90_examples():
    assert rotate90([1.0, 0.0]).tolist() == [0.0, 1.0]
    assert rotate90([0.0, 1.0]).tolist() == [-1.0, 0.0]
    assert rotate90(rotate90([3.0, 4.0])).tolist() == [-3.0, -4.0]


@given(finite, finite)
def test_rotate90_is_a_quarter_turn(x, y):
    v = np.array([x, y])
    Jv = rotate90(v)
    assert np.linalg.norm(Jv) == pytest.approx(np.linalg.norm(v), rel=1e-15, abs=0)
    assert Jv @ v == pytest.approx(0.0, abs=1e-9 * max(1.0, v @ v))
    assert np.array_equal(rotate90(Jv), -v)


# -- families -----------------------------------------------------------------


def test_trivial_positions():
    close = np.testing.assert_allclose
    close(position(curves.make_piriform(1, 1), math.pi / 2), [2, 0], atol=1e-15)
    close(position(curves.make_piriform(1, 1), 3 * math.pi / 2), [0, 0], atol=1e-15)
    cp = curves.make_cusp_piriform(20, 8)
    close(position(cp, math.pi), [40, 0], atol=1e-13)
    close(position(cp, math.pi / 2), [20, 8], atol=1e-13)
    close(curves.end_position(cp, "start"), [0, 0], atol=1e-15)
    close(position(curves.make_dumbbell(1, 1), 0.0), [0, 0])
    close(position(curves.make_dumbbell(1, 1), math.pi / 2), [1, 0], atol=1e-15)
    tr = curves.make_trott_directrix()
    close(position(tr, 0.0), [1, 1])
    close(position(tr, 1.0), [0.5, 1.5])
    assert np.linalg.norm(position(curves.make_trott_directrix(1e4), 1e4)) < 1e-7


def test_velocity_examples():
    assert eval_jet(curves.make_dumbbell(1, 1), 0.0).velocity.tolist() == [1.0, 0.0]
    jet = eval_jet(curves.make_circle(3.0), np.linspace(0, 6, 7))
    np.testing.assert_allclose(np.linalg.norm(jet.velocity, axis=-1), 3.0)


def test_zero_parameters_rejected():
    for make in (curves.make_piriform, curves.make_cusp_piriform, curves.make_dumbbell):
        with pytest.raises(ZeroParameter):
            make(0.0, 1.0)
        with pytest.raises(ZeroParameter):
            make(1.0, 0.0)


def test_open_domain_rejects_endpoints():
    cp = curves.make_cusp_piriform(20, 8)
    for t in (0.0, TWO_PI, -0.1, 7.0):
        with pytest.raises(OutOfDomain):
            position(cp, t)
    with pytest.raises(OutOfDomain):
        position(curves.make_dumbbell(5, 2), math.pi + 1e-9)


@pytest.mark.parametrize("name", sorted(CURVES))
def test_jets_match_central_differences(name, rng):
    curve, lo, hi = CURVES[name]
    span = hi - lo
    t = lo + span * (0.01 + 0.98 * rng.random(100))
    h = 1e-5
    jet = eval_jet(curve, t)
    fd_vel = (position(curve, t + h) - position(curve, t - h)) / (2 * h)
    fd_acc = (eval_jet(curve, t + h).velocity - eval_jet(curve, t - h).velocity) / (2 * h)
    scale = 1.0 + np.abs(jet.position).max()
    assert np.abs(jet.velocity - fd_vel).max() <= 1e-8 * scale * 100
    assert np.abs(jet.acceleration - fd_acc).max() <= 1e-8 * scale * 100


@settings(max_examples=200)
@given(st.floats(1e-6, TWO_PI - 1e-6))
def test_cusp_piriform_mirror(t):
    cp = curves.make_cusp_piriform(20, 8)
    p, q = position(cp, t), position(cp, TWO_PI - t)
    assert q[0] == pytest.approx(p[0], abs=1e-12)
    assert q[1] == pytest.approx(-p[1], abs=1e-12)


@settings(max_examples=200)
@given(st.floats(0.0, math.pi))
def test_dumbbell_mirror(t):
    db = curves.make_dumbbell(5, 2)
    p, q = position(db, t), position(db, math.pi - t)
    assert q[0] == pytest.approx(p[0], abs=1e-12)
    assert q[1] == pytest.approx(-p[1], abs=1e-12)


def test_unit_tangent():
    db = curves.make_dumbbell(5, 2)
    np.testing.assert_allclose(unit_tangent(db, 0.0), [1, 0])
    np.testing.assert_allclose(unit_tangent(db, math.pi), [-1, 0], atol=1e-15)
    with pytest.raises(DegenerateVelocity):
        unit_tangent(curves.make_cusp_piriform(20, 8), 0.0)


@pytest.mark.parametrize("name", sorted(CURVES))
def test_unit_tangent_has_unit_norm(name, rng):
    curve, lo, hi = CURVES[name]
    t = lo + (hi - lo) * (0.001 + 0.998 * rng.random(500))
    norms = np.linalg.norm(unit_tangent(curve, t), axis=-1)
    assert np.abs(norms - 1).max() <= 1e-12


def test_trott_directrix_end_gap_shrinks():
    gaps = []
    for T in (5.0, 10.0, 20.0, 40.0):
        tr = curves.make_trott_directrix(T)
        gaps.append(np.linalg.norm(curves.end_position(tr, "start") - curves.end_position(tr, "end")))
    assert gaps[2] < 1e-3
    assert all(b < a for a, b in zip(gaps, gaps[1:]))


# -- radius -------------------------------------------------------------------


def test_radius_examples():
    r = curves.make_radius_sqrt_cusp(5.5, 0.4)
    assert eval_radius(r, 0.0) == 5.5
    assert eval_radius(r, math.pi) == 5.5
    assert eval_radius(r, 1e-12) == pytest.approx(5.5, abs=1e-5)
    rd = curves.make_radius_dumbbell(0.5, 1 / 30)
    for t in (0.0, math.pi / 2, math.pi):
        assert eval_radius(rd, t) == pytest.approx(0.5, abs=1e-15)
    rt = curves.make_radius_trott()
    assert eval_radius(rt, 0.0) == pytest.approx(1 / 28, abs=1e-16)
    assert eval_radius(curves.make_radius_trott(1e5), 1e5) == pytest.approx(1 / 8, abs=1e-6)
    assert eval_radius_derivative(curves.make_radius_constant(0.3), 1.7) == 0.0


def test_radius_validation():
    with pytest.raises(NonpositiveRadiusBase):
        curves.make_radius_sqrt_cusp(0.0, 0.1)
    with pytest.raises(RadiusNotPositive):
        curves.make_radius_sqrt_cusp(1.0, 1.0)
    with pytest.raises(NonpositiveRadiusBase):
        curves.make_radius_constant(-1.0)


def test_radius_derivative_blows_up_at_sqrt_ends():
    r = curves.make_radius_sqrt_cusp(5.5, 0.4)
    with pytest.raises(DerivativeUnbounded):
        eval_radius_derivative(r, 0.0)
    assert abs(eval_radius_derivative(r, 1e-8)) > 1e2


@pytest.mark.parametrize(
    "radius,lo,hi",
    [
        (curves.make_radius_sqrt_cusp(5.5, 0.4), 0.0, TWO_PI),
        (curves.make_radius_dumbbell(0.5, 1 / 30), 0.0, math.pi),
        (curves.make_radius_trott(), -20.0, 20.0),
    ],
)
def test_radius_derivative_matches_central_differences(radius, lo, hi, rng):
    t = lo + (hi - lo) * (0.05 + 0.9 * rng.random(100))
    h = 1e-5
    fd = (eval_radius(radius, t + h) - eval_radius(radius, t - h)) / (2 * h)
    assert np.abs(eval_radius_derivative(radius, t) - fd).max() < 1e-8


# -- closure ------------------------------------------------------------------


def test_fit_exponent_recovers_power():
    eps = ToleranceConfig().eps_sequence()
    assert fit_exponent(eps, 3 * eps**0.5) == pytest.approx(0.5, abs=1e-12)
    assert fit_exponent(eps, np.zeros_like(eps)) == math.inf


def test_closure_piriform_passes():
    rep = check_closure_conditions(
        curves.make_cusp_piriform(20, 8), curves.make_radius_sqrt_cusp(5.5, 0.4)
    )
    assert rep.cond_i_pass and rep.cond_ii_pass and rep.cond_iii_pass and rep.cond_iv_pass
    assert 0.4 <= rep.cond_iv_exponent <= 0.6
    assert rep.passed


def test_closure_dumbbell_passes():
    rep = check_closure_conditions(
        curves.make_dumbbell(5, 2), curves.make_radius_dumbbell(0.5, 1 / 30)
    )
    assert rep.passed
    assert 0.4 <= rep.cond_iv_exponent <= 0.6
    assert rep.cond_i_residual < 1e-12


def test_closure_circle_constant_fails_iv():
    rep = check_closure_conditions(curves.make_circle(1.0), curves.make_radius_constant(0.5))
    assert not rep.cond_iv_pass
    assert rep.cond_i_pass and rep.cond_iii_pass
    assert rep.to_dict()["cond_iv"]["exponent"] is None


def test_closure_trott_truncated_fails_i():
    rep = check_closure_conditions(curves.make_trott_directrix(), curves.make_radius_trott())
    assert 0 < rep.cond_i_residual < 1e-3
    assert not rep.passed


def test_closure_domain_mismatch():
    with pytest.raises(DomainMismatch):
        check_closure_conditions(curves.make_dumbbell(5, 2), curves.make_radius_sqrt_cusp(5.5, 0.4))


def test_interval_clip_and_check():
    iv = Interval(0.0, 10.0, lo_open=True, hi_open=False)
    assert iv.clipped(0.01) == (0.1, 10.0)
    iv.check(10.0)
    iv.check(0.0, allow_ends=True)
    with pytest.raises(OutOfDomain):
        iv.check(0.0)
    with pytest.raises(OutOfDomain):
        iv.check(float("nan"))
