import math

import numpy as np
import pytest
from hypothesis import given

from conftest import ball_points, interior_points
from siegel import bloch as bl
from siegel import geometry as geo
from siegel.integrate import QuadratureSpec
from siegel.symbols import NotHolomorphic, make_symbol

HOLO = ("log-kernel", "cayley-n", "coordinate", "const")


def test_log_kernel_gradient_at_i():
    for n in (1, 2, 3):
        g = bl.invariant_gradient(make_symbol("log-kernel"), geo.base_point(n))
        assert abs(g - math.sqrt(2.0)) <= 1e-10


def test_cayley_coordinate_gradient_at_i():
    # f o Phi is the last ball coordinate, whose ball gradient at 0 has norm 1
    g = bl.invariant_gradient(make_symbol("cayley-n"), geo.base_point(2))
    assert g == pytest.approx(math.sqrt(2.0), rel=1e-14)


def test_gradient_requires_holomorphic():
    with pytest.raises(NotHolomorphic):
        bl.invariant_gradient(make_symbol("bump"), geo.base_point(1))


def test_derivatives_at_zero():
    assert np.allclose(bl.mobius_derivative_at_zero(np.zeros(2)), -np.eye(2))
    xi = np.array([0.3, 0.4j])
    assert np.allclose(bl.mobius_derivative_at_zero(xi), bl.mobius_derivative(xi, xi * 0))
    h = 1e-7
    for k in range(2):
        e = np.zeros(2, dtype=complex)
        e[k] = h
        col = (geo.mobius_ball(xi, e) - geo.mobius_ball(xi, -e)) / (2 * h)
        assert np.allclose(bl.mobius_derivative_at_zero(xi)[:, k], col, atol=1e-7)


@given(ball_points(2, 0.9))
def test_cayley_derivative_matches_differences(xi):
    J = bl.cayley_derivative(xi)
    h = 1e-7
    for k in range(2):
        e = np.zeros(2, dtype=complex)
        e[k] = h
        col = (geo.cayley(xi + e) - geo.cayley(xi - e)) / (2 * h)
        assert np.allclose(J[:, k], col, rtol=1e-5, atol=1e-5)


@pytest.mark.parametrize("sid", HOLO)
@given(z=interior_points())
def test_transfer_with_consistent_factor(sid, z):
    f = make_symbol(sid)
    a = float(bl.invariant_gradient(f, z))
    b = bl.transfer_value(f, z)
    assert abs(a - b) <= 1e-8 * max(a, b, 1e-300) + 1e-300


def test_stated_transfer_factor_disagrees():
    f = make_symbol("log-kernel")
    i = geo.base_point(1)
    a = float(bl.invariant_gradient(f, i))
    assert bl.transfer_value(f, i, bl.STATED_TRANSFER_FACTOR) == pytest.approx(math.sqrt(2.0) * a)


@given(z=interior_points(n=2))
def test_gradient_report_residuals(z):
    rep = bl.gradient_report(make_symbol("cayley-n"), z)
    assert rep.residuals["transfer"] < 1e-8
    assert rep.residuals["fd"] < 1e-6
    row = rep.as_row()
    assert set(row) >= {"rho", "invariant_gradient", "ball_transfer_value", "residual_fd"}


def test_ball_gradient_by_differences():
    f = make_symbol("log-kernel")
    g, grad = bl.pullback(f)
    xi = np.array([0.2 - 0.1j, 0.5j])
    assert bl.ball_invariant_gradient(g, xi) == pytest.approx(bl.ball_invariant_gradient(g, xi, grad), rel=1e-6)
    with pytest.raises(geo.DomainError):
        bl.ball_invariant_gradient(g, np.array([0.8, 0.8]))


@pytest.mark.parametrize("sid", ["log-kernel", "cayley-n", "coordinate"])
@given(a=interior_points(n=2), z=interior_points(n=2))
def test_moebius_invariance(sid, a, z):
    f = make_symbol(sid)
    lhs = bl.composed_gradient(f, a, z)
    rhs = float(bl.invariant_gradient(f, geo.tau(a)(z)))
    assert abs(lhs - rhs) <= 1e-7 * max(lhs, rhs)


def test_tau_jacobian_matches_differences():
    a = np.array([0.3 + 0.2j, 1.0 + 1.5j])
    z = np.array([-0.4j, 2.0 + 0.7j])
    J = bl.tau_jacobian(a, z)
    h = 1e-6
    for k in range(2):
        e = np.zeros(2, dtype=complex)
        e[k] = h
        col = (geo.tau(a)(z + e) - geo.tau(a)(z - e)) / (2 * h)
        assert np.allclose(J[:, k], col, rtol=1e-6, atol=1e-8)


def test_geodesic_endpoints_and_metric():
    z = np.array([0.2 + 0.3j, 1.0 + 2.0j])
    w = np.array([-1.0, 0.5 + 1.4j])
    path = bl.geodesic(z, w, 11)
    assert np.allclose(path[0], z) and np.allclose(path[-1], w)
    d = [float(geo.bergman_metric(path[k], path[k + 1])) for k in range(10)]
    assert sum(d) == pytest.approx(float(geo.bergman_metric(z, w)), rel=1e-9)


@given(z=interior_points(n=1), w=interior_points(n=1))
def test_lipschitz_bound_consistent_factor(z, w):
    if geo.bergman_metric(z, w) < 1e-6:
        return
    for sid in ("log-kernel", "cayley-n"):
        f = make_symbol(sid)
        q = bl.lipschitz_ratio(f, z, w, math.sqrt(2.0))
        assert q <= bl.geodesic_gradient_sup(f, z, w, 801) * (1 + 1e-3)


def test_stated_lipschitz_bound_is_exceeded():
    f = make_symbol("log-kernel")
    z, w = np.array([1j]), np.array([1e4j])
    # the stated form would need this ratio to stay below the Bloch bound 2 sqrt 2
    assert bl.lipschitz_ratio(f, z, w, 2.0) > 2 * math.sqrt(2)
    assert bl.lipschitz_ratio(f, z, w, math.sqrt(2.0)) <= 2 * math.sqrt(2)


def test_lipschitz_ratio_needs_distinct_points():
    with pytest.raises(ValueError):
        bl.lipschitz_ratio(make_symbol("log-kernel"), [1j], [1j])


def test_bloch_scan():
    sc = bl.bloch_seminorm_scan(make_symbol("log-kernel"), "all", 2)
    assert sc.sup_estimate <= 2 * math.sqrt(2)
    assert sc.which == "Bloch"
    up = [v for _, v in sc.decay_profile["dilation-up"]]
    assert up[-1] > up[0]


def test_cayley_coordinate_is_little_bloch():
    sc = bl.bloch_seminorm_scan(make_symbol("cayley-n"), "ray-ladder", 1)
    for ray, prof in sc.decay_profile.items():
        assert prof[-1][1] < 0.1 * sc.sup_estimate, ray


def test_equivalence_probe():
    spec = QuadratureSpec("qmc", 2**10, 0, 1)
    probe = bl.mo_equivalence_probe(make_symbol("log-kernel"), 2.0, 1.0, "ray-ladder", spec)
    lo, hi = probe.ratio_interval("point")
    assert 0 < lo <= hi < np.inf
    lo, hi = probe.ratio_interval("average")
    assert 0 < lo <= hi < np.inf
    with pytest.raises(ValueError):
        bl.mo_equivalence_probe(make_symbol("log-kernel"), 0.5)
    with pytest.raises(ValueError):
        bl.p_mean_oscillation(make_symbol("log-kernel"), [1j], 1.0, 2.0, spec, "median")
