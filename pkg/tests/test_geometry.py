import math

import numpy as np
import pytest
from hypothesis import given

from conftest import ball_points, interior_points, point_tuples
from siegel import geometry as geo
from siegel.geometry import BPoint, DimensionError, DomainError, HPoint


def rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def cond(*pts):
    """Cancellation factor of rho = Im z_n - |z'|^2 in floating point."""
    return max(1.0, *((abs(p[-1]) + np.sum(np.abs(p[:-1]) ** 2)) / geo.rho(p) for p in pts))


# -- closed-form values ---------------------------------------------------------


def test_rho_pair_values():
    assert geo.rho_pair([1j], [1j]) == pytest.approx(1.0)
    assert geo.rho_pair([1, 2j], [1, 2j]) == pytest.approx(1.0)
    assert geo.rho_pair([1j], [4j]) == pytest.approx(2.5)


def test_rho_values():
    assert geo.rho([1j]) == 1.0
    assert geo.rho([0, 0j]) == 0.0
    for x in (-3.0, 0.0, 7.5):
        assert geo.rho([1, 1j, x + 5j]) == pytest.approx(3.0)


def test_kernel_values():
    assert geo.bergman_kernel([1j], [1j]).real == pytest.approx(1 / (4 * math.pi), rel=1e-14)
    assert geo.bergman_kernel([1j], [4j]) == pytest.approx(1 / (25 * math.pi), rel=1e-14)
    assert geo.normalized_kernel([1j], [4j]) == pytest.approx(math.sqrt(4 * math.pi) / (25 * math.pi), rel=1e-14)
    assert abs(geo.normalized_kernel([1j], [4j]) - 0.04514) < 1e-5
    for n in (1, 2, 3):
        i = geo.base_point(n)
        kzz = geo.normalized_kernel(i, i)
        assert kzz.real == pytest.approx(math.sqrt(math.factorial(n) / (4 * math.pi**n)), rel=1e-14)


def test_metric_values():
    assert geo.bergman_metric([1j], [1j]) == 0.0
    assert geo.bergman_metric([1j], [4j]) == pytest.approx(math.log(2.0), rel=1e-14)


def test_metric_rejects_inconsistent_input():
    with pytest.raises(DomainError):
        geo.bergman_metric([1j], [-1j])


def test_ball_volume_values():
    assert geo.ball_volume([1j], math.atanh(0.5)) == pytest.approx(16 * math.pi / 9, rel=1e-14)
    t = math.tanh(1.0)
    expected = 2 * math.pi**2 * t**4 / (1 - t * t) ** 3
    assert geo.ball_volume(geo.base_point(2), 1.0) == pytest.approx(expected, rel=1e-14)
    with pytest.raises(ValueError):
        geo.ball_volume([1j], 0.0)


@given(interior_points(), interior_points().map(lambda _: None))
def test_ball_volume_monotone_and_dilation(z, _):
    n = z.size
    vols = [geo.ball_volume(z, r) for r in (0.25, 0.5, 1.0, 2.0)]
    assert all(a < b for a, b in zip(vols, vols[1:]))
    t = 1.7
    assert rel(geo.ball_volume(geo.dilation(t)(z), 1.0), t ** (2 * (n + 1)) * vols[2]) < 1e-14 * cond(z)


def test_cayley_values():
    assert np.allclose(geo.cayley([0j]), [1j])
    assert np.allclose(geo.cayley([0, 0j]), geo.base_point(2))
    assert np.allclose(geo.cayley_inv(geo.base_point(3)), 0)
    assert geo.cayley([0.5])[0] == pytest.approx(1j / 3)


def test_mobius_values():
    assert geo.mobius_ball([0.5], [0.25])[0] == pytest.approx(2 / 7)
    xi = np.array([0.3, -0.2j])
    assert np.allclose(geo.mobius_ball(xi, np.zeros(2)), xi)
    assert np.allclose(geo.mobius_ball(xi, xi), 0)
    assert np.allclose(geo.mobius_ball(np.zeros(2), xi), -xi)


def test_jacobians():
    z = np.array([2.0 + 4j])
    assert geo.jacobian(geo.sigma([1j])) == 1.0
    assert geo.jacobian(geo.sigma(z)) == pytest.approx(1 / 16)
    assert geo.jacobian(geo.sigma_inv(z)) == pytest.approx(16)
    assert geo.jacobian(geo.heisenberg([1 + 1j, 3j])) == 1.0
    assert geo.jacobian(geo.dilation(2.0), n=2) == 2.0**6
    with pytest.raises(ValueError):
        geo.jacobian(geo.tau(z))
    with pytest.raises(ValueError):
        geo.jacobian(geo.dilation(2.0))


def test_automorphism_validation():
    with pytest.raises(ValueError):
        geo.dilation(0.0)
    with pytest.raises(DomainError):
        geo.sigma([-1j])
    with pytest.raises(ValueError):
        geo.Automorphism("rotation")


def test_points():
    z = HPoint.of([1.0], 3j)
    assert z.n == 2 and z.zn == 3j and list(z.zp) == [1.0]
    assert geo.rho(z) == pytest.approx(2.0)
    with pytest.raises(DomainError):
        HPoint.of([], 0j)
    assert HPoint.of([], 0j, interior=False).n == 1
    with pytest.raises(DomainError):
        BPoint([0.8, 0.8])
    with pytest.raises(DimensionError):
        HPoint([])


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        geo.rho_pair([1j], [0, 1j])
    with pytest.raises(DimensionError):
        geo.bergman_metric([1j], [0, 1j])


def test_kernel_rejects_boundary():
    with pytest.raises(DomainError):
        geo.bergman_kernel([0j], [1j])


# -- properties -------------------------------------------------------------------


@given(point_tuples(3))
def test_rho_transforms_under_sigma(pts):
    z, u, v = pts
    s, si = geo.sigma(z), geo.sigma_inv(z)
    r = geo.rho(z)
    su, sv, iu, iv = s(u), s(v), si(u), si(v)
    assert rel(geo.rho_pair(su, sv), geo.rho_pair(u, v) / r) < 1e-12 * cond(u, v, su, sv)
    assert rel(geo.rho_pair(iu, iv), r * geo.rho_pair(u, v)) < 1e-12 * cond(u, v, iu, iv)


@given(point_tuples(3))
def test_metric_invariance(pts):
    z, u, v = pts
    b = geo.bergman_metric(u, v)
    for a in (geo.sigma(z), geo.sigma_inv(z)):
        au, av = a(u), a(v)
        assert abs(geo.bergman_metric(au, av) - b) <= 1e-12 * cond(u, v, au, av) * max(1.0, b)


@given(point_tuples(2))
def test_sigma_sends_base_to_i_and_round_trips(pts):
    z, u = pts
    assert np.allclose(geo.sigma(z)(z), geo.base_point(z.size), atol=1e-10)
    back = geo.sigma_inv(z)(geo.sigma(z)(u))
    assert np.all(np.abs(back - u) <= 1e-10 * np.maximum(1.0, np.abs(u)))


@given(interior_points(), interior_points().map(lambda _: None))
def test_dilation_scales_rho(z, _):
    for t in (0.1, 1.0, 3.0):
        assert rel(geo.rho(geo.dilation(t)(z)), t * t * geo.rho(z)) < 1e-14 * cond(z)


@given(point_tuples(2))
def test_kernel_hermitian_and_bounded(pts):
    z, w = pts
    n = z.size
    assert rel(geo.bergman_kernel(z, w), np.conj(geo.bergman_kernel(w, z))) < 1e-14 * cond(z, w)
    assert rel(geo.rho_pair(z, w), np.conj(geo.rho_pair(w, z))) < 1e-14 * cond(z, w)
    assert abs(geo.bergman_kernel(z, w)) <= 2 ** (n + 1) * geo.bergman_kernel(z, z).real * (1 + 1e-12)


@given(point_tuples(2))
def test_rho_pair_lower_bound(pts):
    z, w = pts
    assert 2 * abs(geo.rho_pair(z, w)) >= max(geo.rho(z), geo.rho(w)) * (1 - 1e-12)


@given(point_tuples(2))
def test_metric_symmetric_and_positive(pts):
    z, w = pts
    b = geo.bergman_metric(z, w)
    assert abs(b - geo.bergman_metric(w, z)) <= 1e-9 * max(1.0, b)
    assert b >= 0.0


@given(interior_points(), ball_points(1).map(lambda _: None))
def test_cayley_round_trip(z, _):
    assert np.all(np.abs(geo.cayley(geo.cayley_inv(z)) - z) <= 1e-10 * np.maximum(1.0, np.abs(z)))


@given(ball_points(2), ball_points(2))
def test_mobius_involution_and_metric(xi, eta):
    assert np.allclose(geo.mobius_ball(xi, geo.mobius_ball(xi, eta)), eta, atol=1e-12)
    assert np.allclose(geo.mobius_ball(xi, np.zeros(2)), xi, atol=1e-15)
    a = geo.bergman_metric(geo.cayley(xi), geo.cayley(eta))
    b = geo.ball_metric(xi, eta)
    assert abs(a - b) <= 1e-9 * max(1.0, b)


@given(point_tuples(3))
def test_rho_ratio_bounds(pts):
    z, u, v = pts
    r = float(geo.bergman_metric(u, v))
    t = math.tanh(r)
    if t > 0.999:
        return
    q = abs(geo.rho_pair(z, u)) / abs(geo.rho_pair(z, v))
    lo, hi = (1 - t) / (1 + t), (1 + t) / (1 - t)
    assert lo * (1 - 1e-10) <= q <= hi * (1 + 1e-10)


@given(interior_points())
def test_cayley_inverse_jacobian(z):
    xi = geo.cayley_inv(z)
    assert rel(geo.cayley_inv_jacobian(z) * geo.cayley_jacobian(xi), 1.0) < 1e-10


@given(interior_points())
def test_tau_is_involution_and_swaps(a):
    tau = geo.tau(a)
    i = geo.base_point(a.size)
    assert np.all(np.abs(tau(i) - a) <= 1e-9 * np.maximum(1.0, np.abs(a)))
    assert np.allclose(tau(a), i, atol=1e-9)
