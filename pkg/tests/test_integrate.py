import math

import numpy as np
import pytest

from siegel import geometry as geo
from siegel import integrate as itg
from siegel.integrate import QuadratureError, QuadratureSpec


def kz2(z):
    return lambda w: np.abs(geo.normalized_kernel(z, w)) ** 2


def test_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec("trapezoid")
    with pytest.raises(ValueError):
        QuadratureSpec(node_count=itg.MIN_NODES - 1)
    with pytest.raises(ValueError):
        QuadratureSpec(seed=-1)
    with pytest.raises(ValueError):
        QuadratureSpec(n=0)
    assert QuadratureSpec(node_count=itg.MIN_NODES).node_count == 100


def test_child_seeds_are_distinct_and_stable():
    s = QuadratureSpec(seed=7)
    assert s.child(1) == s.child(1)
    assert s.child(1).seed != s.child(2).seed != s.seed
    assert itg.derive_seed(7, 1) == s.child(1).seed


@pytest.mark.parametrize("scheme", itg.SCHEMES)
def test_determinism(scheme):
    spec = QuadratureSpec(scheme, 4096, 3, 2)
    z = np.array([0.5, 2.0 + 1.5j])
    a = itg.integrate_halfspace(kz2(z), spec)
    b = itg.integrate_halfspace(kz2(z), spec)
    assert a == b
    c = itg.integrate_metric_ball(z, 1.0, geo.rho, spec)
    assert c == itg.integrate_metric_ball(z, 1.0, geo.rho, spec)


@pytest.mark.parametrize("n", [1, 2])
def test_kernel_normalization_qmc(n):
    spec = QuadratureSpec("qmc", 2**14, 0, n)
    for k, z in enumerate([geo.base_point(n), geo.dilation(0.3)(geo.base_point(n))]):
        res = itg.integrate_halfspace(kz2(z), spec.child(k))
        assert res.agrees_with(1.0, 4.0, 1e-12)


@pytest.mark.parametrize("n", [1, 2])
def test_kernel_normalization_polar(n):
    spec = QuadratureSpec("polar", 2**16, 0, n)
    res = itg.integrate_halfspace(kz2(geo.base_point(n)), spec)
    assert res.std_error == 0.0
    assert abs(res.value - 1.0) < 1e-8


def test_volume_example():
    spec = QuadratureSpec("qmc", 2**14, 0, 1)
    r = math.atanh(0.5)
    res = itg.integrate_metric_ball([1j], r, lambda w: np.ones(w.shape[0]), spec)
    assert res.agrees_with(16 * math.pi / 9, 3.0, 1e-12)
    assert abs(res.value - 16 * math.pi / 9) < 1e-2


@pytest.mark.parametrize("n", [1, 2])
@pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
def test_volume_product_rule(n, r):
    z = geo.dilation(1.5)(geo.base_point(n))
    res = itg.integrate_metric_ball(z, r, lambda w: np.ones(w.shape[0]), QuadratureSpec("polar", 2**14, 0, n))
    assert abs(res.value / geo.ball_volume(z, r) - 1.0) < 1e-2


def test_indicator_over_halfspace_matches_volume():
    i = geo.base_point(1)
    ind = lambda w: (geo.bergman_metric(i, w) < 1.0).astype(float)
    res = itg.integrate_halfspace(ind, QuadratureSpec("qmc", 2**16, 0, 1))
    assert res.agrees_with(geo.ball_volume(i, 1.0), 3.0)


def test_ball_average_matches_rejection_sampler():
    n = 2
    i = geo.base_point(n)
    nodes = itg.metric_ball_nodes(i, 1.0, QuadratureSpec("qmc", 2**14, 0, n))
    avg = np.sum(nodes.weights * geo.rho(nodes.points)) / np.sum(nodes.weights)
    pts = itg.sample_metric_ball(i, 1.0, 20_000, seed=1)
    vals = geo.rho(pts)
    assert abs(avg - vals.mean()) < 4 * vals.std() / math.sqrt(vals.size)


def test_sample_metric_ball():
    z = np.array([1.0 + 0.5j, 3.0 + 4j])
    pts = itg.sample_metric_ball(z, 0.7, 500, seed=4)
    assert pts.shape == (500, 2)
    assert np.all(geo.bergman_metric(z, pts) < 0.7)
    assert np.array_equal(pts, itg.sample_metric_ball(z, 0.7, 500, seed=4))
    with pytest.raises(ValueError):
        itg.sample_metric_ball(z, 0.7, 0, seed=4)


def test_change_of_variables():
    n = 2
    z = np.array([0.3 - 0.2j, 1.0 + 0.6j])
    c = np.array([-0.5j, 2.0 + 1.0j])
    spec = QuadratureSpec("qmc", 2**15, 2, n)
    f = lambda w: geo.rho(w) * np.abs(geo.bergman_kernel(w, z)) ** 2 / geo.bergman_kernel(z, z).real
    plain = itg.integrate_halfspace(f, spec)
    centered = itg.integrate_halfspace(f, spec.child(1), center=c)
    se = math.hypot(plain.std_error, centered.std_error)
    assert abs(plain.value - centered.value) < 4 * se


def test_nonfinite_integrand_names_node():
    def bad(w):
        v = np.ones(w.shape[0])
        v[5] = np.nan
        return v

    with pytest.raises(QuadratureError) as exc:
        itg.integrate_halfspace(bad, QuadratureSpec("qmc", 1024, 0, 1))
    assert exc.value.node is not None
    assert "node" in str(exc.value)


def test_ball_product_rule_is_exact_on_polynomials():
    for n in (1, 2, 3):
        xi, w = itg.ball_product_rule(n, 6)
        assert np.sum(w) == pytest.approx(geo.unit_ball_volume(n), rel=1e-13)
        # integral of |xi_1|^2 over the ball is pi^n / (n+1)!
        assert np.sum(w * np.abs(xi[:, 0]) ** 2) == pytest.approx(math.pi**n / math.factorial(n + 1), rel=1e-13)
        assert abs(np.sum(w * xi[:, 0] ** 2)) < 1e-13


def test_cube_to_ball_lands_in_ball():
    u = np.random.default_rng(0).random((1000, 4))
    xi = itg.cube_to_ball(u, 2)
    assert np.all(np.linalg.norm(xi, axis=1) <= 1.0)
    assert itg.cube_to_ball(u[:, :0], 0).shape == (1000, 0)


def test_metric_ball_rejects_bad_input():
    spec = QuadratureSpec(n=1)
    with pytest.raises(ValueError):
        itg.metric_ball_nodes([1j], 0.0, spec)
    with pytest.raises(geo.DimensionError):
        itg.metric_ball_nodes([0, 1j], 1.0, spec)
    with pytest.raises(geo.DomainError):
        itg.metric_ball_nodes([-1j], 1.0, spec)
