import math

import numpy as np
import pytest
from hypothesis import given

from conftest import interior_points
from siegel import geometry as geo
from siegel import symbols as sy
from siegel.symbols import make_symbol


def test_const_claims_and_value():
    f = make_symbol("const", c=1)
    assert f.claims == {sy.BOUNDED, sy.HOLOMORPHIC, sy.VO, sy.BLOCH, sy.LITTLE_BLOCH}
    assert sy.eval_symbol(make_symbol("const", c=2.5), [3 + 1j]) == 2.5
    assert np.all(sy.eval_symbol_gradient(f, [1.0, 3j]) == 0)


def test_log_kernel():
    f = make_symbol("log-kernel")
    assert f.claims == {sy.HOLOMORPHIC, sy.BLOCH, sy.BO}
    assert sy.eval_symbol(f, [1j]) == pytest.approx(math.log(2) + 0.5j * math.pi)
    assert sy.eval_symbol_gradient(f, [1j])[-1] == pytest.approx(-0.5j)


def test_beta_dist():
    f = make_symbol("beta-dist")
    assert f.claims == {sy.BO}
    assert sy.eval_symbol(f, [0, 1j]) == 0.0
    assert sy.eval_symbol(f, [4j]) == pytest.approx(math.log(2))


def test_unknown_symbol_and_params():
    with pytest.raises(sy.UnknownSymbol):
        make_symbol("sawtooth")
    with pytest.raises(ValueError):
        make_symbol("const", frequency=3)


def test_evaluation_outside_domain():
    with pytest.raises(geo.DomainError):
        sy.eval_symbol(make_symbol("cayley-n"), [-1j])


def test_gradient_requires_holomorphic():
    with pytest.raises(sy.NotHolomorphic):
        sy.eval_symbol_gradient(make_symbol("beta-dist"), [1j])
    with pytest.raises(sy.NotHolomorphic):
        sy.eval_symbol_gradient(make_symbol("conj-log-kernel"), [1j])


def test_conjugation():
    f = make_symbol("log-kernel")
    g = make_symbol("conj-log-kernel")
    assert g.id == "conj-log-kernel"
    assert sy.CONJ_HOLOMORPHIC in g.claims and sy.HOLOMORPHIC not in g.claims
    assert sy.conjugate(g).holomorphic
    z = np.array([0.5 + 2j, -1 + 0.3j])
    assert np.allclose(g(z[:, None]), np.conj(f(z[:, None])))


def test_corpus_is_complete():
    for sid in ("const", "coordinate", "log-kernel", "beta-dist", "rho-power", "bump",
                "bump-wave", "dilation-wave", "cayley-n"):
        assert sid in sy.CORPUS_IDS
    for s in (0.25, 0.5):
        assert sy.eval_symbol(make_symbol("rho-power", s=s), [0, 4j]) == pytest.approx(4**s)


def test_bump_support():
    f = make_symbol("bump")
    center, radius = sy.support_ball(f, 2)
    assert np.allclose(center, geo.base_point(2)) and radius == 1.0
    far = geo.dilation(10.0)(geo.base_point(2))
    assert f(far) == 0.0
    assert f(geo.base_point(2)) == pytest.approx(1.0)
    z = geo.cayley(np.array([[0.0, 0.76], [0.0, 0.77]]))
    inside = geo.bergman_metric(geo.base_point(2), z) < 1.0
    assert np.all((np.abs(f(z)) > 0) == inside)


def test_coordinate_index():
    f = make_symbol("coordinate", k=1)
    assert f([2.0, 5j]) == 2.0
    assert f([5j]) == 5j


@pytest.mark.parametrize("sid", ["const", "coordinate", "log-kernel", "cayley-n"])
@given(z=interior_points())
def test_analytic_gradients_match_differences(sid, z):
    f = make_symbol(sid)
    a = sy.eval_symbol_gradient(f, z)
    d = sy.eval_symbol_gradient(f, z, analytic=False)
    scale = max(np.linalg.norm(a), 1e-300)
    assert np.linalg.norm(a - d) <= 1e-6 * scale + 1e-12


@given(z=interior_points())
def test_symbols_are_finite(z):
    for sid in sy.CORPUS_IDS:
        assert np.isfinite(sy.eval_symbol(make_symbol(sid), z))


def test_symbols_vectorize():
    z = np.array([[0.1, 1j], [0.0, 2 + 3j], [0.5j, 1 + 0.5j]])
    for sid in sy.CORPUS_IDS:
        f = make_symbol(sid)
        assert np.allclose(f(z), [f(p) for p in z])


def test_arithmetic():
    f, g = make_symbol("cayley-n"), make_symbol("const", c=2.0)
    z = np.array([0.3, 2j])
    assert sy.add(f, g)(z) == pytest.approx(f(z) + 2.0)
    assert sy.subtract(f, g)(z) == pytest.approx(f(z) - 2.0)
    assert sy.add(f, g).claims == f.claims & g.claims
    h = sy.compose(f, geo.dilation(2.0))
    assert h(z) == pytest.approx(f(geo.dilation(2.0)(z)))
    assert sy.with_id(f, "other").id == "other"


def test_claims_validated():
    with pytest.raises(ValueError):
        sy.Symbol("x", lambda z: z[..., 0], {"Smooth"})
