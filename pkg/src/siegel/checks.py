"""Verification suite: each check measures one identity or estimate and
compares it with a tolerance.

Checks return :class:`Check` records.  ``status`` is ``"pass"``, ``"fail"``
or ``"conflict"``; the last marks a stated constant that disagrees with the
normalizations used throughout the library (the consistent variant is
checked alongside it).  Conflicts are reported but do not fail ``verify``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from . import bloch as bl
from . import geometry as geo
from . import hankel as hk
from . import integrate as itg
from . import oscillation as osc
from .integrate import QuadratureSpec
from .symbols import make_symbol

FAMILY_ALPHA = 0.01


@dataclass(frozen=True)
class Check:
    name: str
    citation: str
    value: float
    tolerance: float
    status: str
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def as_row(self) -> dict:
        return {"check": self.name, "citation": self.citation, "value": self.value,
                "tolerance": self.tolerance, "status": self.status, "detail": self.detail}


def _check(name, citation, value, tol, ok, detail="", conflict=False) -> Check:
    status = "pass" if ok else ("conflict" if conflict else "fail")
    return Check(name, citation, float(value), float(tol), status, detail)


def bonferroni_z(m: int, alpha: float = FAMILY_ALPHA) -> float:
    """Two-sided z threshold for m simultaneous comparisons at familywise level alpha."""
    return float(norm.ppf(1.0 - alpha / (2.0 * max(m, 1))))


def random_points(rng: np.random.Generator, n: int, count: int, spread: float = 1.0) -> np.ndarray:
    """Interior points with boundary distances spread over a few orders of magnitude."""
    zp = (rng.normal(size=(count, n - 1)) + 1j * rng.normal(size=(count, n - 1))) * spread
    h = np.exp(rng.normal(size=count) * spread)
    x = rng.normal(size=count) * 2.0 * spread
    z = np.empty((count, n), dtype=complex)
    z[:, :-1] = zp
    z[:, -1] = x + 1j * (np.sum(np.abs(zp) ** 2, axis=1) + h)
    return z


def random_ball_points(rng: np.random.Generator, n: int, count: int, radius: float) -> np.ndarray:
    """Uniform points in the Euclidean ball of the given radius (< 1)."""
    u = rng.normal(size=(count, n)) + 1j * rng.normal(size=(count, n))
    u /= np.linalg.norm(u, axis=1)[:, None]
    return radius * rng.random(count)[:, None] ** (1.0 / (2 * n)) * u


def _rel(a, b) -> np.ndarray:
    a, b = np.asarray(a), np.asarray(b)
    return np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-300)


# -- exact identities ----------------------------------------------------------


def identity_checks(n: int, count: int = 10_000, seed: int = 0, tol: float = 1e-10) -> list[Check]:
    rng = np.random.default_rng(itg.derive_seed(seed, 1, n))
    z, u, v = (random_points(rng, n, count) for _ in range(3))
    rz = geo.rho(z)
    ruv = geo.rho_pair(u, v)
    su, sv = geo.sigma_map(z, u), geo.sigma_map(z, v)
    iu, iv = geo.sigma_inv_map(z, u), geo.sigma_inv_map(z, v)
    e1 = _rel(geo.rho_pair(su, sv), ruv / rz)
    e2 = _rel(geo.rho_pair(iu, iv), rz * ruv)
    b = geo.bergman_metric(u, v)
    e3 = np.maximum(_rel(geo.bergman_metric(su, sv), b), _rel(geo.bergman_metric(iu, iv), b))
    e4 = np.max(np.abs(geo.sigma_map(z, z) - geo.base_point(n)), axis=-1)
    e5 = np.max(np.abs(geo.sigma_inv_map(z, su) - u) / np.maximum(1.0, np.abs(u)), axis=-1)
    out = [
        _check("rho under sigma", "rho(sigma_z u, sigma_z v) = rho(u, v) / rho(z)", e1.max(), tol, e1.max() <= tol),
        _check("rho under sigma inverse", "rho(sigma_z^-1 u, sigma_z^-1 v) = rho(z) rho(u, v)", e2.max(), tol, e2.max() <= tol),
        _check("metric invariance", "beta is invariant under sigma_z and sigma_z^-1", e3.max(), tol, e3.max() <= tol),
        _check("sigma sends z to i", "sigma_z(z) = i", e4.max(), tol, e4.max() <= tol),
        _check("sigma round trip", "sigma_z^-1 o sigma_z = identity", e5.max(), tol, e5.max() <= tol),
    ]
    # 2|rho(z, w)| >= max(rho(z), rho(w))
    lhs = 2.0 * np.abs(geo.rho_pair(u, v))
    rhs = np.maximum(geo.rho(u), geo.rho(v))
    worst = float(np.max((rhs - lhs) / rhs))
    out.append(_check("rho-form lower bound", "2|rho(z, w)| >= max(rho(z), rho(w))",
                      worst, tol, worst <= tol))
    # Hermitian symmetry and the kernel bound |K(z, w)| <= 2^(n+1) K(z, z)
    herm = float(np.max(_rel(geo.bergman_kernel(u, v), np.conj(geo.bergman_kernel(v, u)))))
    out.append(_check("kernel Hermitian symmetry", "K(z, w) = conj K(w, z)", herm, tol, herm <= tol))
    kb = float(np.max(np.abs(geo.bergman_kernel(u, v)) / (2 ** (n + 1) * geo.bergman_kernel(u, u).real)))
    out.append(_check("kernel bound", "|K(z, w)| <= 2^(n+1) K(z, z)", kb, 1.0 + tol, kb <= 1.0 + tol))
    # rho ratio bounds for beta(u, v) <= r
    worst = 0.0
    for r in (0.5, 1.0, 2.0):
        t = math.tanh(r)
        w = geo.cayley(random_ball_points(rng, n, count, t * (1.0 - 1e-12)))
        vv = geo.sigma_inv_map(u, w)
        q = np.abs(geo.rho_pair(z, u)) / np.abs(geo.rho_pair(z, vv))
        lo, hi = (1 - t) / (1 + t), (1 + t) / (1 - t)
        worst = max(worst, float(np.max(np.maximum(lo - q, q - hi) / lo)))
    out.append(_check("rho ratio bounds", "(1-tanh r)/(1+tanh r) <= |rho(z,u)|/|rho(z,v)| <= (1+tanh r)/(1-tanh r) for beta(u,v) <= r",
                      worst, tol, worst <= tol))
    # Cayley transform and ball automorphisms
    xi = random_ball_points(rng, n, count, 0.99)
    eta = random_ball_points(rng, n, count, 0.99)
    c1 = float(np.max(np.abs(geo.cayley_inv(geo.cayley(xi)) - xi)))
    zz = random_points(rng, n, count)
    c2 = float(np.max(_rel(geo.cayley(geo.cayley_inv(zz)), zz)))
    out.append(_check("Cayley round trip", "Phi^-1 o Phi = identity and Phi o Phi^-1 = identity",
                      max(c1, c2), tol, max(c1, c2) <= tol))
    c3 = float(np.max(np.abs(geo.mobius_ball(xi, geo.mobius_ball(xi, eta)) - eta)))
    out.append(_check("ball involution", "phi_xi o phi_xi = identity", c3, tol, c3 <= tol))
    c4 = float(np.max(_rel(geo.bergman_metric(geo.cayley(xi), geo.cayley(eta)), geo.ball_metric(xi, eta))))
    out.append(_check("Cayley metric correspondence", "beta(Phi xi, Phi eta) = beta_B(xi, eta)", c4, tol, c4 <= tol))
    return out


# -- quadrature-level checks --------------------------------------------------------


def volume_checks(spec: QuadratureSpec, radii=(0.5, 1.0, 2.0), k: float = 3.0) -> list[Check]:
    rng = np.random.default_rng(itg.derive_seed(spec.seed, 2, spec.n))
    z = random_points(rng, spec.n, 1)[0]
    out = []
    for j, r in enumerate(radii):
        res = itg.integrate_metric_ball(z, r, lambda w: np.ones(w.shape[:-1]), spec.child(j))
        exact = float(geo.ball_volume(z, r))
        err = abs(res.real - exact)
        out.append(_check(f"ball volume r={r}", "|D(z,r)| = (4 pi^n / n!) tanh^2n(r) / (1 - tanh^2 r)^(n+1) rho(z)^(n+1)",
                          err / exact, k * res.std_error / exact, res.agrees_with(exact, k, 1e-12 * exact),
                          f"quadrature {res.real:.10g} +- {res.std_error:.3g}, closed form {exact:.10g}"))
    return out


def normalization_checks(spec: QuadratureSpec, count: int = 20, k: float = 3.0) -> list[Check]:
    rng = np.random.default_rng(itg.derive_seed(spec.seed, 3, spec.n))
    zs = random_points(rng, spec.n, count, spread=0.5)
    one = make_symbol("const")
    zk, zb = [], []
    for j, z in enumerate(zs):
        nodes = itg.halfspace_nodes(spec.child(j))
        kz = nodes.integrate(np.abs(geo.normalized_kernel(z, nodes.points)) ** 2)
        zk.append(abs(kz.real - 1.0) / max(kz.std_error, 1e-300))
        b = osc.berezin(one, z, spec.child(j, 1))
        zb.append(abs(b.real - 1.0) / max(b.std_error, 1e-12))
    return [
        _check("kernel normalization", "||k_z||^2 = 1", max(zk), k, max(zk) <= k,
               "value is the largest |estimate - 1| / std_error"),
        _check("Berezin of 1", "Berezin(1)(z) = 1", max(zb), k, max(zb) <= k,
               "value is the largest |estimate - 1| / std_error"),
    ]


def berezin_covariance_checks(spec: QuadratureSpec, count: int = 20, tol: float = 5e-3,
                              k: float = 3.0) -> list[Check]:
    """Berezin(rho)(z) / rho(z) is constant; the constant is 1/n."""
    rng = np.random.default_rng(itg.derive_seed(spec.seed, 4, spec.n))
    zs = random_points(rng, spec.n, count)
    f = make_symbol("rho-power", s=1.0)
    vals, ses = [], []
    for z in zs:
        b = osc.berezin(f, z, spec)
        r = float(geo.rho(z))
        vals.append(b.real / r)
        ses.append(b.std_error / r)
    vals = np.array(vals)
    spread = float((vals.max() - vals.min()) / np.mean(vals))
    target = 1.0 / spec.n
    dev = abs(vals[0] - target)
    return [
        _check("Berezin dilation covariance", "Berezin(rho)(z) / rho(z) is constant in z",
               spread, tol, spread <= tol),
        _check("Berezin of rho constant", "Berezin(rho)(z) = rho(z) / n",
               dev / max(ses[0], 1e-300), k, dev <= k * ses[0],
               f"ratio {vals[0]:.8g} +- {ses[0]:.3g}, target {target:.8g}"),
    ]


MO_SYMBOLS = ("beta-dist", "bump", "dilation-wave", "cayley-n", "bump-wave")


def mo_route_checks(spec: QuadratureSpec, centers: int = 10, symbols=MO_SYMBOLS,
                    r: float = 1.0) -> list[Check]:
    rng = np.random.default_rng(itg.derive_seed(spec.seed, 5, spec.n))
    zs = geo.cayley(random_ball_points(rng, spec.n, centers, math.tanh(1.5)))
    m = len(symbols) * centers
    zc = bonferroni_z(m)
    z1, z2 = [], []
    for a, sid in enumerate(symbols):
        f = make_symbol(sid)
        for b, z in enumerate(zs):
            s = spec.child(a, b)
            p = osc.mean_oscillation(f, z, s, "definition")
            q = osc.mean_oscillation(f, z, s.child(7), "centered")
            z1.append(abs(p.value - q.value) / max(math.hypot(p.std_error, q.std_error), 1e-300))
            p = osc.mean_oscillation_r(f, z, r, s, "variance")
            q = osc.mean_oscillation_r(f, z, r, s.child(7), "pairs")
            z2.append(abs(p.value - q.value) / max(math.hypot(p.std_error, q.std_error), 1e-300))
    detail = f"largest z-score over {m} comparisons; threshold is the familywise {FAMILY_ALPHA} level"
    return [
        _check("MO definition vs centered", "MO(f)(z)^2 = Berezin(|f|^2) - |Berezin f|^2 = Berezin(|f - f~(z)|^2)",
               max(z1), zc, max(z1) <= zc, detail),
        _check("MO_r variance vs pairs", "MO_r(f)(z)^2 = ball-average variance = half the mean of |f(u) - f(v)|^2",
               max(z2), zc, max(z2) <= zc, detail),
    ]


def forelli_rudin_checks(spec: QuadratureSpec, cases=None, tol: float = 1e-2) -> list[Check]:
    """value * rho(z)^(s - t - n - 1) is constant along a dilation orbit.

    Default cases are (t, s, alpha) = (0, n + 2, 0) and (0, n + 2, 1).
    """
    n = spec.n
    if cases is None:
        cases = ((0.0, n + 2.0, 0.0), (0.0, n + 2.0, 1.0))
    base = np.array([0.3] * (n - 1) + [0.2 + 1.5j], dtype=complex)
    orbit = [geo.dilation(2.0 ** k)(base) for k in range(-2, 3)]
    out = []
    for t, s, alpha in cases:
        vals = np.array([osc.forelli_rudin_integral(z, t, s, alpha, spec).real
                         * float(geo.rho(z)) ** (s - t - n - 1) for z in orbit])
        spread = float((vals.max() - vals.min()) / np.mean(vals))
        out.append(_check(f"Forelli-Rudin scaling t={t:g} s={s:g} alpha={alpha:g}",
                          "integral of beta^alpha rho(w)^t / |rho(z,w)|^s scales like rho(z)^(n+1+t-s)",
                          spread, tol, spread <= tol, f"normalized values {np.array2string(vals, precision=8)}"))
    return out


# -- Hankel checks -------------------------------------------------------------------


def gram_checks(spec: QuadratureSpec, degree_cap: int = 6, fault: bool = False,
                tol: float = 1e-6, polys: int = 10) -> list[Check]:
    rep = hk.certify_basis(degree_cap, spec, fault, tol)
    out = [
        _check("Gram certification", "transported ball monomials are orthonormal in A^2",
               rep.gram_deviation, tol, rep.gram_deviation <= tol,
               "fault multiplier |j| injected" if fault else ""),
        _check("Gram reproducing probe", "<e_a, k_z> = e_a(z) / sqrt K(z, z)",
               rep.reproducing_deviation, tol, rep.reproducing_deviation <= tol,
               "fault multiplier |j| injected" if fault else ""),
    ]
    G = hk.gram_matrix(degree_cap, spec, fault)
    rng = np.random.default_rng(itg.derive_seed(spec.seed, 6))
    worst = 0.0
    for _ in range(polys):
        c = rng.normal(size=G.shape[0]) + 1j * rng.normal(size=G.shape[0])
        ball = float(np.sum(np.abs(c) ** 2))
        worst = max(worst, abs(float(np.real(np.conj(c) @ G @ c)) - ball) / ball)
    out.append(_check("isometry on polynomials", "||p||_{A^2(B)} = ||transported p||_{A^2(U)}",
                      worst, tol, worst <= tol))
    return out


def zero_hankel_checks(spec: QuadratureSpec, degree_cap: int | None = None,
                       symbols=None, tol: float = 1e-3) -> list[Check]:
    """Truncated ||H_f|| for holomorphic symbols, relative to ||f e_0||.

    Bounded holomorphic symbols use a projection span one degree above the
    test span, which holds f e_j exactly when f is a ball polynomial.  The
    unbounded log-kernel needs a wide span plus extrapolation in its degree.
    """
    n = spec.n
    cap = degree_cap if degree_cap is not None else hk.default_cap(n)
    if symbols is None:
        symbols = ("const", "cayley-n", "log-kernel") if n == 1 else ("const", "cayley-n")
    out = []
    for sid in symbols:
        f = make_symbol(sid)
        if sid == "log-kernel":
            est = hk.truncated_hankel_norm(f, cap, spec, proj_cap=16 * cap, extrapolate=True)
        else:
            est = hk.truncated_hankel_norm(f, cap, spec, proj_cap=cap + 1)
        out.append(_check(f"zero Hankel {sid}", "H_f = 0 for holomorphic f",
                          est.relative, tol, est.relative <= tol,
                          f"degree cap {cap}, projection cap {est.proj_cap}"))
    return out


def kernel_tail(z, degree_cap: int, spec: QuadratureSpec) -> float:
    """||k_z - P_span k_z||: the part of k_z the truncated span cannot hold."""
    proj = hk.project_onto_span(lambda w: geo.normalized_kernel(z, w), degree_cap, spec)
    return math.sqrt(max(proj.norm2 - proj.captured, 0.0))


def reproducing_residual_checks(spec: QuadratureSpec, caps=(5, 10), quad_tol: float = 1e-4,
                                symbols=("beta-dist", "conj-log-kernel", "dilation-wave")) -> list[Check]:
    """Residual of P(conj(f_z) k_z) = f~(z) k_z at 5 probe points.

    The tolerance at z is the truncation tail of k_z scaled by ||f k_z||,
    plus the quadrature tolerance of the certified basis.
    """
    n = spec.n
    rng = np.random.default_rng(itg.derive_seed(spec.seed, 9, n))
    probes = [geo.base_point(n)] + list(geo.cayley(random_ball_points(rng, n, 4, math.tanh(1.0))))
    nodes = hk.nodes_for(spec)
    ratio, worst = {}, {}
    for cap in caps:
        ratio[cap], worst[cap] = 0.0, 0.0
        for z in probes:
            tail = kernel_tail(z, cap, spec)
            k2 = np.abs(geo.normalized_kernel(z, nodes.points)) ** 2 * nodes.weights
            for sid in symbols:
                f = make_symbol(sid)
                scale = math.sqrt(float(np.sum(np.abs(f(nodes.points)) ** 2 * k2)))
                res = hk.berezin_reproducing_residual(f, z, cap, spec)
                ratio[cap] = max(ratio[cap], res / (tail * max(1.0, scale) + quad_tol))
                worst[cap] = max(worst[cap], res)
    lo, hi = caps
    return [
        _check("Berezin reproducing residual", "P(conj(f_z) k_z) = f~(z) k_z",
               ratio[hi], 1.0, ratio[hi] <= 1.0,
               f"degree cap {hi}; value is the largest residual over its truncation tolerance; largest residual {worst[hi]:.3g}"),
        _check("residual shrinks with degree", "P(conj(f_z) k_z) = f~(z) k_z, truncation error",
               worst[hi] / max(worst[lo], 1e-300), 1.0, worst[hi] <= worst[lo],
               f"cap {lo}: {worst[lo]:.3g}, cap {hi}: {worst[hi]:.3g}"),
    ]


BMO_CORPUS = ("log-kernel", "cayley-n", "beta-dist", "bump", "bump-wave", "dilation-wave")


def hankel_bmo_constant(cap: int, hspec: QuadratureSpec, mspec: QuadratureSpec,
                        symbols=BMO_CORPUS, grid="ray-ladder") -> tuple[float, dict]:
    """Smallest C with (||H_f|| + ||H_conj f||) / ||f||_BMO in [1/C, C] over the corpus."""
    ratios = {}
    for sid in symbols:
        f = make_symbol(sid)
        h = sum(hk.truncated_hankel_norm(g, cap, hspec, proj_cap=4 * cap, extrapolate=True).norm_estimate
                for g in (f, f.conj()))
        bmo = osc.seminorm_scan(f, "BMO", grid, mspec).sup_estimate
        ratios[sid] = h / bmo
    v = np.array(list(ratios.values()))
    return float(max(v.max(), 1.0 / v.min())), ratios


def lemma_kz_constant(cap: int, spec: QuadratureSpec, mspec: QuadratureSpec,
                      symbols=BMO_CORPUS, points: int = 5) -> float:
    """Smallest C with MO(f)(z) <= C (||H_f k_z|| + ||H_conj f k_z||) at probe points."""
    n = spec.n
    rng = np.random.default_rng(itg.derive_seed(spec.seed, 10, n))
    probes = [geo.base_point(n)] + list(geo.cayley(random_ball_points(rng, n, points - 1, math.tanh(1.0))))
    C = 0.0
    for sid in symbols:
        f = make_symbol(sid)
        for j, z in enumerate(probes):
            mo = osc.mean_oscillation(f, z, mspec.child(j)).value
            h = hk.hankel_on_kz(f, z, cap, spec) + hk.hankel_on_kz(f.conj(), z, cap, spec)
            if h > 0:
                C = max(C, mo / h)
            elif mo > 1e-6:
                return math.inf
    return C


def hankel_ratio_checks(n: int = 1, cap: int = 5, nodes: int = 2**15, seed: int = 0,
                        stability: float = 0.2) -> list[Check]:
    out = []
    cs, ks = [], []
    for c, N in ((cap, nodes), (2 * cap, 2 * nodes)):
        hs = QuadratureSpec("polar", N, seed, n)
        ms = QuadratureSpec("qmc", N, seed, n)
        C, ratios = hankel_bmo_constant(c, hs, ms)
        cs.append(C)
        ks.append(lemma_kz_constant(c, hs, ms))
    for label, vals, cite in (
            ("Hankel/BMO two-sided constant", cs, "(||H_f|| + ||H_conj f||) / ||f||_BMO lies in [1/C, C]"),
            ("MO against Hankel on k_z constant", ks, "MO(f)(z) <= C (||H_f k_z|| + ||H_conj f k_z||)")):
        drift = abs(vals[1] - vals[0]) / vals[0] if math.isfinite(vals[0]) and vals[0] > 0 else math.inf
        out.append(_check(label, cite, drift, stability, drift <= stability and math.isfinite(vals[1]),
                          f"C = {vals[0]:.6g} at degree {cap}, {vals[1]:.6g} at degree {2 * cap}"))
    return out


# -- invariant gradient checks ------------------------------------------------------


GRADIENT_SYMBOLS = ("log-kernel", "cayley-n", "coordinate", "const")


def bloch_checks(n: int, seed: int = 0, points: int = 50, pairs: int = 100) -> list[Check]:
    rng = np.random.default_rng(itg.derive_seed(seed, 11, n))
    i = geo.base_point(n)
    logk = make_symbol("log-kernel")
    out = []
    g = float(bl.invariant_gradient(logk, i))
    out.append(_check("invariant gradient of log-kernel at i", "|grad~ log(z_n + i)|(i) = sqrt 2",
                      abs(g - math.sqrt(2.0)), 1e-10, abs(g - math.sqrt(2.0)) <= 1e-10))
    # gradient at i against the Euclidean gradient of the pullback at 0
    e_max = {bl.TRANSFER_FACTOR: 0.0, bl.STATED_TRANSFER_FACTOR: 0.0}
    for sid in GRADIENT_SYMBOLS:
        f = make_symbol(sid)
        a = float(bl.invariant_gradient(f, i))
        for fac in e_max:
            b = bl.transfer_value(f, i, fac)
            e_max[fac] = max(e_max[fac], float(_rel(a, b)) if max(a, b) > 0 else 0.0)
    out.append(_check("gradient at i, factor sqrt 2", "|grad~ f(i)| = sqrt 2 |grad (f o Phi)(0)|",
                      e_max[bl.TRANSFER_FACTOR], 1e-8, e_max[bl.TRANSFER_FACTOR] <= 1e-8))
    out.append(_check("gradient at i, stated factor 2", "|grad~ f(i)| = 2 |grad (f o Phi)(0)|",
                      e_max[bl.STATED_TRANSFER_FACTOR], 1e-8, e_max[bl.STATED_TRANSFER_FACTOR] <= 1e-8,
                      "stated constant is off by sqrt 2 for the displayed gradient formula", conflict=True))
    zs = geo.cayley(random_ball_points(rng, n, points, 0.95))
    worst = {"sqrt2": 0.0, "stated": 0.0, "fd-ball": 0.0, "fd": 0.0, "mobius": 0.0}
    for sid in GRADIENT_SYMBOLS:
        f = make_symbol(sid)
        a = np.asarray(bl.invariant_gradient(f, zs))
        d = np.asarray(bl.invariant_gradient(f, zs, analytic=False))
        for j, z in enumerate(zs):
            if a[j] == 0.0:
                continue
            worst["sqrt2"] = max(worst["sqrt2"], float(_rel(a[j], bl.transfer_value(f, z))))
            worst["stated"] = max(worst["stated"], float(_rel(a[j], bl.transfer_value(f, z, bl.STATED_TRANSFER_FACTOR))))
            worst["fd-ball"] = max(worst["fd-ball"], float(_rel(a[j], bl.transfer_value(f, z, analytic=False))))
            worst["fd"] = max(worst["fd"], float(_rel(a[j], d[j])))
        for j, z in enumerate(zs[:20]):
            aa = geo.cayley(random_ball_points(rng, n, 1, 0.9)[0])
            lhs = bl.composed_gradient(f, aa, z)
            rhs = float(bl.invariant_gradient(f, geo.tau(aa)(z)))
            if max(lhs, rhs) > 0:
                worst["mobius"] = max(worst["mobius"], float(_rel(lhs, rhs)))
    out += [
        _check("gradient transfer, factor sqrt 2", "|grad~ f(z)| = sqrt 2 |grad~_B (f o Phi)(Phi^-1 z)|",
               worst["sqrt2"], 1e-8, worst["sqrt2"] <= 1e-8, f"{len(GRADIENT_SYMBOLS)} symbols x {points} points"),
        _check("gradient transfer, stated factor 2", "|grad~ f(z)| = 2 |grad~_B (f o Phi)(Phi^-1 z)|",
               worst["stated"], 1e-8, worst["stated"] <= 1e-8,
               "stated constant is off by sqrt 2 for the displayed gradient formula", conflict=True),
        _check("gradient transfer, finite differences", "|grad~ f(z)| = sqrt 2 |grad~_B (f o Phi)(Phi^-1 z)|",
               worst["fd-ball"], 1e-4, worst["fd-ball"] <= 1e-4),
        _check("finite-difference gradient", "analytic and difference partials agree",
               worst["fd"], 1e-6, worst["fd"] <= 1e-6),
        _check("Moebius invariance", "|grad~ (f o tau_a)(z)| = |grad~ f(tau_a z)|",
               worst["mobius"], 1e-8, worst["mobius"] <= 1e-8),
    ]
    # Lipschitz bound along geodesics
    viol = {2.0: 0, math.sqrt(2.0): 0}
    ratio = {2.0: 0.0, math.sqrt(2.0): 0.0}
    cap_viol = 0
    for sid in ("log-kernel", "cayley-n"):
        f = make_symbol(sid)
        for _ in range(pairs // 2):
            z, w = geo.cayley(random_ball_points(rng, n, 2, math.tanh(3.0)))
            sup = bl.geodesic_gradient_sup(f, z, w)
            for fac in viol:
                q = bl.lipschitz_ratio(f, z, w, fac)
                viol[fac] += q > sup * (1 + 1e-6) + 1e-12
                ratio[fac] = max(ratio[fac], q / sup if sup > 0 else 0.0)
            if sid == "log-kernel":
                cap_viol += bl.lipschitz_ratio(f, z, w) > 2 * math.sqrt(2) * (1 + 1e-6)
    out += [
        _check("Lipschitz bound, factor sqrt 2", "|f(z) - f(w)| <= sup_geodesic |grad~ f| beta(z, w) / sqrt 2",
               ratio[math.sqrt(2.0)], 1 + 1e-6, viol[math.sqrt(2.0)] == 0,
               f"{viol[math.sqrt(2.0)]} of {pairs} pairs violate; value is the largest ratio to the geodesic sup"),
        _check("Lipschitz bound, stated factor 2", "|f(z) - f(w)| <= ||f||_Bloch beta(z, w) / 2",
               ratio[2.0], 1 + 1e-6, viol[2.0] == 0 and cap_viol == 0,
               f"{viol[2.0]} of {pairs} pairs exceed the geodesic sup; {cap_viol} log-kernel pairs exceed 2 sqrt 2",
               conflict=True),
    ]
    scan = bl.bloch_seminorm_scan(logk, "all", n)
    out.append(_check("log-kernel Bloch bound", "|grad~ log(z_n + i)| <= 2 sqrt 2",
                      scan.sup_estimate, 2 * math.sqrt(2) + 1e-9, scan.sup_estimate <= 2 * math.sqrt(2) + 1e-9))
    return out


def equivalence_checks(spec: QuadratureSpec, p: float = 2.0, r: float = 1.0) -> list[Check]:
    """Empirical constants between |grad~ f|^p and p-mean oscillations over D(z, r)."""
    out = []
    lo, hi = math.inf, 0.0
    c63 = 0.0
    for sid in ("log-kernel", "cayley-n"):
        probe = bl.mo_equivalence_probe(make_symbol(sid), p, r, "ray-ladder", spec)
        a, b = probe.ratio_interval("point")
        lo, hi = min(lo, a), max(hi, b)
        g, m = probe.gradient.values, probe.average_mean.values
        mask = m > 0
        c63 = max(c63, float(np.max(g[mask] / m[mask])))
    ok = 0 < lo <= hi < math.inf
    out.append(_check("gradient vs p-mean oscillation", "|grad~ f(z)|^p is comparable to the mean of |f - f(z)|^p over D(z, r)",
                      hi / lo if ok else math.inf, math.inf, ok, f"ratio interval [{lo:.6g}, {hi:.6g}]"))
    out.append(_check("gradient bounded by ball oscillation", "|grad~ f(z)|^p <= C mean of |f - f^_r(z)|^p over D(z, r)",
                      c63, math.inf, math.isfinite(c63), f"empirical C = {c63:.6g}"))
    return out


# -- decay diagnostics --------------------------------------------------------------


def _monotone_tail(profile, start: int, ses, k: float = 3.0) -> bool:
    v = np.array([x for _, x in profile])[start:]
    e = np.asarray(ses)[start:]
    return bool(np.all(v[1:] <= v[:-1] + k * (e[1:] + e[:-1]) + 1e-15))


def decay_checks(spec: QuadratureSpec, r: float = 1.0, end_fraction: float = 1e-2) -> list[Check]:
    n = spec.n
    bump = make_symbol("bump")
    radius = bump.support[1]
    i = geo.base_point(n)
    out = []
    for which, exit_r in (("BMO", radius), ("BA", radius + r)):
        sc = osc.seminorm_scan(bump, which, "ray-ladder", spec, r)
        ok, worst_end = True, 0.0
        for ray in ("dilation-down", "dilation-up", "horizontal"):
            idx = [k for k, g in enumerate(sc.grid) if g.ray == ray]
            prof = [(sc.grid[k].t, sc.values[k]) for k in idx]
            ses = [sc.std_errors[k] for k in idx]
            beta = [float(geo.bergman_metric(sc.grid[k].z, i)) for k in idx]
            start = next((j for j, b in enumerate(beta) if b >= exit_r), len(beta) - 1)
            ok &= _monotone_tail(prof, start, ses)
            end = prof[-1][1] / max(sc.sup_estimate, 1e-300)
            worst_end = max(worst_end, end)
            ok &= end <= end_fraction
        out.append(_check(f"bump {which} decay", f"{which} profile of a compactly supported symbol decays along rays",
                          worst_end, end_fraction, ok, "value is the largest end-of-ray value relative to the sup"))
    which = "BMO" if n > 1 else "BMO_r"
    f = make_symbol("coordinate", k=1)
    sc = osc.seminorm_scan(f, which, "ray-ladder", spec, r)
    up = [v for g, v in zip(sc.grid, sc.values) if g.ray == "dilation-up"]
    growth = up[-1] / up[0]
    out.append(_check(f"z_1 {which} growth", "z_1 has unbounded mean oscillation",
                      growth, 100.0, growth >= 100.0 and bool(np.all(np.diff(up) > 0)),
                      f"{which} along the upward dilation ray grows from {up[0]:.4g} to {up[-1]:.4g}"))
    return out


# -- suite --------------------------------------------------------------------------


def run_suite(n: int = 1, seed: int = 0, nodes: int = 2**14, degree_cap: int | None = None,
              fault: bool = False, progress=None) -> list[Check]:
    """The ``verify`` suite at default (laptop) settings."""
    cap = degree_cap if degree_cap is not None else hk.default_cap(n)
    qmc = QuadratureSpec("qmc", nodes, seed, n)
    polar = QuadratureSpec("polar", max(nodes, 2**16 if n == 1 else 2**18), seed, n)
    steps = [
        ("identities", lambda: identity_checks(n, 10_000, seed)),
        ("volume", lambda: volume_checks(qmc)),
        ("normalization", lambda: normalization_checks(qmc)),
        ("berezin", lambda: berezin_covariance_checks(qmc)),
        ("mean oscillation", lambda: mo_route_checks(qmc)),
        ("forelli-rudin", lambda: forelli_rudin_checks(
            QuadratureSpec("polar", max(nodes, 2**16 if n == 1 else 2**20), seed, n))),
        ("gram", lambda: gram_checks(polar, min(cap, 6), fault)),
        ("zero hankel", lambda: zero_hankel_checks(polar, cap)),
        ("lemma residual", lambda: reproducing_residual_checks(polar, (max(cap // 2, 1), cap))),
        ("bloch", lambda: bloch_checks(n, seed)),
        ("equivalence", lambda: equivalence_checks(QuadratureSpec("qmc", 2**12, seed, n))),
        ("decay", lambda: decay_checks(qmc)),
    ]
    if n == 1:
        steps.insert(9, ("hankel ratio", lambda: hankel_ratio_checks(n, 5, 2**15, seed)))
    out = []
    for label, fn in steps:
        if progress is not None:
            progress(label)
        out.extend(fn())
    return out

