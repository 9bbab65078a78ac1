"""Deterministic quadrature over the half-space and over Bergman metric balls.

Half-space integrals are pulled back to the unit ball through the Cayley
transform (optionally composed with ``sigma_c^{-1}`` to center the nodes at a
point ``c``).  Metric balls ``D(z, r)`` are parametrized exactly in
Heisenberg coordinates ``(w', Re w_n, rho(w))`` around ``i`` and then moved to
``z`` by ``sigma_z^{-1}``; every node lies strictly inside the ball.

Three schemes share one node interface:

``random``  stratified pseudo-random nodes, sample standard error
``qmc``     8 independently scrambled Sobol replicates, replicate standard error
``polar``   deterministic product rules, standard error reported as 0; on the
            half-space the rule is polar about the preimage of infinity
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.stats import qmc

from . import geometry as geo

SCHEMES = ("qmc", "random", "polar")
MIN_NODES = 100
QMC_REPLICATES = 8


class QuadratureError(RuntimeError):
    """An integrand produced a non-finite value; ``node`` holds its coordinates."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


@dataclass(frozen=True)
class QuadratureSpec:
    scheme: str = "qmc"
    node_count: int = 2**14
    seed: int = 0
    n: int = 1

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")
        if int(self.node_count) < MIN_NODES:
            raise ValueError(f"node_count must be >= {MIN_NODES}, got {self.node_count}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if int(self.n) < 1:
            raise ValueError("dimension n must be >= 1")

    def with_seed(self, seed: int) -> "QuadratureSpec":
        return QuadratureSpec(self.scheme, self.node_count, int(seed), self.n)

    def child(self, *key: int) -> "QuadratureSpec":
        """Spec with a seed derived from this seed and an integer key."""
        return self.with_seed(derive_seed(self.seed, *key))

    def scaled(self, factor: float) -> "QuadratureSpec":
        return QuadratureSpec(
            self.scheme, max(MIN_NODES, int(self.node_count * factor)), self.seed, self.n
        )


def derive_seed(seed: int, *key: int) -> int:
    ss = np.random.SeedSequence([int(seed) & (2**64 - 1), *[int(k) for k in key]])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class IntegralResult:
    value: complex
    std_error: float
    nodes_used: int

    @property
    def real(self) -> float:
        return float(np.real(self.value))

    def agrees_with(self, target: complex, k: float = 3.0, floor: float = 0.0) -> bool:
        return abs(self.value - target) <= k * self.std_error + floor


# -- unit cube nodes ----------------------------------------------------------


def _cube(spec: QuadratureSpec, dim: int):
    """Points in [0, 1)^dim, their weights (summing to 1) and replicate labels."""
    N = int(spec.node_count)
    if spec.scheme == "random":
        rng = np.random.default_rng(spec.seed)
        u = rng.random((N, dim))
        u[:, 0] = (rng.permutation(N) + u[:, 0]) / N
        return u, np.full(N, 1.0 / N), None
    if spec.scheme == "qmc":
        m = int(math.floor(math.log2(N / QMC_REPLICATES)))
        per = 2**m
        seeds = np.random.SeedSequence(spec.seed).spawn(QMC_REPLICATES)
        u = np.concatenate(
            [qmc.Sobol(dim, scramble=True, seed=np.random.default_rng(s)).random_base2(m)
             for s in seeds]
        )
        reps = np.repeat(np.arange(QMC_REPLICATES), per)
        return u, np.full(u.shape[0], 1.0 / u.shape[0]), reps
    q = max(2, int(math.floor(N ** (1.0 / dim))))
    x, w = leggauss(q)
    x, w = 0.5 * (x + 1.0), 0.5 * w
    grids = np.meshgrid(*([x] * dim), indexing="ij")
    wgrids = np.meshgrid(*([w] * dim), indexing="ij")
    u = np.stack([g.reshape(-1) for g in grids], axis=1)
    wt = np.prod(np.stack([g.reshape(-1) for g in wgrids], axis=1), axis=1)
    return u, wt, None


def cube_to_ball(u: np.ndarray, m: int) -> np.ndarray:
    """Measure-preserving map from [0,1)^(2m) onto the unit ball of C^m.

    |xi|^2 = v_0^(1/m); the squared moduli are split by stick-breaking with
    Beta(1, m - k) laws (a uniform point of the simplex); the remaining m
    coordinates are phases.
    """
    N = u.shape[0]
    if m == 0:
        return np.zeros((N, 0), dtype=complex)
    remaining = u[:, 0] ** (1.0 / m)
    mod2 = np.empty((N, m))
    for k in range(1, m):
        frac = 1.0 - (1.0 - u[:, k]) ** (1.0 / (m - k))
        mod2[:, k - 1] = remaining * frac
        remaining = remaining - mod2[:, k - 1]
    mod2[:, m - 1] = remaining
    phase = np.exp(2j * np.pi * u[:, m: 2 * m])
    return np.sqrt(np.maximum(mod2, 0.0)) * phase


def ball_product_rule(n: int, q: int):
    """Product rule on the unit ball of C^n, exact for polynomials in xi, conj(xi).

    Squared moduli live on the simplex (collapsed Gauss-Legendre), phases on a
    trapezoid grid of 2q points.  Exact for total degree below roughly 2q.
    """
    x, w = leggauss(q)
    a, wa = 0.5 * (x + 1.0), 0.5 * w
    T = 2 * q
    theta = 2 * np.pi * np.arange(T) / T
    A = np.meshgrid(*([a] * n), indexing="ij")
    WA = np.meshgrid(*([wa] * n), indexing="ij")
    A = np.stack([g.reshape(-1) for g in A], axis=1)
    WA = np.prod(np.stack([g.reshape(-1) for g in WA], axis=1), axis=1)
    mod2 = np.empty_like(A)
    rem = np.ones(A.shape[0])
    jac = np.ones(A.shape[0])
    for k in range(n - 1):
        mod2[:, k] = rem * A[:, k]
        jac *= rem
        rem = rem * (1.0 - A[:, k])
    mod2[:, n - 1] = rem * A[:, n - 1]
    jac *= rem
    TH = np.meshgrid(*([theta] * n), indexing="ij")
    TH = np.stack([g.reshape(-1) for g in TH], axis=1)
    radial = np.sqrt(mod2)
    xi = (radial[:, None, :] * np.exp(1j * TH[None, :, :])).reshape(-1, n)
    wt = np.outer(WA * jac, np.full(TH.shape[0], (2 * np.pi / T) ** n)).reshape(-1)
    return xi, wt * 0.5**n


def pole_product_rule(n: int, node_count: int):
    """Product rule on the unit ball in polar coordinates about xi_n = -1.

    The Cayley preimage of infinity is the boundary point -e_n, where pulled
    back half-space integrands blow up like a power of |1 + xi_n|.  Writing
    xi_n = -1 + s e^{i theta} (theta in (-pi/2, pi/2), 0 < s < 2 cos theta)
    puts a factor s in the weight that absorbs that singularity; xi' fills the
    ball of radius sqrt(1 - |xi_n|^2) with the ordinary ball rule.
    Returns nodes, weights and the offsets 1 + xi_n computed without cancellation.
    """
    inner = 1
    if n > 1:
        m = n - 1
        # balance orders so that the outer polar grid uses about twice the inner order
        q_in = max(2, int(math.floor((node_count / 2 ** (m + 2)) ** (1.0 / (2 * m + 2)))))
        eta, w_eta = ball_product_rule(n - 1, q_in)
        inner = eta.shape[0]
    q = max(4, int(math.floor(math.sqrt(node_count / inner))))
    x, w = leggauss(q)
    theta = 0.5 * math.pi * x
    wt = 0.5 * math.pi * w
    S = (x[None, :] + 1.0) * np.cos(theta)[:, None]  # s in (0, 2 cos theta)
    ws = w[None, :] * np.cos(theta)[:, None]
    d = (S * np.exp(1j * theta)[:, None]).reshape(-1)  # 1 + xi_n, kept exact
    zn = -1.0 + d
    wn = (wt[:, None] * ws * S).reshape(-1)
    if n == 1:
        return zn[:, None], wn, d
    R = np.sqrt(np.maximum(1.0 - np.abs(zn) ** 2, 0.0))
    xi = np.empty((zn.size, eta.shape[0], n), dtype=complex)
    xi[:, :, :-1] = R[:, None, None] * eta[None, :, :]
    xi[:, :, -1] = zn[:, None]
    wts = wn[:, None] * (R ** (2 * (n - 1)))[:, None] * w_eta[None, :]
    return xi.reshape(-1, n), wts.reshape(-1), np.repeat(d, eta.shape[0])


def ball_rule_order(n: int, node_count: int) -> int:
    return max(2, int(math.floor((node_count / 2**n) ** (1.0 / (2 * n)))))


# -- node sets -------------------------------------------------------------


@dataclass(frozen=True)
class NodeSet:
    """Quadrature nodes in the half-space with absolute weights.

    ``integrate(values)`` returns an estimate with the scheme's error estimate.
    """

    points: np.ndarray
    weights: np.ndarray
    reps: np.ndarray | None
    scheme: str

    def __len__(self):
        return self.points.shape[0]

    def integrate(self, values) -> IntegralResult:
        v = np.asarray(values)
        if v.shape != self.weights.shape:
            v = np.broadcast_to(v, self.weights.shape)
        bad = ~np.isfinite(v)
        if np.any(bad):
            i = int(np.flatnonzero(bad)[0])
            raise QuadratureError(
                f"non-finite integrand value {v[i]} at node {self.points[i]}",
                node=self.points[i],
            )
        N = v.size
        y = self.weights * v
        value = complex(np.sum(y))
        if self.scheme == "polar":
            se = 0.0
        elif self.scheme == "random":
            se = float(np.std(y * N, ddof=1) / math.sqrt(N))
        else:
            per = np.array([np.sum(y[self.reps == k]) for k in range(QMC_REPLICATES)])
            per = per * QMC_REPLICATES
            se = float(np.std(per, ddof=1) / math.sqrt(QMC_REPLICATES))
        return IntegralResult(value, se, N)

    def mean_weight(self) -> float:
        return float(np.sum(self.weights))


def _unit_ball_nodes(spec: QuadratureSpec):
    n = spec.n
    if spec.scheme == "polar":
        xi, w = ball_product_rule(n, ball_rule_order(n, spec.node_count))
        return xi, w, None
    u, w, reps = _cube(spec, 2 * n)
    return cube_to_ball(u, n), w * geo.unit_ball_volume(n), reps


def halfspace_nodes(spec: QuadratureSpec, center=None) -> NodeSet:
    """Nodes for integrals over the whole half-space.

    With ``center`` the substitution is ``w = sigma_c^{-1}(Phi(xi))`` and the
    nodes cluster around ``c``; the Jacobian chain is exact either way.
    """
    if spec.scheme == "polar":
        xi, w, d = pole_product_rule(spec.n, spec.node_count)
        reps = None
        # Cayley transform written with the exact offset d = 1 + xi_n
        pts = np.empty_like(xi)
        pts[:, :-1] = xi[:, :-1] / d[:, None]
        pts[:, -1] = 1j * (2.0 - d) / d
        w = w * 4.0 / np.abs(d) ** (2 * (spec.n + 1))
    else:
        xi, w, reps = _unit_ball_nodes(spec)
        pts = geo.cayley(xi)
        w = w * geo.cayley_jacobian(xi)
    if center is not None:
        c = geo.require_interior(center, "center")
        if c.shape[-1] != spec.n:
            raise geo.DimensionError("center dimension differs from spec.n")
        pts = geo.sigma_inv(c)(pts)
        w = w * float(geo.rho(c)) ** (spec.n + 1)
    return NodeSet(pts, w, reps, spec.scheme)


def unit_ball_nodes(spec: QuadratureSpec) -> NodeSet:
    """Nodes on the unit ball itself (points are ball points, not half-space points)."""
    xi, w, reps = _unit_ball_nodes(spec)
    return NodeSet(xi, w, reps, spec.scheme)


def _heisenberg_ball(u: np.ndarray, n: int, r: float):
    """Map cube points to D(i, r) in Heisenberg coordinates; returns points, weights.

    With h = rho(w), x = Re w_n and s = |w'|^2, the ball is
    x^2 < 4 cosh(r)^2 h - (1 + s + h)^2, which forces e^{-2r} < h < e^{2r}.
    """
    a = 4.0 * math.cosh(r) ** 2
    logh = -2.0 * r + 4.0 * r * u[:, 0]
    h = np.exp(logh)
    S = np.maximum(2.0 * math.cosh(r) * np.sqrt(h) - 1.0 - h, 0.0)
    wp = cube_to_ball(u[:, 1: 2 * n - 1], n - 1) * np.sqrt(S)[:, None]
    s = np.sum(np.abs(wp) ** 2, axis=1)
    X = np.sqrt(np.maximum(a * h - (1.0 + s + h) ** 2, 0.0))
    x = X * (2.0 * u[:, -1] - 1.0)
    pts = np.empty((u.shape[0], n), dtype=complex)
    pts[:, :-1] = wp
    pts[:, -1] = x + 1j * (h + s)
    vol_wp = math.pi ** (n - 1) / math.factorial(n - 1) * S ** (n - 1)
    weight = 4.0 * r * h * vol_wp * 2.0 * X
    return pts, weight


def metric_ball_nodes(z, r: float, spec: QuadratureSpec) -> NodeSet:
    if not r > 0:
        raise ValueError("radius must be positive")
    z = geo.require_interior(z)
    n = spec.n
    if z.shape[-1] != n:
        raise geo.DimensionError("center dimension differs from spec.n")
    u, w, reps = _cube(spec, 2 * n)
    # keep nodes off the degenerate faces of the parametrization
    u = np.clip(u, 1e-15, 1.0 - 1e-15)
    pts, jac = _heisenberg_ball(u, n, r)
    pts = geo.sigma_inv(z)(pts)
    return NodeSet(pts, w * jac * float(geo.rho(z)) ** (n + 1), reps, spec.scheme)


# -- public operations -----------------------------------------------------


def _evaluate(f, nodes: NodeSet) -> np.ndarray:
    return np.asarray(f(nodes.points))


def integrate_halfspace(f, spec: QuadratureSpec, center=None) -> IntegralResult:
    """Approximate the integral of ``f`` over the half-space with respect to volume."""
    nodes = halfspace_nodes(spec, center)
    return nodes.integrate(_evaluate(f, nodes))


def integrate_metric_ball(z, r: float, f, spec: QuadratureSpec) -> IntegralResult:
    """Approximate the integral of ``f`` over the Bergman ball D(z, r)."""
    nodes = metric_ball_nodes(z, r, spec)
    return nodes.integrate(_evaluate(f, nodes))


def _acceptance_bound(n: int, r: float) -> float:
    u = np.linspace(0.0, 1.0, 20001)[:, None]
    probe = np.concatenate([u, np.zeros((u.size, 2 * n - 2)), np.full_like(u, 0.5)], axis=1)
    a = 4.0 * math.cosh(r) ** 2
    h = np.exp(-2.0 * r + 4.0 * r * probe[:, 0])
    S = np.maximum(2.0 * math.cosh(r) * np.sqrt(h) - 1.0 - h, 0.0)
    X0 = np.sqrt(np.maximum(a * h - (1.0 + h) ** 2, 0.0))
    g = h * S ** (n - 1) * X0
    return 1.05 * float(g.max())


def sample_metric_ball(z, r: float, count: int, seed: int) -> np.ndarray:
    """Points distributed uniformly (Euclidean volume) in D(z, r).

    Heisenberg-coordinate proposals are thinned by rejection against the
    volume density; every returned point is checked to satisfy beta(z, w) < r.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if not r > 0:
        raise ValueError("radius must be positive")
    z = geo.require_interior(z)
    n = z.shape[-1]
    rng = np.random.default_rng(seed)
    bound = _acceptance_bound(n, r)
    a = 4.0 * math.cosh(r) ** 2
    out = []
    have = 0
    while have < count:
        batch = max(64, 4 * (count - have))
        u = np.clip(rng.random((batch, 2 * n)), 1e-15, 1.0 - 1e-15)
        pts, _ = _heisenberg_ball(u, n, r)
        h = geo.rho(pts)
        s = np.sum(np.abs(pts[:, :-1]) ** 2, axis=1)
        S = np.maximum(2.0 * math.cosh(r) * np.sqrt(h) - 1.0 - h, 0.0)
        X = np.sqrt(np.maximum(a * h - (1.0 + s + h) ** 2, 0.0))
        g = h * S ** (n - 1) * X
        if np.any(g > bound):
            raise RuntimeError("rejection bound violated")
        keep = rng.random(batch) * bound < g
        pts = pts[keep]
        out.append(pts)
        have += pts.shape[0]
    w = geo.sigma_inv(z)(np.concatenate(out)[:count])
    d = geo.bergman_metric(z, w)
    if not np.all(d < r):
        raise RuntimeError("sampled point left the metric ball")
    return w
