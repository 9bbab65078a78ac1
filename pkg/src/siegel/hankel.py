"""Galerkin truncation of Hankel operators on the Bergman space of the half-space.

The orthonormal basis is the ball monomial basis transported by the Cayley
isometry ``g -> (g o Phi^{-1}) j`` with the holomorphic multiplier

    j(z) = 1 / (2 rho(z, i)^(n+1)),   |j(z)|^2 = (J_R Phi^{-1})(z),

so that ``e_alpha(z) = m_alpha(Phi^{-1}(z)) j(z)`` where ``m_alpha`` is the
normalized monomial xi^alpha / ||xi^alpha||.  Inner products are evaluated at
half-space points obtained from ball nodes.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import geometry as geo
from . import integrate as itg
from .integrate import QuadratureSpec
from .symbols import Symbol

DEFAULT_CAP = {1: 10, 2: 6}
GRAM_TOLERANCE = 1e-6
POWER_TOL = 1e-8
POWER_MAX_ITER = 10_000
POWER_BLOCK = 4
CHUNK = 8192


class ConvergenceError(RuntimeError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class BasisCertificationError(RuntimeError):
    pass


def default_cap(n: int) -> int:
    return DEFAULT_CAP.get(n, 4)


# -- basis ---------------------------------------------------------------------


@dataclass(frozen=True)
class BasisIndex:
    alpha: tuple

    @property
    def degree(self) -> int:
        return sum(self.alpha)

    @property
    def n(self) -> int:
        return len(self.alpha)


@lru_cache(maxsize=None)
def _indices(n: int, degree_cap: int) -> tuple:
    out = []
    for d in range(degree_cap + 1):
        block = [a for a in itertools.product(range(d + 1), repeat=n) if sum(a) == d]
        block.sort(reverse=True)  # graded lexicographic: x1^d first
        out.extend(BasisIndex(a) for a in block)
    return tuple(out)


def basis_indices(n: int, degree_cap: int) -> list:
    if degree_cap < 0:
        raise ValueError("degree_cap must be >= 0")
    return list(_indices(int(n), int(degree_cap)))


def monomial_norm2(alpha) -> float:
    """Squared norm of xi^alpha in the unweighted Bergman space of the ball."""
    n, d = len(alpha), sum(alpha)
    return math.exp(n * math.log(math.pi) + sum(math.lgamma(a + 1) for a in alpha)
                    - math.lgamma(n + d + 1))


def multiplier(z, fault: bool = False) -> np.ndarray:
    """j(z) = 1 / (2 rho(z, i)^(n+1)); with ``fault`` its modulus |j| instead."""
    z = np.asarray(z, dtype=complex)
    n = z.shape[-1]
    r = -0.5j * (z[..., -1] + 1j)  # rho(z, i)
    j = 0.5 * geo._int_power(1.0 / r, n + 1)
    return np.abs(j).astype(complex) if fault else j


def ball_monomials(xi: np.ndarray, indices) -> np.ndarray:
    """Normalized monomials m_alpha(xi) for each index, shape (..., K)."""
    xi = np.asarray(xi, dtype=complex)
    n = xi.shape[-1]
    dmax = max(ix.degree for ix in indices)
    pows = [np.ones(xi.shape[:-1] + (dmax + 1,), dtype=complex) for _ in range(n)]
    for k in range(n):
        for p in range(1, dmax + 1):
            pows[k][..., p] = pows[k][..., p - 1] * xi[..., k]
    out = np.empty(xi.shape[:-1] + (len(indices),), dtype=complex)
    for c, ix in enumerate(indices):
        v = np.ones(xi.shape[:-1], dtype=complex)
        for k, a in enumerate(ix.alpha):
            if a:
                v = v * pows[k][..., a]
        out[..., c] = v / math.sqrt(monomial_norm2(ix.alpha))
    return out


def basis_values(z, indices, fault: bool = False) -> np.ndarray:
    """e_alpha(z) for each index, shape (..., K)."""
    z = np.asarray(z, dtype=complex)
    return ball_monomials(geo.cayley_inv(z), indices) * multiplier(z, fault)[..., None]


def basis_function(idx: BasisIndex, fault: bool = False):
    """The transported basis function e_idx as a callable on half-space points."""

    def e(z):
        return basis_values(z, [idx], fault)[..., 0]

    return e


# -- nodes and inner products ------------------------------------------------------


@dataclass(frozen=True)
class BallNodes:
    """Half-space points with volume weights, generated from ball nodes."""

    points: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    reps: np.ndarray | None = field(repr=False)
    scheme: str

    def __len__(self):
        return self.points.shape[0]


@lru_cache(maxsize=16)
def _nodes(spec: QuadratureSpec) -> BallNodes:
    ns = itg.halfspace_nodes(spec)
    return BallNodes(ns.points, ns.weights, ns.reps, ns.scheme)


def nodes_for(spec: QuadratureSpec) -> BallNodes:
    return _nodes(spec)


def _chunks(N: int):
    for s in range(0, N, CHUNK):
        yield slice(s, min(N, s + CHUNK))


def inner_products(left, right, spec: QuadratureSpec) -> np.ndarray:
    """Matrix M[i, j] = <right_j, left_i> = integral of right_j conj(left_i).

    ``left`` and ``right`` map an (N, n) array of points to (N, K) arrays.
    """
    nodes = nodes_for(spec)
    M = None
    for sl in _chunks(len(nodes)):
        z = nodes.points[sl]
        L = left(z)
        R = right(z) * nodes.weights[sl][:, None]
        part = L.conj().T @ R
        M = part if M is None else M + part
    return M


# -- Gram certification ---------------------------------------------------------


@dataclass(frozen=True)
class GramReport:
    degree_cap: int
    gram_deviation: float
    reproducing_deviation: float
    tolerance: float

    @property
    def deviation(self) -> float:
        return max(self.gram_deviation, self.reproducing_deviation)

    @property
    def ok(self) -> bool:
        return self.deviation <= self.tolerance


def gram_matrix(degree_cap: int, spec: QuadratureSpec, fault: bool = False) -> np.ndarray:
    """G[i, j] = <e_j, e_i> over the basis up to ``degree_cap``."""
    idx = basis_indices(spec.n, degree_cap)
    return inner_products(lambda z: basis_values(z, idx, fault),
                          lambda z: basis_values(z, idx, fault), spec)


def gram_deviation(G: np.ndarray) -> float:
    return float(np.max(np.abs(G - np.eye(G.shape[0]))))


def reproducing_probes(n: int) -> np.ndarray:
    """Fixed probe points for the reproducing-kernel check."""
    pts = [geo.base_point(n)]
    for x, y in ((0.3, 1.2), (-0.5, 0.8)):
        p = np.zeros(n, dtype=complex)
        if n > 1:
            p[0] = 0.2 - 0.1j
        p[-1] = x + 1j * (y + np.sum(np.abs(p[:-1]) ** 2))
        pts.append(p)
    return np.array(pts)


def reproducing_deviation(degree_cap: int, spec: QuadratureSpec, fault: bool = False) -> float:
    """max |<e_alpha, k_z> - e_alpha(z) / sqrt(K(z, z))| over probe points.

    Orthonormality alone cannot see a multiplier of the wrong phase (|j| has
    the same modulus as j); the reproducing identity holds only when every
    e_alpha is holomorphic.
    """
    idx = basis_indices(spec.n, degree_cap)
    probes = reproducing_probes(spec.n)

    def kernels(z):
        return np.stack([geo.normalized_kernel(p, z) for p in probes], axis=-1)

    M = inner_products(kernels, lambda z: basis_values(z, idx, fault), spec)
    kzz = geo.kernel_constant(spec.n) * geo.rho(probes) ** (-(spec.n + 1))
    expect = basis_values(probes, idx, fault) / np.sqrt(kzz)[:, None]
    return float(np.max(np.abs(M - expect)))


def certify_basis(degree_cap: int, spec: QuadratureSpec, fault: bool = False,
                  tolerance: float = GRAM_TOLERANCE) -> GramReport:
    G = gram_matrix(degree_cap, spec, fault)
    return GramReport(degree_cap, gram_deviation(G),
                      reproducing_deviation(degree_cap, spec, fault), tolerance)


def require_certified(degree_cap: int, spec: QuadratureSpec, fault: bool = False,
                      tolerance: float | None = None) -> GramReport:
    if tolerance is None:
        tolerance = GRAM_TOLERANCE if spec.scheme == "polar" else 1e-2
    rep = certify_basis(degree_cap, spec, fault, tolerance)
    if not rep.ok:
        raise BasisCertificationError(
            f"basis certification failed: Gram deviation {rep.gram_deviation:.3e}, "
            f"reproducing deviation {rep.reproducing_deviation:.3e} > {tolerance:.1e}"
        )
    return rep


# -- projections and Hankel forms --------------------------------------------------


@dataclass(frozen=True)
class Projection:
    coeffs: np.ndarray
    norm2: float
    degree_cap: int

    @property
    def captured(self) -> float:
        return float(np.sum(np.abs(self.coeffs) ** 2))


def project_onto_span(g, degree_cap: int, spec: QuadratureSpec) -> Projection:
    """Coefficients <g, e_i> of ``g`` against the basis, and ||g||^2."""
    idx = basis_indices(spec.n, degree_cap)
    nodes = nodes_for(spec)
    coeffs = np.zeros(len(idx), dtype=complex)
    norm2 = 0.0
    for sl in _chunks(len(nodes)):
        z = nodes.points[sl]
        gv = np.asarray(g(z)) * nodes.weights[sl]
        coeffs += basis_values(z, idx).conj().T @ gv
        norm2 += float(np.sum(np.abs(np.asarray(g(z))) ** 2 * nodes.weights[sl]))
    return Projection(coeffs, norm2, degree_cap)


def hankel_quadratic_form(f: Symbol, degree_cap: int, spec: QuadratureSpec,
                          proj_cap: int | None = None, fault: bool = False):
    """A[i, j] = <f e_j, f e_i> and B[i, j] = <f e_j, e_i>.

    Test functions span degrees <= ``degree_cap``; the projection uses degrees
    <= ``proj_cap`` (default: the same span), so B has one row per projection
    basis function.  The truncated Hankel Gram is A - B^* B.
    """
    if proj_cap is None:
        proj_cap = degree_cap
    if proj_cap < degree_cap:
        raise ValueError("proj_cap must be >= degree_cap")
    test = basis_indices(spec.n, degree_cap)
    proj = basis_indices(spec.n, proj_cap)
    K = len(test)
    nodes = nodes_for(spec)
    A = np.zeros((K, K), dtype=complex)
    B = np.zeros((len(proj), K), dtype=complex)
    for sl in _chunks(len(nodes)):
        z = nodes.points[sl]
        E = basis_values(z, proj, fault)
        FE = f(z)[:, None] * E[:, :K]
        W = nodes.weights[sl][:, None]
        A += FE.conj().T @ (FE * W)
        B += E.conj().T @ (FE * W)
    return 0.5 * (A + A.conj().T), B


def hankel_gram(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    H = A - B.conj().T @ B
    return 0.5 * (H + H.conj().T)


# -- power iteration ------------------------------------------------------------


def _power(H: np.ndarray, tol: float, max_iter: int, seed: int, scale: float):
    """Block power iteration with a Rayleigh-Ritz step; the block absorbs
    clustered leading eigenvalues that stall single-vector iteration."""
    rng = np.random.default_rng(seed)
    K = H.shape[0]
    b = min(K, POWER_BLOCK)
    V = rng.normal(size=(K, b)) + 1j * rng.normal(size=(K, b))
    V, _ = np.linalg.qr(V)
    mu, res = 0.0, np.inf
    for it in range(1, max_iter + 1):
        W = H @ V
        T = V.conj().T @ W
        theta, Y = np.linalg.eigh(0.5 * (T + T.conj().T))
        k = int(np.argmax(theta))
        mu = float(theta[k])
        v = V @ Y[:, k]
        res = float(np.linalg.norm(W @ Y[:, k] - mu * v)) / scale
        if res <= tol:
            return mu, v, res, it
        if not np.any(W):
            return 0.0, v, 0.0, it
        V, _ = np.linalg.qr(W @ Y)
    raise ConvergenceError(f"power iteration did not converge (residual {res:.3e})", res)


def top_eigenpair(H: np.ndarray, tol: float = POWER_TOL, max_iter: int = POWER_MAX_ITER,
                  seed: int = 0, scale: float | None = None):
    """Largest eigenvalue of a Hermitian matrix by shifted power iteration.

    Plain iteration finds the eigenvalue of largest modulus; when that one is
    negative the matrix is shifted by it and iterated again.
    """
    if scale is None:
        scale = max(float(np.max(np.abs(H))), 1e-300)
    mu, v, res, it = _power(H, tol, max_iter, seed, scale)
    if mu < 0:
        shifted = H - mu * np.eye(H.shape[0])
        nu, v, res, it2 = _power(shifted, tol, max_iter, seed + 1, scale)
        mu, it = nu + mu, it + it2
    return mu, v, res, it


@dataclass(frozen=True)
class HankelEstimate:
    symbol: str
    norm_estimate: float
    basis_degree_cap: int
    proj_cap: int
    spec: QuadratureSpec
    eigen_residual: float
    iterations: int
    top_eigenvalue: float
    scale: float

    @property
    def relative(self) -> float:
        """Norm estimate relative to ||f e_0||."""
        return self.norm_estimate / math.sqrt(self.scale) if self.scale > 0 else 0.0

    def as_row(self) -> dict:
        return {"symbol": self.symbol, "norm_estimate": self.norm_estimate,
                "relative": self.relative, "degree_cap": self.basis_degree_cap,
                "proj_cap": self.proj_cap, "scheme": self.spec.scheme,
                "node_count": self.spec.node_count, "seed": self.spec.seed,
                "eigen_residual": self.eigen_residual, "iterations": self.iterations}


def truncated_hankel_norm(f: Symbol, degree_cap: int | None = None,
                          spec: QuadratureSpec | None = None, proj_cap: int | None = None,
                          tol: float = POWER_TOL, max_iter: int = POWER_MAX_ITER,
                          seed: int = 0, certify: bool = True, fault: bool = False,
                          extrapolate: bool = False) -> HankelEstimate:
    """sqrt of the top eigenvalue of A - B^* B on the span of degree <= degree_cap.

    B projects onto degree <= proj_cap.  With ``extrapolate`` the form is
    computed at proj_cap M and 2M and combined as (4 H(2M) - H(M)) / 3, which
    removes the leading 1/M leak of holomorphic mass past the projection span.
    """
    spec = spec if spec is not None else QuadratureSpec("polar", 2**16, 0, 1)
    if degree_cap is None:
        degree_cap = default_cap(spec.n)
    M = proj_cap if proj_cap is not None else degree_cap
    if certify:
        require_certified(degree_cap, spec, fault)
    A, B = hankel_quadratic_form(f, degree_cap, spec, M, fault)
    H = hankel_gram(A, B)
    if extrapolate:
        B2 = hankel_quadratic_form(f, degree_cap, spec, 2 * M, fault)[1]
        H = (4.0 * hankel_gram(A, B2) - H) / 3.0
        H = 0.5 * (H + H.conj().T)
        M = 2 * M
    scale = float(np.real(A[0, 0]))
    mu, _, res, it = top_eigenpair(H, tol, max_iter, seed, max(abs(scale), 1e-300))
    return HankelEstimate(f.id, math.sqrt(max(mu, 0.0)), degree_cap, M,
                          spec, res, it, mu, scale)


# -- probes at normalized kernels ----------------------------------------------------


def hankel_on_kz(f: Symbol, z, degree_cap: int | None = None,
                 spec: QuadratureSpec | None = None) -> float:
    """||H_f k_z|| = (||f k_z||^2 - ||P(f k_z)||^2)^(1/2), P truncated to the span."""
    z = np.asarray(z, dtype=complex).reshape(-1)
    spec = spec if spec is not None else QuadratureSpec("polar", 2**16, 0, z.size)
    if degree_cap is None:
        degree_cap = default_cap(spec.n)

    def g(w):
        return f(w) * geo.normalized_kernel(z, w)

    proj = project_onto_span(g, degree_cap, spec)
    rad = proj.norm2 - proj.captured
    if rad < -1e-9 * max(proj.norm2, 1e-300):
        raise itg.QuadratureError(f"negative Hankel radicand {rad:.3e} at {z}")
    return math.sqrt(max(rad, 0.0))


def berezin_reproducing_residual(f: Symbol, z, degree_cap: int | None = None,
                                 spec: QuadratureSpec | None = None) -> float:
    """|| P(conj(f_z) k_z) - f~(z) k_z || on the span, with f_z = P(conj(f) k_z) / k_z."""
    z = np.asarray(z, dtype=complex).reshape(-1)
    spec = spec if spec is not None else QuadratureSpec("polar", 2**16, 0, z.size)
    if degree_cap is None:
        degree_cap = default_cap(spec.n)
    idx = basis_indices(spec.n, degree_cap)

    def kz(w):
        return geo.normalized_kernel(z, w)

    c = project_onto_span(lambda w: np.conj(f(w)) * kz(w), degree_cap, spec).coeffs

    def conj_fz_kz(w):
        g = basis_values(w, idx) @ c  # P(conj(f) k_z) on the span
        k = kz(w)
        return np.conj(g / k) * k

    d = project_onto_span(conj_fz_kz, degree_cap, spec).coeffs
    a = project_onto_span(kz, degree_cap, spec).coeffs
    nodes = nodes_for(spec)
    ftilde = complex(np.sum(f(nodes.points) * np.abs(kz(nodes.points)) ** 2 * nodes.weights))
    return float(np.linalg.norm(d - ftilde * a))
