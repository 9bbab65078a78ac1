"""Invariant gradients, Bloch seminorm scans and the oscillation equivalences.

The invariant gradient on the half-space is

    |grad~ f(z)|^2 = 2 rho(z) (4 rho(z) |d_n f|^2 + sum_j |d_j f + 2i conj(z_j) d_n f|^2),

and on the ball |grad~_B h(xi)| = |grad (h o phi_xi)(0)| with the complex
gradient.  With these two normalizations the Cayley transfer reads

    |grad~ f(z)| = sqrt(2) |grad~_B (f o Phi)(Phi^{-1}(z))|,

and the matching Lipschitz bound is |f(z) - f(w)| <= sup |grad~ f| beta(z, w) / sqrt(2).
The stated-constant versions (factor 2) are exposed for comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import geometry as geo
from . import integrate as itg
from . import oscillation as osc
from .integrate import QuadratureSpec
from .symbols import Symbol, eval_symbol_gradient

TRANSFER_FACTOR = math.sqrt(2.0)
STATED_TRANSFER_FACTOR = 2.0
BALL_FD_SCALE = 1e-6
GEODESIC_SAMPLES = 201


def _grad_norm(z: np.ndarray, g: np.ndarray) -> np.ndarray:
    r = geo.rho(z)
    dn = g[..., -1]
    s = 4.0 * r * np.abs(dn) ** 2
    if z.shape[-1] > 1:
        s = s + np.sum(np.abs(g[..., :-1] + 2j * np.conj(z[..., :-1]) * dn[..., None]) ** 2, axis=-1)
    return np.sqrt(2.0 * r * s)


def invariant_gradient(f: Symbol, z, analytic: bool = True) -> np.ndarray:
    """|grad~ f(z)| for a holomorphic symbol (vectorized over points)."""
    z = geo.require_interior(z)
    return _grad_norm(z, eval_symbol_gradient(f, z, analytic))


# -- ball model -----------------------------------------------------------------


def mobius_derivative_at_zero(xi) -> np.ndarray:
    """Complex Jacobian of phi_xi at 0: -(1-|xi|^2) P_xi - sqrt(1-|xi|^2) Q_xi."""
    xi = np.asarray(xi, dtype=complex).reshape(-1)
    u, s2 = geo.ball_direction(xi)
    P = np.outer(u, np.conj(u))
    Q = np.eye(xi.size) - P
    return -(1.0 - s2) * P - math.sqrt(1.0 - s2) * Q


def cayley_derivative(xi) -> np.ndarray:
    """Complex Jacobian matrix D Phi(xi), rows = components of Phi."""
    xi = np.asarray(xi, dtype=complex).reshape(-1)
    n = xi.size
    d = 1.0 + xi[-1]
    J = np.zeros((n, n), dtype=complex)
    for j in range(n - 1):
        J[j, j] = 1.0 / d
        J[j, -1] = -xi[j] / d**2
    J[-1, -1] = -2j / d**2
    return J


def pullback(f: Symbol) -> tuple[Callable, Callable | None]:
    """f o Phi as a function on the ball, with its gradient when f has one."""

    def g(xi):
        return f(geo.cayley(xi))

    if f.grad is None:
        return g, None

    def grad(xi):
        xi = np.asarray(xi, dtype=complex).reshape(-1)
        return cayley_derivative(xi).T @ np.asarray(f.grad(geo.cayley(xi)), dtype=complex)

    return g, grad


def ball_invariant_gradient(g: Callable, xi, grad: Callable | None = None) -> float:
    """|grad (g o phi_xi)(0)|: chain rule when ``grad`` is given, else central
    differences with step 1e-6 (1 - |xi|)."""
    xi = np.asarray(xi, dtype=complex).reshape(-1)
    if not np.linalg.norm(xi) < 1.0:
        raise geo.DomainError("ball point must satisfy |xi| < 1")
    if grad is not None:
        return float(np.linalg.norm(mobius_derivative_at_zero(xi).T @ grad(xi)))
    n = xi.size
    h = BALL_FD_SCALE * (1.0 - np.linalg.norm(xi))
    out = np.empty(n, dtype=complex)
    for k in range(n):
        e = np.zeros(n, dtype=complex)
        e[k] = h
        out[k] = (g(geo.mobius_ball(xi, e)) - g(geo.mobius_ball(xi, -e))) / (2.0 * h)
    return float(np.linalg.norm(out))


def transfer_value(f: Symbol, z, factor: float = TRANSFER_FACTOR, analytic: bool = True) -> float:
    """factor * |grad~_B (f o Phi)(Phi^{-1}(z))|."""
    g, grad = pullback(f)
    xi = geo.cayley_inv(np.asarray(z, dtype=complex).reshape(-1))
    return factor * ball_invariant_gradient(g, xi, grad if analytic else None)


@dataclass(frozen=True)
class GradientReport:
    point: np.ndarray = field(repr=False)
    invariant_gradient: float
    ball_transfer_value: float
    fd_gradient: float
    residuals: dict

    def as_row(self) -> dict:
        return {"rho": float(geo.rho(self.point)), "invariant_gradient": self.invariant_gradient,
                "ball_transfer_value": self.ball_transfer_value, "fd_gradient": self.fd_gradient,
                **{f"residual_{k}": v for k, v in self.residuals.items()}}


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def gradient_report(f: Symbol, z) -> GradientReport:
    z = np.asarray(z, dtype=complex).reshape(-1)
    a = float(invariant_gradient(f, z))
    t = transfer_value(f, z)
    d = float(invariant_gradient(f, z, analytic=False))
    return GradientReport(z, a, t, d, {"transfer": _rel(a, t), "fd": _rel(a, d)})


# -- Moebius invariance ---------------------------------------------------------------


def mobius_derivative(xi, eta) -> np.ndarray:
    """Complex Jacobian of phi_xi at eta."""
    xi = np.asarray(xi, dtype=complex).reshape(-1)
    eta = np.asarray(eta, dtype=complex).reshape(-1)
    u, s2 = geo.ball_direction(xi)
    P = np.outer(u, np.conj(u))
    L = -P - math.sqrt(1.0 - s2) * (np.eye(xi.size) - P)
    d = 1.0 - np.vdot(xi, eta)
    N = xi + L @ eta
    return L / d + np.outer(N, np.conj(xi)) / d**2


def tau_jacobian(a, z) -> np.ndarray:
    """Complex Jacobian of tau_a at z, through Phi o phi_xi o Phi^{-1}."""
    z = np.asarray(z, dtype=complex).reshape(-1)
    xi = geo.cayley_inv(np.asarray(a, dtype=complex).reshape(-1))
    eta = geo.cayley_inv(z)
    inner = mobius_derivative(xi, eta) @ np.linalg.inv(cayley_derivative(eta))
    return cayley_derivative(geo.mobius_ball(xi, eta)) @ inner


def composed_gradient(f: Symbol, a, z) -> float:
    """|grad~ (f o tau_a)(z)| from the chain rule through tau_a."""
    z = np.asarray(z, dtype=complex).reshape(-1)
    grad = tau_jacobian(a, z).T @ eval_symbol_gradient(f, geo.tau(a)(z))
    return float(_grad_norm(z, grad))


# -- Bloch scans, Lipschitz bound ---------------------------------------------------


def bloch_seminorm_scan(f: Symbol, grid="ray-ladder", n: int = 1) -> osc.SeminormScan:
    pts = osc.make_grid(grid, n) if isinstance(grid, str) else list(grid)
    z = np.array([g.z for g in pts])
    vals = invariant_gradient(f, z)
    return osc.SeminormScan("Bloch", pts, np.asarray(vals, dtype=float), np.zeros(len(pts)))


def geodesic(z, w, samples: int = GEODESIC_SAMPLES) -> np.ndarray:
    """Points on the Bergman geodesic from z to w, through the ball model."""
    xi = geo.cayley_inv(np.asarray(z, dtype=complex).reshape(-1))
    eta = geo.cayley_inv(np.asarray(w, dtype=complex).reshape(-1))
    v = geo.mobius_ball(xi, eta)
    s = np.linspace(0.0, 1.0, samples)[:, None]
    return geo.cayley(geo.mobius_ball(xi, s * v))


def geodesic_gradient_sup(f: Symbol, z, w, samples: int = GEODESIC_SAMPLES) -> float:
    return float(np.max(invariant_gradient(f, geodesic(z, w, samples))))


def lipschitz_ratio(f: Symbol, z, w, factor: float = 2.0) -> float:
    """factor * |f(z) - f(w)| / beta(z, w); the stated bound uses factor 2,
    the bound consistent with the gradient normalization uses sqrt(2)."""
    z = np.asarray(z, dtype=complex).reshape(-1)
    w = np.asarray(w, dtype=complex).reshape(-1)
    b = float(geo.bergman_metric(z, w))
    if b == 0.0:
        raise ValueError("z and w must differ")
    return factor * float(abs(f(z) - f(w))) / b


# -- gradient vs oscillation over balls ---------------------------------------------


def p_mean_oscillation(f: Symbol, z, r: float, p: float, spec: QuadratureSpec,
                       center: str = "point") -> float:
    """(1/|D(z,r)|) integral over D(z,r) of |f - c|^p, with c = f(z) or the ball average."""
    z = np.asarray(z, dtype=complex).reshape(-1)
    nodes = itg.metric_ball_nodes(z, r, spec)
    fv = f(nodes.points)
    if center == "point":
        c = complex(f(z))
    elif center == "average":
        c = complex(np.sum(nodes.weights * fv) / np.sum(nodes.weights))
    else:
        raise ValueError(f"unknown center {center!r}")
    return float(np.sum(nodes.weights * np.abs(fv - c) ** p) / np.sum(nodes.weights))


@dataclass
class EquivalenceProbe:
    gradient: osc.SeminormScan
    point_mean: osc.SeminormScan
    average_mean: osc.SeminormScan
    p: float
    r: float

    def ratio_interval(self, which: str = "point") -> tuple[float, float]:
        other = self.point_mean if which == "point" else self.average_mean
        g, m = self.gradient.values, other.values
        mask = (g > 0) & (m > 0)
        if not np.any(mask):
            return (0.0, 0.0)
        q = m[mask] / g[mask]
        return float(q.min()), float(q.max())


def mo_equivalence_probe(f: Symbol, p: float = 2.0, r: float = 1.0, grid="ray-ladder",
                         spec: QuadratureSpec | None = None, n: int = 1) -> EquivalenceProbe:
    """Per grid point: |grad~ f|^p against the p-mean oscillations about f(z)
    and about the ball average."""
    if p < 1:
        raise ValueError("p must be >= 1")
    spec = spec if spec is not None else QuadratureSpec(n=n)
    pts = osc.make_grid(grid, spec.n) if isinstance(grid, str) else list(grid)
    z = np.array([g.z for g in pts])
    grad = np.asarray(invariant_gradient(f, z), dtype=float) ** p
    pm = np.array([p_mean_oscillation(f, g.z, r, p, spec.child(k), "point") for k, g in enumerate(pts)])
    am = np.array([p_mean_oscillation(f, g.z, r, p, spec.child(k), "average") for k, g in enumerate(pts)])
    zero = np.zeros(len(pts))
    return EquivalenceProbe(osc.SeminormScan("grad^p", pts, grad, zero),
                            osc.SeminormScan("pmean-point", pts, pm, zero),
                            osc.SeminormScan("pmean-average", pts, am, zero), p, r)
