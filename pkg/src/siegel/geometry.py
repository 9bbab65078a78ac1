"""Closed-form geometry of the Siegel upper half-space and the unit ball.

Points are complex coordinate arrays whose last axis has length ``n``; the
last coordinate is ``z_n`` and the leading ``n - 1`` coordinates are ``z'``.
Every function broadcasts over leading axes, so a stack of quadrature nodes
of shape ``(N, n)`` is handled in one call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

RHO_FLOOR = 1e-300
ATANH_CAP = 1.0 - 1e-16
METRIC_SLACK = 1e-12


class DomainError(ValueError):
    """A point lies outside the domain an operation requires."""


class DimensionError(ValueError):
    pass


def _arr(z) -> np.ndarray:
    return np.asarray(z, dtype=complex)


def _same_dim(z: np.ndarray, w: np.ndarray) -> int:
    if z.shape[-1] != w.shape[-1]:
        raise DimensionError(f"dimension mismatch: {z.shape[-1]} vs {w.shape[-1]}")
    return z.shape[-1]


@dataclass(frozen=True)
class HPoint:
    """A point ``(z', z_n)`` of C^n, checked to lie in the half-space by default."""

    coords: np.ndarray = field(repr=False)
    interior: bool = True

    def __post_init__(self):
        c = np.array(self.coords, dtype=complex).reshape(-1)
        if c.size < 1:
            raise DimensionError("need n >= 1 coordinates")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)
        if self.interior and not rho(c) > RHO_FLOOR:
            raise DomainError(f"point {c} is not interior (rho = {rho(c)})")

    @classmethod
    def of(cls, zp, zn, interior: bool = True) -> "HPoint":
        return cls(np.append(np.asarray(zp, dtype=complex).reshape(-1), zn), interior)

    @property
    def n(self) -> int:
        return self.coords.size

    @property
    def zp(self) -> np.ndarray:
        return self.coords[:-1]

    @property
    def zn(self) -> complex:
        return complex(self.coords[-1])

    def __array__(self, dtype=None, copy=None):
        return self.coords if dtype is None else self.coords.astype(dtype)

    def __repr__(self):
        return f"HPoint({list(self.coords)})"


@dataclass(frozen=True)
class BPoint:
    """A point of the unit ball of C^n."""

    coords: np.ndarray = field(repr=False)
    interior: bool = True

    def __post_init__(self):
        c = np.array(self.coords, dtype=complex).reshape(-1)
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)
        if self.interior and not np.linalg.norm(c) < 1.0:
            raise DomainError(f"point {c} is not inside the unit ball")

    @property
    def n(self) -> int:
        return self.coords.size

    def __array__(self, dtype=None, copy=None):
        return self.coords if dtype is None else self.coords.astype(dtype)

    def __repr__(self):
        return f"BPoint({list(self.coords)})"


def base_point(n: int) -> np.ndarray:
    """The point i = (0', i)."""
    e = np.zeros(n, dtype=complex)
    e[-1] = 1j
    return e


def rho_pair(z, w) -> np.ndarray:
    """The sesquilinear form (i/2)(conj(w_n) - z_n) - z'.conj(w')."""
    z, w = _arr(z), _arr(w)
    _same_dim(z, w)
    out = 0.5j * (np.conj(w[..., -1]) - z[..., -1])
    if z.shape[-1] > 1:
        out = out - np.sum(z[..., :-1] * np.conj(w[..., :-1]), axis=-1)
    return out


def rho(z) -> np.ndarray:
    """Im z_n - |z'|^2; positive exactly on the interior."""
    z = _arr(z)
    return z[..., -1].imag - np.sum(np.abs(z[..., :-1]) ** 2, axis=-1)


def require_interior(z, what: str = "point") -> np.ndarray:
    z = _arr(z)
    r = rho(z)
    if not np.all(r > RHO_FLOOR):
        bad = np.flatnonzero(~(np.asarray(r) > RHO_FLOOR).reshape(-1))[0]
        raise DomainError(
            f"{what} not interior: {z.reshape(-1, z.shape[-1])[bad]} has rho <= 0"
        )
    return z


def kernel_constant(n: int) -> float:
    return math.factorial(n) / (4.0 * math.pi**n)


def _int_power(x: np.ndarray, k: int) -> np.ndarray:
    out = np.ones_like(x)
    for _ in range(k):
        out = out * x
    return out


def bergman_kernel(z, w) -> np.ndarray:
    """K(z, w) = n!/(4 pi^n) rho(z, w)^-(n+1)."""
    z = require_interior(z)
    w = require_interior(w)
    n = _same_dim(z, w)
    return kernel_constant(n) * _int_power(1.0 / rho_pair(z, w), n + 1)


def normalized_kernel(z, w) -> np.ndarray:
    """k_z(w) = K(w, z) / sqrt(K(z, z))."""
    z = require_interior(z)
    n = z.shape[-1]
    kzz = kernel_constant(n) * rho(z) ** (-(n + 1))
    return bergman_kernel(w, z) / np.sqrt(kzz)


def _clamped_atanh_sqrt(s: np.ndarray) -> np.ndarray:
    if np.any(s < -METRIC_SLACK) or np.any(s > 1.0 + METRIC_SLACK):
        raise DomainError("metric argument outside [0, 1]; inputs are inconsistent")
    return np.arctanh(np.minimum(np.sqrt(np.clip(s, 0.0, 1.0)), ATANH_CAP))


def bergman_metric(z, w) -> np.ndarray:
    """Bergman distance atanh sqrt(1 - rho(z) rho(w) / |rho(z, w)|^2).

    The numerator |rho(z, w)|^2 - rho(z) rho(w) is evaluated in the
    cancellation-free form |dz_n - 2i dz'.conj(w')|^2 / 4 + rho(w) |dz'|^2
    (dz = z - w), obtained by translating w to (0', i rho(w)).
    """
    z = require_interior(z)
    w = require_interior(w)
    _same_dim(z, w)
    d = z - w
    t = d[..., -1]
    if z.shape[-1] > 1:
        t = t - 2j * np.sum(d[..., :-1] * np.conj(w[..., :-1]), axis=-1)
        gap = 0.25 * np.abs(t) ** 2 + rho(w) * np.sum(np.abs(d[..., :-1]) ** 2, axis=-1)
    else:
        gap = 0.25 * np.abs(t) ** 2
    s = gap / (gap + rho(z) * rho(w))
    return _clamped_atanh_sqrt(s)


def ball_volume(z, r: float) -> np.ndarray:
    """Euclidean volume of the Bergman ball D(z, r)."""
    if not r > 0:
        raise ValueError("radius must be positive")
    z = require_interior(z)
    n = z.shape[-1]
    t = math.tanh(r)
    return (
        4.0 * math.pi**n / math.factorial(n)
        * t ** (2 * n) / (1.0 - t * t) ** (n + 1)
        * rho(z) ** (n + 1)
    )


def unit_ball_volume(n: int) -> float:
    return math.pi**n / math.factorial(n)


# -- automorphisms ----------------------------------------------------------

KINDS = ("dilation", "heisenberg", "sigma", "sigma_inv", "tau", "tau_inv")


@dataclass(frozen=True)
class Automorphism:
    """One of the explicit automorphisms: a dilation by ``t`` or a map based at a point."""

    kind: str
    t: float | None = None
    base: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown automorphism kind {self.kind!r}")
        if self.kind == "dilation":
            if self.t is None or not self.t > 0:
                raise ValueError("dilation requires t > 0")
            return
        if self.base is None:
            raise ValueError(f"{self.kind} requires a base point")
        b = np.array(self.base, dtype=complex).reshape(-1)
        if self.kind != "heisenberg":
            require_interior(b, "base point")
        b.setflags(write=False)
        object.__setattr__(self, "base", b)

    def __call__(self, u):
        return apply_automorphism(self, u)


def dilation(t: float) -> Automorphism:
    return Automorphism("dilation", t=float(t))


def heisenberg(z) -> Automorphism:
    return Automorphism("heisenberg", base=_arr(z))


def sigma(z) -> Automorphism:
    return Automorphism("sigma", base=_arr(z))


def sigma_inv(z) -> Automorphism:
    return Automorphism("sigma_inv", base=_arr(z))


def tau(z) -> Automorphism:
    return Automorphism("tau", base=_arr(z))


def tau_inv(z) -> Automorphism:
    return Automorphism("tau_inv", base=_arr(z))


def _dilate(u: np.ndarray, t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    out = u * t[..., None]
    out[..., -1] = u[..., -1] * (t * t)
    return out


def _h(u: np.ndarray, z: np.ndarray) -> np.ndarray:
    zp, zn = z[..., :-1], z[..., -1]
    out = np.empty(np.broadcast_shapes(u.shape, z.shape), dtype=complex)
    out[..., :-1] = u[..., :-1] - zp
    out[..., -1] = (
        u[..., -1] - zn.real
        - 2j * np.sum(u[..., :-1] * np.conj(zp), axis=-1)
        + 1j * np.sum(np.abs(zp) ** 2, axis=-1)
    )
    return out


def _h_inv(v: np.ndarray, z: np.ndarray) -> np.ndarray:
    zp, zn = z[..., :-1], z[..., -1]
    out = np.empty(np.broadcast_shapes(v.shape, z.shape), dtype=complex)
    out[..., :-1] = v[..., :-1] + zp
    out[..., -1] = (
        v[..., -1] + zn.real
        + 2j * np.sum(v[..., :-1] * np.conj(zp), axis=-1)
        + 1j * np.sum(np.abs(zp) ** 2, axis=-1)
    )
    return out


def sigma_map(z, u) -> np.ndarray:
    """sigma_z(u), broadcasting over stacks of base points and points."""
    z = require_interior(z, "base point")
    u = _arr(u)
    _same_dim(u, z)
    return _dilate(_h(u, z), rho(z) ** -0.5)


def sigma_inv_map(z, u) -> np.ndarray:
    """sigma_z^-1(u), broadcasting over stacks of base points and points."""
    z = require_interior(z, "base point")
    u = _arr(u)
    _same_dim(u, z)
    return _h_inv(_dilate(u, rho(z) ** 0.5), z)


def apply_automorphism(a: Automorphism, u) -> np.ndarray:
    u = _arr(u)
    if a.kind == "dilation":
        return _dilate(u, a.t)
    _same_dim(u, a.base)
    z = a.base
    if a.kind == "heisenberg":
        return _h(u, z)
    if a.kind == "sigma":
        return sigma_map(z, u)
    if a.kind == "sigma_inv":
        return sigma_inv_map(z, u)
    # tau_z is an involution, so tau and tau_inv coincide
    xi = cayley_inv(z)
    return cayley(mobius_ball(xi, cayley_inv(u)))


def jacobian(a: Automorphism, n: int | None = None) -> float:
    """Real Jacobian determinant, constant for dilation, Heisenberg and sigma kinds.

    ``n`` is only needed for dilations, which carry no base point.
    """
    if a.kind in ("tau", "tau_inv"):
        raise ValueError("tau maps do not have a constant Jacobian")
    if a.kind == "dilation":
        if n is None:
            raise ValueError("dimension n is required for a dilation Jacobian")
        return a.t ** (2 * (n + 1))
    n = a.base.size
    if a.kind == "heisenberg":
        return 1.0
    r = float(rho(a.base))
    return r ** (-(n + 1)) if a.kind == "sigma" else r ** (n + 1)


# -- ball model -------------------------------------------------------------


def cayley(xi) -> np.ndarray:
    """Cayley transform from the unit ball onto the half-space."""
    xi = _arr(xi)
    d = 1.0 + xi[..., -1]
    out = np.empty_like(xi)
    out[..., :-1] = xi[..., :-1] / d[..., None]
    out[..., -1] = 1j * (1.0 - xi[..., -1]) / d
    return out


def cayley_inv(z) -> np.ndarray:
    z = _arr(z)
    d = 1j + z[..., -1]
    out = np.empty_like(z)
    out[..., :-1] = 2j * z[..., :-1] / d[..., None]
    out[..., -1] = (1j - z[..., -1]) / d
    return out


def cayley_jacobian(xi) -> np.ndarray:
    """Real Jacobian of the Cayley transform at a ball point."""
    xi = _arr(xi)
    n = xi.shape[-1]
    return 4.0 / np.abs(1.0 + xi[..., -1]) ** (2 * (n + 1))


def cayley_inv_jacobian(z) -> np.ndarray:
    z = _arr(z)
    n = z.shape[-1]
    return 1.0 / (4.0 * np.abs(rho_pair(z, base_point(n))) ** (2 * (n + 1)))


def ball_direction(xi) -> tuple[np.ndarray, np.ndarray]:
    """(u, |xi|^2) with u = xi / |xi| (0 where xi = 0), safe against underflow."""
    xi = _arr(xi)
    # exact power-of-two rescaling keeps denormal inputs from overflowing
    _, e = np.frexp(np.max(np.abs(xi), axis=-1, keepdims=True))
    scaled = np.ldexp(xi.real, -e) + 1j * np.ldexp(xi.imag, -e)
    norm = np.sqrt(np.sum(np.abs(scaled) ** 2, axis=-1, keepdims=True))
    u = scaled / np.where(norm > 0, norm, 1.0)
    return u, np.sum(np.abs(xi) ** 2, axis=-1)


def mobius_ball(xi, eta) -> np.ndarray:
    """The involutive ball automorphism phi_xi, applied to eta."""
    xi, eta = _arr(xi), _arr(eta)
    _same_dim(xi, eta)
    u, s2 = ball_direction(xi)
    ip = np.sum(eta * np.conj(xi), axis=-1)
    p = np.sum(eta * np.conj(u), axis=-1)[..., None] * u
    q = eta - p
    num = xi - p - np.sqrt(1.0 - s2)[..., None] * q
    return num / (1.0 - ip)[..., None]


def ball_metric(xi, eta) -> np.ndarray:
    """Bergman distance of the unit ball, atanh |phi_xi(eta)|."""
    phi = mobius_ball(xi, eta)
    return _clamped_atanh_sqrt(np.sum(np.abs(phi) ** 2, axis=-1))
