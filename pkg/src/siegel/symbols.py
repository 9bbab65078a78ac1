"""Corpus of test symbols on the half-space.

Each symbol is a vectorized function of points ``(..., n)`` plus metadata:
the function-space memberships it is expected to have, an optional analytic
gradient for holomorphic members, and an optional support ball for
compactly supported members (used to restrict quadrature to the support).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import geometry as geo

BOUNDED = "Bounded"
HOLOMORPHIC = "Holomorphic"
CONJ_HOLOMORPHIC = "ConjugateHolomorphic"
BO = "ExpectBO"
BA = "ExpectBA"
VO = "ExpectVO"
VA = "ExpectVA"
BLOCH = "ExpectBloch"
LITTLE_BLOCH = "ExpectLittleBloch"

CLAIMS = frozenset(
    {BOUNDED, HOLOMORPHIC, CONJ_HOLOMORPHIC, BO, BA, VO, VA, BLOCH, LITTLE_BLOCH}
)

FD_REL_STEP = 1e-5


class UnknownSymbol(KeyError):
    pass


class NotHolomorphic(ValueError):
    pass


@dataclass(frozen=True)
class Symbol:
    id: str
    func: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    claims: frozenset = frozenset()
    grad: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)
    support: tuple | None = field(default=None, repr=False)  # (center, radius)
    params: tuple = ()

    def __post_init__(self):
        unknown = set(self.claims) - CLAIMS
        if unknown:
            raise ValueError(f"unknown claims {unknown}")
        object.__setattr__(self, "claims", frozenset(self.claims))

    def __call__(self, z) -> np.ndarray:
        return np.asarray(self.func(np.asarray(z, dtype=complex)), dtype=complex)

    @property
    def holomorphic(self) -> bool:
        return HOLOMORPHIC in self.claims

    @property
    def is_bmo(self) -> bool:
        return bool(self.claims & {BO, BA, VO, VA})

    def conj(self) -> "Symbol":
        return conjugate(self)


def eval_symbol(f: Symbol, z) -> np.ndarray:
    z = geo.require_interior(z, "evaluation point")
    out = f(z)
    if not np.all(np.isfinite(out)):
        raise ValueError(f"symbol {f.id} is not finite at {z}")
    return out


def _fd_gradient(f: Symbol, z: np.ndarray) -> np.ndarray:
    """Central differences along real directions (complex derivative of a holomorphic map)."""
    n = z.shape[-1]
    scale = np.maximum(1.0, np.linalg.norm(z, axis=-1))
    h = FD_REL_STEP * scale
    out = np.empty(z.shape, dtype=complex)
    for k in range(n):
        e = np.zeros(n, dtype=complex)
        e[k] = 1.0
        step = h[..., None] * e
        out[..., k] = (f(z + step) - f(z - step)) / (2.0 * h)
    return out


def eval_symbol_gradient(f: Symbol, z, analytic: bool = True) -> np.ndarray:
    """Holomorphic partials (d/dz_1, ..., d/dz_n) at ``z``.

    Uses the analytic channel when present and ``analytic`` is true,
    otherwise central differences with step 1e-5 * max(1, |z|).
    """
    if not f.holomorphic:
        raise NotHolomorphic(f"symbol {f.id} is not holomorphic")
    z = geo.require_interior(z, "evaluation point")
    if analytic and f.grad is not None:
        return np.asarray(f.grad(z), dtype=complex)
    return _fd_gradient(f, z)


def conjugate(f: Symbol) -> Symbol:
    swap = {HOLOMORPHIC: CONJ_HOLOMORPHIC, CONJ_HOLOMORPHIC: HOLOMORPHIC,
            BLOCH: None, LITTLE_BLOCH: None}
    claims = set()
    for c in f.claims:
        mapped = swap.get(c, c)
        if mapped:
            claims.add(mapped)
    cid = f.id[5:] if f.id.startswith("conj-") else f"conj-{f.id}"
    return Symbol(cid, lambda z, g=f.func: np.conj(g(z)), frozenset(claims),
                  None, f.support, f.params)


def add(f: Symbol, g: Symbol, id: str | None = None) -> Symbol:
    claims = f.claims & g.claims
    return Symbol(id or f"{f.id}+{g.id}", lambda z: f(z) + g(z), claims)


def subtract(f: Symbol, g: Symbol, id: str | None = None) -> Symbol:
    claims = f.claims & g.claims
    return Symbol(id or f"{f.id}-{g.id}", lambda z: f(z) - g(z), claims)


def compose(f: Symbol, phi: Callable[[np.ndarray], np.ndarray], id: str | None = None) -> Symbol:
    """``f o phi`` for a holomorphic self-map ``phi``; gradients fall back to differences."""
    keep = f.claims & {HOLOMORPHIC, CONJ_HOLOMORPHIC, BOUNDED}
    return Symbol(id or f"{f.id}@map", lambda z: f(phi(z)), keep)


# -- corpus ------------------------------------------------------------------


def _const(c: complex = 1.0) -> Symbol:
    c = complex(c)

    def f(z):
        return np.full(z.shape[:-1], c, dtype=complex)

    def g(z):
        return np.zeros(z.shape, dtype=complex)

    return Symbol("const", f, {BOUNDED, HOLOMORPHIC, VO, BLOCH, LITTLE_BLOCH},
                  g, params=(("c", c),))


def _coordinate(k: int = 1) -> Symbol:
    """z_k (1-based); for n = 1 the only coordinate is z_n."""
    k = int(k)

    def idx(z):
        n = z.shape[-1]
        if not 1 <= k <= n:
            return n - 1
        return k - 1

    def f(z):
        return z[..., idx(z)]

    def g(z):
        out = np.zeros(z.shape, dtype=complex)
        out[..., idx(z)] = 1.0
        return out

    return Symbol("coordinate", f, {HOLOMORPHIC}, g, params=(("k", k),))


def _log_kernel() -> Symbol:
    def f(z):
        return np.log(z[..., -1] + 1j)

    def g(z):
        out = np.zeros(z.shape, dtype=complex)
        out[..., -1] = 1.0 / (z[..., -1] + 1j)
        return out

    return Symbol("log-kernel", f, {HOLOMORPHIC, BLOCH, BO}, g)


def _cayley_coordinate() -> Symbol:
    """The last ball coordinate (i - z_n)/(i + z_n): bounded, little Bloch."""

    def f(z):
        return (1j - z[..., -1]) / (1j + z[..., -1])

    def g(z):
        out = np.zeros(z.shape, dtype=complex)
        out[..., -1] = -2j / (1j + z[..., -1]) ** 2
        return out

    return Symbol("cayley-n", f, {BOUNDED, HOLOMORPHIC, BO, BA, VO, BLOCH, LITTLE_BLOCH}, g)


def _beta_dist() -> Symbol:
    def f(z):
        return geo.bergman_metric(z, geo.base_point(z.shape[-1])).astype(complex)

    return Symbol("beta-dist", f, {BO})


def _rho_power(s: float = 0.5) -> Symbol:
    s = float(s)

    def f(z):
        return geo.rho(z).astype(complex) ** s

    return Symbol("rho-power", f, frozenset(), params=(("s", s),))


def _bump_profile(z: np.ndarray, radius: float) -> np.ndarray:
    # smooth function of tanh(beta(z, i))^2 = |Phi^{-1}(z)|^2, supported in D(i, radius)
    q = np.sum(np.abs(geo.cayley_inv(z)) ** 2, axis=-1) / math.tanh(radius) ** 2
    inside = q < 1.0
    qq = np.where(inside, q, 0.0)
    return np.where(inside, np.exp(1.0 - 1.0 / (1.0 - qq)), 0.0)


def _bump(radius: float = 1.0, height: float = 1.0) -> Symbol:
    radius, height = float(radius), float(height)

    def f(z):
        return (height * _bump_profile(z, radius)).astype(complex)

    return Symbol("bump", f, {BOUNDED, BO, BA, VO, VA},
                  support=("i", radius), params=(("radius", radius), ("height", height)))


def _bump_wave(freq: float = 8.0, radius: float = 1.0) -> Symbol:
    """sin(freq * Re z_n) times the bump: oscillates fast inside a compact support."""
    freq, radius = float(freq), float(radius)

    def f(z):
        return (np.sin(freq * z[..., -1].real) * _bump_profile(z, radius)).astype(complex)

    return Symbol("bump-wave", f, {BOUNDED, BO, BA, VO, VA},
                  support=("i", radius), params=(("freq", freq), ("radius", radius)))


def _dilation_wave(freq: float = 1.0) -> Symbol:
    """sin(freq * Re z_n / rho(z)): bounded and dilation invariant, so its
    oscillation never decays toward the boundary (BMO but not VMO)."""
    freq = float(freq)

    def f(z):
        return np.sin(freq * z[..., -1].real / geo.rho(z)).astype(complex)

    return Symbol("dilation-wave", f, {BOUNDED, BO, BA}, params=(("freq", freq),))


_FACTORIES = {
    "const": _const,
    "coordinate": _coordinate,
    "log-kernel": _log_kernel,
    "cayley-n": _cayley_coordinate,
    "beta-dist": _beta_dist,
    "rho-power": _rho_power,
    "bump": _bump,
    "bump-wave": _bump_wave,
    "dilation-wave": _dilation_wave,
}

CORPUS_IDS = tuple(_FACTORIES)


def make_symbol(id: str, **params) -> Symbol:
    """Build a corpus symbol by id; ``conj-<id>`` gives the conjugate."""
    if id.startswith("conj-"):
        return conjugate(make_symbol(id[5:], **params))
    try:
        factory = _FACTORIES[id]
    except KeyError:
        raise UnknownSymbol(f"unknown symbol {id!r}; known: {', '.join(CORPUS_IDS)}") from None
    try:
        return factory(**params)
    except TypeError as exc:
        raise ValueError(f"bad parameters for {id!r}: {exc}") from None


def support_ball(f: Symbol, n: int):
    """(center, radius) of a ball containing the support, or None."""
    if f.support is None:
        return None
    center, radius = f.support
    if isinstance(center, str):
        center = geo.base_point(n)
    return np.asarray(center, dtype=complex), float(radius)


def with_id(f: Symbol, id: str) -> Symbol:
    return replace(f, id=id)
