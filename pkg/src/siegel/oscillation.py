"""Berezin transform, mean oscillation, ball averages and seminorm scans.

Berezin-type integrals use half-space nodes centered at the evaluation point
(``w = sigma_z^{-1}(Phi(xi))``), where the weight ``|k_z|^2 dV`` becomes the
normalized volume of the unit ball.  Symbols with a declared support ball are
integrated over that ball instead, so the nodes follow the support wherever
``z`` is.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from . import geometry as geo
from . import integrate as itg
from .integrate import IntegralResult, NodeSet, QuadratureError, QuadratureSpec
from .symbols import BA, BO, Symbol, support_ball

DEFAULT_RADIUS = 1.0
CLAMP_SIGMAS = 3.0
# relative rounding floor: radicands below it count as 0, negatives within it are clamped
CLAMP_FLOOR = 1e-12
PAIR_CAP = 2048
GRID_PRESETS = ("ray-ladder", "interior-qmc")
WHICH = ("BMO", "BMO_r", "BO", "BA", "Bloch")


class NegativeRadicand(QuadratureError):
    """The variance radicand is negative beyond the quadrature error."""


@dataclass(frozen=True)
class Oscillation:
    value: float
    std_error: float
    radicand: float
    radicand_se: float
    nodes_used: int = 0


def _spec_for(spec: QuadratureSpec | None, n: int) -> QuadratureSpec:
    if spec is None:
        return QuadratureSpec(n=n)
    if spec.n != n:
        raise geo.DimensionError(f"spec is for n={spec.n}, point has n={n}")
    return spec


def _point(z) -> np.ndarray:
    z = geo.require_interior(np.asarray(z, dtype=complex).reshape(-1), "center")
    return z


def berezin_nodes(f: Symbol | None, z, spec: QuadratureSpec) -> NodeSet:
    """Nodes whose weights already include ``|k_z(w)|^2``."""
    z = _point(z)
    sb = support_ball(f, z.size) if f is not None else None
    if sb is None:
        nodes = itg.halfspace_nodes(spec, center=z)
    else:
        nodes = itg.metric_ball_nodes(sb[0], sb[1], spec)
    k2 = np.abs(geo.normalized_kernel(z, nodes.points)) ** 2
    return NodeSet(nodes.points, nodes.weights * k2, nodes.reps, nodes.scheme)


def berezin(f: Symbol, z, spec: QuadratureSpec | None = None, centered: bool = True) -> IntegralResult:
    """The Berezin transform: integral of f |k_z|^2 over the half-space.

    ``centered=False`` uses nodes clustered at i instead of at z; the result is
    the same integral with a different discretization (useful as a cross-check).
    """
    z = _point(z)
    spec = _spec_for(spec, z.size)
    if centered:
        nodes = berezin_nodes(f, z, spec)
    else:
        base = itg.halfspace_nodes(spec)
        k2 = np.abs(geo.normalized_kernel(z, base.points)) ** 2
        nodes = NodeSet(base.points, base.weights * k2, base.reps, base.scheme)
    return nodes.integrate(f(nodes.points))


def _clamp(radicand: float, se: float, scale: float, nodes_used: int) -> Oscillation:
    floor = CLAMP_SIGMAS * se + CLAMP_FLOOR * max(scale, 1e-300)
    if radicand < -floor:
        raise NegativeRadicand(
            f"oscillation radicand {radicand:.3e} is below -{CLAMP_SIGMAS:g} std_error ({se:.3e})"
        )
    # radicands at the rounding level of the scale are indistinguishable from 0
    rad = radicand if radicand > CLAMP_FLOOR * max(scale, 1e-300) else 0.0
    value = math.sqrt(rad)
    if value > 0:
        vse = min(se / (2.0 * value), math.sqrt(se))
    else:
        vse = math.sqrt(se)
    return Oscillation(value, vse, radicand, se, nodes_used)


def mean_oscillation(f: Symbol, z, spec: QuadratureSpec | None = None,
                     route: str = "definition") -> Oscillation:
    """MO(f)(z) = (Berezin(|f|^2)(z) - |Berezin(f)(z)|^2)^(1/2).

    ``route="centered"`` integrates |f - f~(z)|^2 |k_z|^2 instead, with f~(z)
    taken from an independent node set.
    """
    z = _point(z)
    spec = _spec_for(spec, z.size)
    if route == "definition":
        nodes = berezin_nodes(f, z, spec)
        fv = f(nodes.points)
        b0 = nodes.integrate(fv)
        b1 = nodes.integrate(np.abs(fv) ** 2)
        m = b0.value
        rad = b1.real - abs(m) ** 2
        # influence function of the radicand gives its linearized error
        se = nodes.integrate(np.abs(fv) ** 2 - 2.0 * np.real(np.conj(m) * fv)).std_error
        return _clamp(rad, se, b1.real, len(nodes))
    if route == "centered":
        c = berezin(f, z, spec.child(1)).value
        nodes = berezin_nodes(f, z, spec.child(2))
        res = nodes.integrate(np.abs(f(nodes.points) - c) ** 2)
        rad = res.real
        if f.support is not None:
            # off the support f vanishes and |f - c|^2 = |c|^2 against the rest of |k_z|^2
            rad += abs(c) ** 2 * (1.0 - float(np.sum(nodes.weights)))
        return _clamp(rad, res.std_error, rad, len(nodes))
    raise ValueError(f"unknown route {route!r}")


# -- metric-ball averages ----------------------------------------------------


def _mean(nodes: NodeSet, values) -> tuple[complex, float]:
    """Ratio estimate of the average of ``values`` against the node weights."""
    W = float(np.sum(nodes.weights))
    v = np.broadcast_to(np.asarray(values), nodes.weights.shape)
    m = complex(np.sum(nodes.weights * v) / W)
    se = nodes.integrate(v - m).std_error / W
    return m, se


def _misses_support(f: Symbol, z: np.ndarray, r: float) -> bool:
    sb = support_ball(f, z.size)
    if sb is None:
        return False
    return float(geo.bergman_metric(z, sb[0])) >= r + sb[1]


def ball_average(f: Symbol, z, r: float = DEFAULT_RADIUS,
                 spec: QuadratureSpec | None = None) -> IntegralResult:
    """Integral mean of f over the Bergman ball D(z, r)."""
    z = _point(z)
    spec = _spec_for(spec, z.size)
    if _misses_support(f, z, r):
        return IntegralResult(0j, 0.0, 0)
    nodes = itg.metric_ball_nodes(z, r, spec)
    m, se = _mean(nodes, f(nodes.points))
    return IntegralResult(m, se, len(nodes))


def _groups(nodes: NodeSet) -> np.ndarray:
    if nodes.reps is not None:
        return nodes.reps
    return np.arange(len(nodes)) % itg.QMC_REPLICATES


def _pair_mean(n1: NodeSet, f1: np.ndarray, n2: NodeSet, f2: np.ndarray):
    """Half the mean of |f(u) - f(v)|^2 over independent node sets, with a group error."""
    w1, w2 = n1.weights, n2.weights
    g1, g2 = _groups(n1), _groups(n2)
    G = itg.QMC_REPLICATES
    total = 0.0
    per = np.zeros(G)
    wg1 = np.array([w1[g1 == k].sum() for k in range(G)])
    wg2 = np.array([w2[g2 == k].sum() for k in range(G)])
    step = 256
    for s in range(0, f1.size, step):
        d = np.abs(f1[s:s + step, None] - f2[None, :]) ** 2
        rows = d * w2[None, :]
        total += float(np.sum(w1[s:s + step] * rows.sum(axis=1)))
        for k in range(G):
            sel = g1[s:s + step] == k
            if np.any(sel):
                per[k] += float(np.sum(w1[s:s + step][sel] * rows[sel][:, g2 == k].sum(axis=1)))
    value = 0.5 * total / (w1.sum() * w2.sum())
    if n1.scheme == "polar":
        return value, 0.0
    est = 0.5 * per / (wg1 * wg2)
    return value, float(np.std(est, ddof=1) / math.sqrt(G))


def _capped(spec: QuadratureSpec, cap: int) -> QuadratureSpec:
    if spec.node_count <= cap:
        return spec
    return QuadratureSpec(spec.scheme, cap, spec.seed, spec.n)


def mean_oscillation_r(f: Symbol, z, r: float = DEFAULT_RADIUS,
                       spec: QuadratureSpec | None = None, route: str = "variance") -> Oscillation:
    """MO_r(f)(z) over the Bergman ball D(z, r).

    ``route="variance"``: ((|f|^2)^_r(z) - |f^_r(z)|^2)^(1/2) from one node set.
    ``route="pairs"``: the double integral of |f(u) - f(v)|^2 / (2 |D|^2) over
    two independent node sets (each capped at 2048 nodes).
    """
    z = _point(z)
    spec = _spec_for(spec, z.size)
    if not r > 0:
        raise ValueError("radius must be positive")
    if _misses_support(f, z, r):
        return Oscillation(0.0, 0.0, 0.0, 0.0, 0)
    if route == "variance":
        nodes = itg.metric_ball_nodes(z, r, spec)
        fv = f(nodes.points)
        m, _ = _mean(nodes, fv)
        scale, _ = _mean(nodes, np.abs(fv) ** 2)
        rad, se = _mean(nodes, np.abs(fv - m) ** 2)
        return _clamp(rad.real, se, scale.real, len(nodes))
    if route == "pairs":
        s = _capped(spec, PAIR_CAP)
        n1 = itg.metric_ball_nodes(z, r, s.child(1))
        n2 = itg.metric_ball_nodes(z, r, s.child(2))
        rad, se = _pair_mean(n1, f(n1.points), n2, f(n2.points))
        return _clamp(rad, se, rad, len(n1) + len(n2))
    raise ValueError(f"unknown route {route!r}")


def oscillation_sup_r(f: Symbol, z, r: float = DEFAULT_RADIUS, count: int = 1000,
                      seed: int = 0) -> float:
    """Sampled sup of |f(z) - f(w)| over w in D(z, r)."""
    if count < 100:
        raise ValueError("count must be >= 100")
    z = _point(z)
    w = itg.sample_metric_ball(z, r, count, seed)
    return float(np.max(np.abs(f(w) - f(z))))


def ba_seminorm_r(f: Symbol, z, r: float = DEFAULT_RADIUS,
                  spec: QuadratureSpec | None = None) -> IntegralResult:
    """((|f|^2)^_r(z))^(1/2), the local quantity whose sup is the BA_r seminorm."""
    g = Symbol(f"|{f.id}|^2", lambda w: np.abs(f(w)) ** 2, support=f.support)
    avg = ball_average(g, z, r, spec)
    v = math.sqrt(max(avg.real, 0.0))
    se = avg.std_error / (2.0 * v) if v > 0 else math.sqrt(avg.std_error)
    return IntegralResult(complex(v), se, avg.nodes_used)


# -- Forelli-Rudin type integral ---------------------------------------------


def forelli_rudin_integral(z, t: float, s: float, alpha: float = 0.0,
                           spec: QuadratureSpec | None = None,
                           strict: bool = True) -> IntegralResult:
    """Integral of beta(z,w)^alpha rho(w)^t / |rho(z,w)|^s over the half-space.

    Finite when t > -1 and s - t > n + 1, in which case it scales like
    rho(z)^(n+1+t-s).  Nodes are the plain Cayley pullback (not centered at
    z), so the scaling law is a genuine check.  ``strict=False`` evaluates
    outside the parameter domain, where the quadrature grows with node count.
    """
    z = _point(z)
    n = z.size
    spec = _spec_for(spec, n)
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    if strict and not (t > -1 and s - t > n + 1):
        raise ValueError(f"need t > -1 and s - t > n + 1 (got t={t}, s={s}, n={n})")
    nodes = itg.halfspace_nodes(spec)
    w = nodes.points
    vals = geo.rho(w) ** t / np.abs(geo.rho_pair(z, w)) ** s
    if alpha:
        vals = vals * geo.bergman_metric(z, w) ** alpha
    return nodes.integrate(vals)


# -- BMO = BO + BA ------------------------------------------------------------


def _batched_ball_mean(f: Symbol, pts: np.ndarray, r: float, spec: QuadratureSpec) -> np.ndarray:
    """Ball averages at many centers, sharing one node template at i."""
    n = pts.shape[-1]
    flat = pts.reshape(-1, n)
    tmpl = itg.metric_ball_nodes(geo.base_point(n), r, spec)
    W = np.sum(tmpl.weights)
    out = np.empty(flat.shape[0], dtype=complex)
    for k, z in enumerate(flat):
        if _misses_support(f, z, r):
            out[k] = 0.0
            continue
        w = geo.sigma_inv(z)(tmpl.points)
        out[k] = np.sum(tmpl.weights * f(w)) / W
    return out.reshape(pts.shape[:-1])


def bo_ba_decompose(f: Symbol, r: float = DEFAULT_RADIUS,
                    spec: QuadratureSpec | None = None, n: int = 1) -> tuple[Symbol, Symbol]:
    """Split f into its ball average (bounded oscillation part) and the rest.

    Both parts evaluate with one fixed node template, so they sum to f exactly.
    """
    if not r > 0:
        raise ValueError("radius must be positive")
    inner = spec if spec is not None else QuadratureSpec(node_count=1024, n=n)

    def smooth(z):
        return _batched_ball_mean(f, np.asarray(z, dtype=complex), r, inner)

    def rest(z):
        z = np.asarray(z, dtype=complex)
        return f(z) - smooth(z)

    part1 = Symbol(f"avg_r({f.id})", smooth, {BO}, params=(("r", r),))
    part2 = Symbol(f"{f.id}-avg_r", rest, {BA}, params=(("r", r),))
    return part1, part2


# -- grids and scans -----------------------------------------------------------


@dataclass(frozen=True)
class GridPoint:
    ray: str
    t: float
    z: np.ndarray = field(repr=False)


def ray_ladder(n: int, kmax: int = 8) -> list[GridPoint]:
    """Dilation rays delta_t(i) for t = 2^0 .. 2^-kmax and 2^0 .. 2^kmax, and the
    horizontal ray x + i for x = 0, 2^0 .. 2^kmax, each in approach order."""
    i = geo.base_point(n)
    pts = []
    for k in range(kmax + 1):
        t = 2.0 ** -k
        pts.append(GridPoint("dilation-down", t, geo.dilation(t)(i)))
    for k in range(kmax + 1):
        t = 2.0 ** k
        pts.append(GridPoint("dilation-up", t, geo.dilation(t)(i)))
    xs = [0.0] + [2.0 ** k for k in range(kmax + 1)]
    for x in xs:
        z = i.copy()
        z[-1] = x + 1j
        pts.append(GridPoint("horizontal", x, z))
    return pts


def interior_qmc(n: int, count: int = 200, radius: float = 3.0) -> list[GridPoint]:
    """Fixed quasi-random points: Sobol points in the ball of hyperbolic radius
    ``radius`` around 0, mapped by the Cayley transform."""
    m = max(0, math.ceil(math.log2(count)))
    u = qmc.Sobol(2 * n, scramble=True, seed=20240601).random_base2(m)[:count]
    xi = math.tanh(radius) * itg.cube_to_ball(u, n)
    z = geo.cayley(xi)
    return [GridPoint("interior", float(k), z[k]) for k in range(count)]


def make_grid(preset: str, n: int) -> list[GridPoint]:
    if preset == "ray-ladder":
        return ray_ladder(n)
    if preset == "interior-qmc":
        return interior_qmc(n)
    if preset == "all":
        return ray_ladder(n) + interior_qmc(n)
    raise ValueError(f"unknown grid preset {preset!r}; choose from {GRID_PRESETS}")


@dataclass
class SeminormScan:
    which: str
    grid: list
    values: np.ndarray
    std_errors: np.ndarray

    @property
    def sup_estimate(self) -> float:
        return float(np.max(self.values)) if len(self.values) else 0.0

    @property
    def decay_profile(self) -> dict:
        prof: dict = {}
        for g, v in zip(self.grid, self.values):
            if g.ray != "interior":
                prof.setdefault(g.ray, []).append((g.t, float(v)))
        return prof

    def rows(self):
        for k, (g, v, e) in enumerate(zip(self.grid, self.values, self.std_errors)):
            yield {"index": k, "ray": g.ray, "t": g.t, "rho": float(geo.rho(g.z)),
                   "value": float(v), "std_error": float(e)}


def point_value(f: Symbol, which: str, z, spec: QuadratureSpec, r: float = DEFAULT_RADIUS,
                seed: int = 0) -> tuple[float, float]:
    """One seminorm ingredient at one point: (value, std_error)."""
    if which == "BMO":
        o = mean_oscillation(f, z, spec)
        return o.value, o.std_error
    if which == "BMO_r":
        o = mean_oscillation_r(f, z, r, spec)
        return o.value, o.std_error
    if which == "BO":
        return oscillation_sup_r(f, z, r, count=max(100, spec.node_count // 16), seed=seed), 0.0
    if which == "BA":
        b = ba_seminorm_r(f, z, r, spec)
        return b.real, b.std_error
    if which == "Bloch":
        from .bloch import invariant_gradient
        return float(invariant_gradient(f, z)), 0.0
    raise ValueError(f"unknown seminorm {which!r}; choose from {WHICH}")


def seminorm_scan(f: Symbol, which: str, grid="ray-ladder", spec: QuadratureSpec | None = None,
                  r: float = DEFAULT_RADIUS, n: int | None = None) -> SeminormScan:
    """Evaluate a seminorm ingredient over a grid; each point gets its own derived seed."""
    if n is None:
        n = spec.n if spec is not None else 1
    spec = _spec_for(spec, n)
    pts = make_grid(grid, n) if isinstance(grid, str) else list(grid)
    vals = np.zeros(len(pts))
    errs = np.zeros(len(pts))
    for k, g in enumerate(pts):
        child = spec.child(k)
        vals[k], errs[k] = point_value(f, which, g.z, child, r, seed=child.seed)
    return SeminormScan(which, pts, vals, errs)
