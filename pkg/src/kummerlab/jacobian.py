"""Points of A = C^2 / Lambda, theta divisor translates and the involution tau on A^[2]."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curve_model import CurvePoint, canonical_map
from .errors import CoincidentDivisors, MixedPeriodData, RootCountMismatch
from .periods import PeriodData, abel_jacobi_unreduced, theta_scale
from .proj_linalg import fs_distance
from .riemann_theta import gaussian_weight, theta_batch

TOL_ZERO = 1e-6
EPS_MERGE = 1e-5
EQUAL_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class JacobianPoint:
    z: np.ndarray
    periods: PeriodData

    def __post_init__(self):
        object.__setattr__(self, "z", self.periods.reduce(np.asarray(self.z, dtype=complex)))

    def _check(self, other):
        if other.periods is not self.periods:
            raise MixedPeriodData("points belong to different period data")

    def __add__(self, other):
        self._check(other)
        return JacobianPoint(self.z + other.z, self.periods)

    def __sub__(self, other):
        self._check(other)
        return JacobianPoint(self.z - other.z, self.periods)

    def __neg__(self):
        return JacobianPoint(-self.z, self.periods)

    def __mul__(self, n):
        return JacobianPoint(n * self.z, self.periods)

    __rmul__ = __mul__

    def distance(self, other) -> float:
        self._check(other)
        return float(np.linalg.norm(self.periods.reduce(self.z - other.z)))

    def is_equal(self, other, tol=EQUAL_TOL) -> bool:
        return self.distance(other) < tol

    def sort_key(self):
        z = np.round(self.z, 9)
        return (z[0].real, z[0].imag, z[1].real, z[1].imag)

    def cache_key(self, quantum=1e-9):
        t = self.periods.lattice_coords(self.z)
        return tuple(np.round(t / quantum).astype(np.int64).tolist())

    def __repr__(self):
        return f"JacobianPoint({np.round(self.z, 8).tolist()})"


def add(p, q):
    return p + q


def neg(p):
    return -p


def is_equal(p, q, tol=EQUAL_TOL):
    return p.is_equal(q, tol)


def zero(periods) -> JacobianPoint:
    return JacobianPoint(np.zeros(2, dtype=complex), periods)


def point_from_coords(periods, t) -> JacobianPoint:
    """Point with real lattice coordinates t = (t1, t2, t3, t4)."""
    return JacobianPoint(periods.from_coords(np.asarray(t, dtype=float)), periods)


def random_point(periods, rng) -> JacobianPoint:
    return point_from_coords(periods, rng.random(4) - 0.5)


def torsion_points(periods, n: int) -> list[JacobianPoint]:
    if n < 1:
        raise ValueError("n must be positive")
    out = []
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for m in range(n):
                    out.append(point_from_coords(periods, np.array([k, m, i, j]) / n))
    return out


def alpha(periods, p: CurvePoint) -> JacobianPoint:
    """The Abel-Jacobi image p - eta."""
    return JacobianPoint(abel_jacobi_unreduced(periods, p), periods)


# ------------------------------------------------------------- directions

def flat_direction(periods, v) -> np.ndarray:
    """Flat tangent vector in C^2 for the direction v = [v0 : v1] of P(T_a A) = P^1."""
    w = periods.pa_inv @ np.asarray(v, dtype=complex)
    return w / np.linalg.norm(w)


def p1_direction(periods, w) -> np.ndarray:
    v = periods.a_periods @ np.asarray(w, dtype=complex)
    return _normalize_p1(v)


def _normalize_p1(v):
    v = np.asarray(v, dtype=complex)
    v = v / np.linalg.norm(v)
    k = 0 if abs(v[0]) > 1e-12 else 1
    return v * (abs(v[k]) / v[k])


def x_of_direction(v):
    """Canonical x-coordinate of [v0 : v1]; None for [0 : 1]."""
    v = np.asarray(v, dtype=complex)
    if abs(v[0]) <= 1e-13 * abs(v[1]):
        return None
    return complex(v[1] / v[0])


# ---------------------------------------------------------- length two

@dataclass(frozen=True, eq=False)
class Reduced:
    a: JacobianPoint
    b: JacobianPoint

    def __post_init__(self):
        if self.b.sort_key() < self.a.sort_key():
            a, b = self.b, self.a
            object.__setattr__(self, "a", a)
            object.__setattr__(self, "b", b)

    @property
    def support(self):
        return [self.a, self.b]

    def __repr__(self):
        return f"Reduced({self.a!r}, {self.b!r})"


@dataclass(frozen=True, eq=False)
class NonReduced:
    a: JacobianPoint
    v: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "v", _normalize_p1(self.v))

    @property
    def support(self):
        return [self.a, self.a]

    @property
    def direction(self):
        return flat_direction(self.a.periods, self.v)

    def __repr__(self):
        return f"NonReduced({self.a!r}, v={np.round(self.v, 8).tolist()})"


def scheme_sum(zeta) -> JacobianPoint:
    s = zeta.support
    return s[0] + s[1]


def schemes_equal(z1, z2, tol=1e-7) -> bool:
    if isinstance(z1, Reduced) and isinstance(z2, Reduced):
        return ((z1.a.is_equal(z2.a, tol) and z1.b.is_equal(z2.b, tol))
                or (z1.a.is_equal(z2.b, tol) and z1.b.is_equal(z2.a, tol)))
    if isinstance(z1, NonReduced) and isinstance(z2, NonReduced):
        return z1.a.is_equal(z2.a, tol) and fs_distance(z1.v, z2.v) < tol
    return False


def scheme_distance(z1, z2) -> float:
    """Worst support/direction mismatch between two length-two schemes (inf if types differ)."""
    if isinstance(z1, Reduced) and isinstance(z2, Reduced):
        return min(max(z1.a.distance(z2.a), z1.b.distance(z2.b)),
                   max(z1.a.distance(z2.b), z1.b.distance(z2.a)))
    if isinstance(z1, NonReduced) and isinstance(z2, NonReduced):
        fs = fs_distance(z1.v, z2.v)
        return max(z1.a.distance(z2.a), fs)
    return float("inf")


# ------------------------------------------------------- theta divisor

def _theta_scale(periods) -> float:
    s = getattr(periods, "_theta_delta_scale", None)
    if s is None:
        s = theta_scale(periods, periods.delta_arrays)
        periods._theta_delta_scale = s
    return s


def theta_delta(periods, z, jets=((0, 0),)):
    a, b = periods.delta_arrays
    z = np.atleast_2d(z)
    return theta_batch(a[None], b[None], z, periods.omega, jets=jets)[:, :, 0]


def theta_residual(periods, z) -> np.ndarray:
    """|theta[delta](z)| normalized to be Lambda-invariant, relative to the median scale."""
    z = periods.reduce(np.atleast_2d(z))
    v = np.abs(theta_delta(periods, z)[0]) * gaussian_weight(z, periods.omega)
    return v / _theta_scale(periods)


def on_theta(a: JacobianPoint, w: JacobianPoint, tol=TOL_ZERO) -> bool:
    """Is w on the translate Theta_a = {theta[delta](w - a) = 0}?"""
    return bool(theta_residual(a.periods, (w - a).z)[0] < tol)


# ------------------------------------------------------------ root sweep

class _Sweep:
    """Abel-Jacobi values on a polar grid of the x-sphere, computed once per curve."""

    N_ANG, N_RAD, N_OUT = 64, 32, 16

    def __init__(self, periods: PeriodData):
        ch = periods.charts
        c = periods.curve
        self.periods = periods
        rho = ch.rho
        ang = np.exp(2j * np.pi * np.arange(self.N_ANG) / self.N_ANG)
        inner = rho * ((np.arange(self.N_RAD) + 0.5) / self.N_RAD)[:, None] * ang[None, :]
        outer_t = (1 / rho) * ((np.arange(self.N_OUT) + 0.5) / self.N_OUT)[:, None] * ang[None, :]
        self.grids = []
        for xs in (inner, 1.0 / outer_t):
            alpha = np.empty(xs.shape + (2,), dtype=complex)
            for idx in np.ndindex(xs.shape):
                alpha[idx] = abel_jacobi_unreduced(periods, c.lift(xs[idx], 0))
            self.grids.append((xs, alpha))
        # the point(s) at infinity
        self.extra = [CurvePoint.infinity(0)]
        if c.degree == 6:
            self.extra.append(CurvePoint.infinity(1))
        self.extra_alpha = [abel_jacobi_unreduced(periods, p) for p in self.extra]

    def seeds(self, shift, limit=10, loose=False):
        """Curve points where |theta[delta](alpha(x) + shift)| has a local minimum."""
        pd = self.periods
        c = pd.curve
        cands = []
        for xs, alpha in self.grids:
            for sheet, sgn in ((0, 1), (1, -1)):
                vals = theta_residual(pd, (sgn * alpha + shift).reshape(-1, 2)).reshape(xs.shape)
                med = np.median(vals)
                nb = [np.roll(vals, 1, axis=1), np.roll(vals, -1, axis=1)]
                up = np.vstack([vals[1:], np.full((1, vals.shape[1]), np.inf)])
                down = np.vstack([np.full((1, vals.shape[1]), np.inf), vals[:-1]])
                nb += [up, down]
                is_min = np.all([vals <= n for n in nb], axis=0)
                if not loose:
                    is_min &= vals < med / 10
                for i, j in zip(*np.nonzero(is_min)):
                    cands.append((vals[i, j], c.lift(xs[i, j], sheet)))
        for p, al in zip(self.extra, self.extra_alpha):
            cands.append((theta_residual(pd, al + shift)[0], p))
        cands.sort(key=lambda t: t[0])
        return [p for _, p in cands[:limit]]


def _sweep(periods) -> _Sweep:
    sw = getattr(periods, "_sweep", None)
    if sw is None:
        sw = _Sweep(periods)
        periods._sweep = sw
    return sw


@dataclass
class _Root:
    point: CurvePoint
    alpha: np.ndarray  # unreduced alpha(point)
    residual: float
    slope: float  # |dG/ds| times chart scale over theta scale


def _chart_scale(ch, chart):
    if chart[0] == "A":
        return None
    if chart[0] == "B":
        return np.sqrt(ch.radius[chart[1]])
    return 1 / ch.rho if ch.curve.degree == 6 else 1 / np.sqrt(ch.rho)


def _newton_on_curve(periods, p: CurvePoint, shift, mult=1, max_iter=60):
    """Newton iteration for theta[delta](alpha(x) + shift) = 0 along the curve.

    alpha is carried along by integrating over each Newton step, so it stays
    on a single continuous branch.
    """
    ch = periods.charts
    scale = _theta_scale(periods)
    al = abel_jacobi_unreduced(periods, p)
    chart = ch.region(p.x)
    s, h = ch.point_param(chart, p)
    step = np.inf
    prev = None  # (s, dG) for the secant phase on a double root
    for it in range(max_iter):
        x = ch.x_of(chart, s) if not (chart[0] == "I" and s == 0) else None
        new_chart = ch.region(x)
        if new_chart != chart:
            pt = ch.to_point(chart, s, h)
            chart = new_chart
            s, h = ch.point_param(chart, pt)
            prev = None
        L = _chart_scale(ch, chart)
        if L is None:
            L = float(np.min(np.abs(ch.curve.roots - s)))
        zr = periods.reduce(al + shift)
        G, G1, G2 = theta_delta(periods, zr, jets=((0, 0), (1, 0), (0, 1)))[:, 0]
        dal = periods.pa_inv @ (ch.weights(chart, np.array([s]))[:, 0] / h)
        dG = G1 * dal[0] + G2 * dal[1]
        if dG == 0:
            break
        if mult == 2 and prev is not None and prev[1] != dG:
            # dG has a simple zero at a double root, so a secant step on it
            # reaches full precision where G itself is already at rounding level
            step = -dG * (s - prev[0]) / (dG - prev[1])
        else:
            step = -mult * G / dG
        prev = (s, dG) if mult == 2 else None
        if abs(step) > 0.3 * L:
            step *= 0.3 * L / abs(step)
        val, h = ch.leg(chart, s, s + step, h)
        s = s + step
        al = al + periods.pa_inv @ val
        if abs(step) < 1e-14 * L:
            break
    pt = ch.to_point(chart, s, h)
    zr = periods.reduce(al + shift)
    G, G1, G2 = theta_delta(periods, zr, jets=((0, 0), (1, 0), (0, 1)))[:, 0]
    gw = gaussian_weight(zr, periods.omega)[0]
    dal = periods.pa_inv @ (ch.weights(chart, np.array([s]))[:, 0] / h)
    L = _chart_scale(ch, chart) or float(np.min(np.abs(ch.curve.roots - s)))
    slope = abs(G1 * dal[0] + G2 * dal[1]) * gw * L / scale
    return _Root(pt, al, abs(G) * gw / scale, slope)


def _curve_roots(periods, shift):
    """Distinct zeros on C of theta[delta](alpha(x) + shift), best residual first."""
    sw = _sweep(periods)
    found = []
    for loose in (False, True):
        for seed in sw.seeds(shift, limit=10 if not loose else 24, loose=loose):
            r = _newton_on_curve(periods, seed, shift)
            if r.residual > 1e-8:
                continue
            if any(np.linalg.norm(periods.reduce(r.alpha - q.alpha)) < EPS_MERGE for q in found):
                continue
            found.append(r)
        if len(found) >= 2 or (len(found) == 1 and found[0].slope < 1e-4):
            break
    found.sort(key=lambda r: r.residual)
    return found


def theta_intersection(a: JacobianPoint, b: JacobianPoint):
    """The length-two scheme Theta_a intersect Theta_b."""
    a._check(b)
    if a.is_equal(b):
        raise CoincidentDivisors("Theta_a and Theta_b coincide")
    pd = a.periods
    roots = _curve_roots(pd, (a - b).z)
    if len(roots) >= 2:
        w1 = JacobianPoint(roots[0].alpha + a.z, pd)
        w2 = JacobianPoint(roots[1].alpha + a.z, pd)
        return Reduced(w1, w2)
    if len(roots) == 1 and roots[0].slope < 1e-4:
        r = _newton_on_curve(pd, roots[0].point, (a - b).z, mult=2)
        w = JacobianPoint(r.alpha + a.z, pd)
        return NonReduced(w, canonical_map(r.point))
    raise RootCountMismatch(f"found {len(roots)} simple root(s) of the pulled-back theta function")


def tau(zeta):
    """The involution {a, b} -> Theta_a . Theta_b on length-two subschemes of A."""
    if isinstance(zeta, Reduced):
        return theta_intersection(zeta.a, zeta.b)
    pd = zeta.a.periods
    c = pd.curve
    x = x_of_direction(zeta.v)
    if x is None:
        p = CurvePoint.infinity(0)
    else:
        p = c.lift(x, 0)
    al = alpha(pd, p)
    if c.is_weierstrass(p, tol=1e-9):
        return NonReduced(zeta.a + al, zeta.v)
    return Reduced(zeta.a + al, zeta.a - al)


def tangent_on_theta(c: JacobianPoint, zeta) -> float:
    """How far zeta is from lying on Theta_c: worst normalized theta residual,
    including the directional derivative along v for a nonreduced scheme."""
    pd = c.periods
    res = [theta_residual(pd, (w - c).z)[0] for w in zeta.support]
    if isinstance(zeta, NonReduced):
        zr = pd.reduce((zeta.a - c).z)
        _, G1, G2 = theta_delta(pd, zr, jets=((0, 0), (1, 0), (0, 1)))[:, 0]
        grad = np.array([G1, G2])
        d = zeta.direction
        gw = gaussian_weight(zr, pd.omega)[0]
        res.append(abs(grad @ d) * gw / (_theta_scale(pd) * 2 * np.pi))
    return float(max(res))
