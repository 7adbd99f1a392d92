"""Period matrix, Abel-Jacobi map and the odd characteristic cutting out Theta.

Integration happens in local charts of the curve so the integrand stays
smooth everywhere:

* affine chart      x = s,          y = h
* branch chart at e x = e + s^2,    y = s h
* infinity chart    x = 1/s^2 (deg 5, y = h / s^5) or x = 1/s (deg 6, y = h / s^3)

In each chart h^2 is a polynomial in s without zeros on the chart's disk,
and h is continued along Gauss-Legendre nodes by choosing, at every node,
the square root nearest to the previous one.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .curve_model import CurvePoint, CurveSpec
from .errors import IllConditionedPeriods, PathThroughBranchPoint, QuadratureNotConverged
from .riemann_theta import (even_characteristics, gaussian_weight, odd_characteristics,
                            theta_batch)

DEFAULT_PRECISION = 1e-12
_MAX_NODES = 2048


@lru_cache(maxsize=None)
def _gauss01(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return (x + 1) / 2, w / 2


def _continue_sqrt(h2, h_start):
    """Continuous square root of the samples h2 starting next to h_start."""
    p = np.sqrt(h2)
    prev = np.concatenate(([h_start], p[:-1]))
    flips = np.where(np.abs(p - prev) > np.abs(p + prev), -1.0, 1.0)
    return p * np.cumprod(flips)


def _adaptive(fn, tol, start=32):
    """Run fn(n) with doubling n until two successive results agree."""
    n = start
    prev = fn(n)
    while True:
        n *= 2
        cur = fn(n)
        diff = np.max(np.abs(cur[0] - prev[0]))
        if diff <= tol * (1 + np.max(np.abs(cur[0]))):
            return cur, n
        if n >= _MAX_NODES:
            raise QuadratureNotConverged(f"no convergence with {n} nodes (change {diff:.2e})")
        prev = cur


class Charts:
    """Local charts of y^2 = f(x) used for path integration."""

    def __init__(self, curve: CurveSpec, tol=1e-13):
        self.curve = curve
        self.tol = tol
        e = curve.roots
        d = np.abs(e[:, None] - e[None, :]) + np.eye(len(e)) * 1e300
        self.radius = 0.45 * d.min(axis=1)
        self.rho = 2.0 * max(curve.max_modulus, 1e-6)
        # t^deg f(1/t), lowest degree first in t
        self.inf_poly = curve.poly.copy()

    # chart geometry -----------------------------------------------------
    def region(self, x):
        if x is None:
            return ("I",)
        dist = np.abs(self.curve.roots - x)
        k = int(np.argmin(dist))
        if dist[k] < self.radius[k]:
            return ("B", k)
        if abs(x) > self.rho:
            return ("I",)
        return ("A",)

    def x_of(self, chart, s):
        if chart[0] == "A":
            return s
        if chart[0] == "B":
            return self.curve.roots[chart[1]] + s * s
        return 1.0 / (s * s) if self.curve.degree == 5 else 1.0 / s

    def h2(self, chart, s):
        c = self.curve
        if chart[0] == "A":
            return c.f(s)
        if chart[0] == "B":
            x = c.roots[chart[1]] + s * s
            others = np.delete(c.roots, chart[1])
            return c.lead * np.prod(x[..., None] - others, axis=-1)
        t = s * s if c.degree == 5 else s
        return np.polyval(self.inf_poly[::-1], t)

    def weights(self, chart, s):
        """(dx/ds) (1, x) / y expressed as numerator over h: returns shape (2, ...)."""
        c = self.curve
        if chart[0] == "A":
            return np.stack([np.ones_like(s), s])
        if chart[0] == "B":
            x = c.roots[chart[1]] + s * s
            return np.stack([2 * np.ones_like(s), 2 * x])
        if c.degree == 5:
            return np.stack([-2 * s * s, -2 * np.ones_like(s)])
        return np.stack([-s, -np.ones_like(s)])

    def y_of(self, chart, s, h):
        if chart[0] == "A":
            return h
        if chart[0] == "B":
            return s * h
        if s == 0:
            return None
        return h / s ** 5 if self.curve.degree == 5 else h / s ** 3

    def enter(self, chart, x, y):
        """Chart parameter and h for the affine point (x, y)."""
        if chart[0] == "A":
            return x, y
        if chart[0] == "B":
            s = np.sqrt(x - self.curve.roots[chart[1]])
            if s == 0:
                return s, np.sqrt(self.h2(chart, s))
            return s, y / s
        if self.curve.degree == 5:
            s = np.sqrt(1.0 / x)
            return s, y * s ** 5
        s = 1.0 / x
        return s, y * s ** 3

    def infinity_h(self, branch=0):
        h = np.sqrt(complex(self.inf_poly[0]))
        return -h if (self.curve.degree == 6 and branch) else h

    def point_param(self, chart, p: CurvePoint, near=None):
        """Parameter and h of p in chart; for two-valued params pick the one nearer ``near``."""
        if p.is_infinite:
            return 0j, self.infinity_h(p.branch)
        s, h = self.enter(chart, p.x, p.y)
        two_valued = chart[0] == "B" or (chart[0] == "I" and self.curve.degree == 5)
        if two_valued and near is not None and (np.conj(near) * s).real < 0:
            s, h = -s, -h
        return s, h

    def to_point(self, chart, s, h) -> CurvePoint:
        if chart[0] == "I" and s == 0:
            if self.curve.degree == 5:
                return CurvePoint.infinity()
            return CurvePoint.infinity(0 if abs(h - self.infinity_h(0)) < abs(h - self.infinity_h(1)) else 1)
        return CurvePoint(complex(self.x_of(chart, s)), complex(self.y_of(chart, s, h)))

    # integration --------------------------------------------------------
    def leg(self, chart, s0, s1, h0, tol=None):
        """Integral of (dx/y, x dx/y) along the straight chart segment s0 -> s1.

        Returns (integral (2,), h at s1).
        """
        tol = self.tol if tol is None else tol
        if s0 == s1:
            return np.zeros(2, dtype=complex), h0
        ds = s1 - s0

        def run(n):
            u, w = _gauss01(n)
            s = np.concatenate((s0 + ds * u, [s1]))
            h = _continue_sqrt(self.h2(chart, s), h0)
            num = self.weights(chart, s[:-1])
            val = ds * (num / h[:-1]) @ w
            return val, h[-1]

        (val, h1), _ = _adaptive(run, tol)
        return val, h1


@dataclass
class PeriodData:
    curve: CurveSpec
    omega: np.ndarray
    a_periods: np.ndarray
    b_periods: np.ndarray
    delta: tuple = ((0.5, 0.5), (0.5, 0.5))
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.omega = np.asarray(self.omega, dtype=complex)
        self.a_periods = np.asarray(self.a_periods, dtype=complex)
        self.b_periods = np.asarray(self.b_periods, dtype=complex)
        self.pa_inv = np.linalg.inv(self.a_periods)
        self.charts = Charts(self.curve)
        self._eta_offset = None

    @property
    def delta_arrays(self):
        return np.array(self.delta[0], dtype=float), np.array(self.delta[1], dtype=float)

    @property
    def lattice_basis(self) -> np.ndarray:
        """Columns e1, e2, Omega e1, Omega e2 of the period lattice."""
        return np.hstack([np.eye(2), self.omega])

    def lattice_coords(self, z):
        z = np.asarray(z, dtype=complex)
        t2 = np.linalg.solve(self.omega.imag, z.imag.reshape(-1, 2).T).T
        t1 = z.real.reshape(-1, 2) - t2 @ self.omega.real.T
        return np.hstack([t1, t2]).reshape(z.shape[:-1] + (4,))

    def from_coords(self, t):
        t = np.asarray(t, dtype=float)
        return t[..., :2] + t[..., 2:] @ self.omega.T

    def reduce(self, z):
        """Representative with lattice coordinates in [-1/2, 1/2)."""
        z = np.asarray(z, dtype=complex)
        for _ in range(2):
            t = self.lattice_coords(z)
            n = np.floor(t + 0.5)
            z = z - self.from_coords(n)
            t = self.lattice_coords(z)
            if np.all(np.abs(t) <= 0.5 + 1e-12):
                break
        return z

    def to_json(self) -> dict:
        cx = lambda m: [[[float(v.real), float(v.imag)] for v in row] for row in np.asarray(m)]
        return {"curve": self.curve.to_json(), "omega": cx(self.omega),
                "a_periods": cx(self.a_periods), "b_periods": cx(self.b_periods),
                "delta": [list(self.delta[0]), list(self.delta[1])],
                "metadata": self.metadata}

    @classmethod
    def from_json(cls, data) -> "PeriodData":
        cm = lambda m: np.array([[complex(*v) for v in row] for row in m])
        return cls(CurveSpec.from_json(data["curve"]), cm(data["omega"]), cm(data["a_periods"]),
                   cm(data["b_periods"]), tuple(tuple(d) for d in data["delta"]),
                   data.get("metadata", {}))


# ---------------------------------------------------------------- periods

def _segment_periods(curve: CurveSpec, i: int, tol: float):
    """2 * integral of (dx/y, x dx/y) over [e_i, e_{i+1}], one lift."""
    e = curve.roots
    a, b = e[i], e[i + 1]
    others = np.delete(e, [i, i + 1])

    def run(n):
        u, w = _gauss01(n)
        x = a + (b - a) * (1 - np.cos(np.pi * u)) / 2
        h2 = -curve.lead * np.prod(x[:, None] - others, axis=1)
        h = _continue_sqrt(h2, np.sqrt(h2[0]))
        val = 2 * np.pi * np.array([(1 / h) @ w, (x / h) @ w])
        return val, None

    (val, _), n = _adaptive(run, tol, start=16)
    return val, n


def _choose_basis(cycles):
    """Sign choice on the chain c1..c4 giving a symplectic basis.

    a1 = c1, a2 = c1 + c3, b1 = c2, b2 = c4 is symplectic once consecutive
    chain cycles meet with intersection number +1; the right signs are those
    for which Omega = A^-1 B is symmetric with positive definite imaginary part.
    """
    best = None
    for bits in range(16):
        s = np.array([1 - 2 * ((bits >> k) & 1) for k in range(4)])
        c = cycles * s
        A = np.column_stack([c[:, 0], c[:, 0] + c[:, 2]])
        B = np.column_stack([c[:, 1], c[:, 3]])
        om = np.linalg.solve(A, B)
        asym = np.linalg.norm(om - om.T) / np.linalg.norm(om)
        lam = np.linalg.eigvalsh(((om + om.T) / 2).imag).min()
        if lam > 0 and (best is None or asym < best[0]):
            best = (asym, A, B, om, bits)
    if best is None:
        raise IllConditionedPeriods("no sign choice gives Im Omega > 0")
    return best


def compute_periods(curve: CurveSpec, precision_target: float = DEFAULT_PRECISION,
                    identify_delta: bool = True) -> PeriodData:
    cols, orders = [], []
    for i in range(4):
        val, n = _segment_periods(curve, i, precision_target)
        cols.append(val)
        orders.append(n)
    cycles = np.column_stack(cols)
    asym, A, B, om, bits = _choose_basis(cycles)
    if np.linalg.cond(A) > 1e8:
        raise IllConditionedPeriods(f"cond(A) = {np.linalg.cond(A):.2e}")
    om = (om + om.T) / 2
    meta = {"quadrature_orders": orders, "sign_bits": bits, "asymmetry": float(asym),
            "precision_target": precision_target, "level_shift": "sigma/n + delta1, n*delta2"}
    pd = PeriodData(curve, om, A, B, metadata=meta)
    if identify_delta:
        pd.delta, pd.metadata["delta_margin"] = identify_odd_characteristic(pd)
    return pd


# ------------------------------------------------------------- Abel-Jacobi

def _seg_distance(p, a, b):
    d = b - a
    if d == 0:
        return abs(p - a), 0.0
    t = float(np.clip(((p - a) * np.conj(d)).real / abs(d) ** 2, 0, 1))
    return abs(a + t * d - p), t


def _unit(z, fallback=1.0 + 0j):
    return z / abs(z) if abs(z) > 0 else fallback


class AbelJacobi:
    """Unnormalized integrals of (dx/y, x dx/y) from a finite Weierstrass point."""

    def __init__(self, charts: Charts, base_index: int):
        self.charts = charts
        self.base = base_index

    def _polyline(self, x1, x2, depth=0):
        ch = self.charts
        worst = None
        for k, e in enumerate(ch.curve.roots):
            if min(abs(x1 - e), abs(x2 - e)) < ch.radius[k]:
                continue  # endpoint sits on this chart's rim, leaving radially
            d, t = _seg_distance(e, x1, x2)
            if d < 0.8 * ch.radius[k] and (worst is None or d / ch.radius[k] < worst[0]):
                worst = (d / ch.radius[k], k, t)
        if worst is None:
            return [x1, x2]
        if depth > 8:
            raise PathThroughBranchPoint("could not route around branch points")
        _, k, t = worst
        e = ch.curve.roots[k]
        foot = x1 + t * (x2 - x1)
        if abs(foot - e) > 0.05 * ch.radius[k]:
            n = _unit(foot - e)
        else:  # segment runs straight through e, sidestep perpendicular to it
            n = _unit(1j * (x2 - x1))
        w = e + 1.2 * ch.radius[k] * n
        left = self._polyline(x1, w, depth + 1)
        right = self._polyline(w, x2, depth + 1)
        return left + right[1:]

    def integrate(self, p: CurvePoint, waypoint=None):
        """Integral from the base Weierstrass point to p along a chart path.

        ``waypoint`` forces an extra affine vertex (used to test path independence).
        """
        ch = self.charts
        c = ch.curve
        e = c.roots[self.base]
        home = ("B", self.base)
        target = ch.region(p.x)
        h_start = np.sqrt(complex(ch.h2(home, 0j)))
        if waypoint is not None:
            k = int(np.argmin(np.abs(c.roots - waypoint)))
            if abs(waypoint - c.roots[k]) < 1.2 * ch.radius[k]:
                waypoint = c.roots[k] + 1.2 * ch.radius[k] * _unit(waypoint - c.roots[k])

        if target == home and waypoint is None:
            s_p, h_p = ch.point_param(home, p)
            val, h_end = ch.leg(home, 0j, s_p, h_start)
            return self._orient(val, h_end, h_p)

        if target[0] == "B":
            ek = c.roots[target[1]]
            prev = waypoint if waypoint is not None else e
            x2 = ek + 0.9 * ch.radius[target[1]] * _unit(prev - ek)
        elif target[0] == "I":
            x2 = ch.rho * _unit(p.x if p.x is not None else (e if e != 0 else 1.0))
        else:
            x2 = p.x
        aim = waypoint if waypoint is not None else x2
        x1 = e + 0.9 * ch.radius[self.base] * _unit(aim - e)

        total = np.zeros(2, dtype=complex)
        s1 = np.sqrt(x1 - e)
        val, h = ch.leg(home, 0j, s1, h_start)
        total += val
        y = s1 * h
        verts = ([x1, waypoint, x2] if waypoint is not None else [x1, x2])
        route = [verts[0]]
        for a, b in zip(verts[:-1], verts[1:]):
            route += self._polyline(a, b)[1:]
        for a, b in zip(route[:-1], route[1:]):
            val, y = ch.leg(("A",), a, b, y)
            total += val
        if target[0] == "A":
            return self._orient(total, y, p.y)
        s2, h2 = ch.enter(target, x2, y)
        s_p, h_p = ch.point_param(target, p, near=s2)
        val, h_end = ch.leg(target, s2, s_p, h2)
        total += val
        return self._orient(total, h_end, h_p)

    @staticmethod
    def _orient(val, h_end, h_p):
        # reflecting the whole path by the involution negates the integral
        # and lands on the other lift, since the base point is fixed
        if h_p is not None and abs(h_end + h_p) < abs(h_end - h_p):
            return -val
        return val


def _base_index(curve: CurveSpec) -> int:
    return 0 if curve.eta_is_infinite else curve.eta_index


def _aj_engine(periods: PeriodData) -> AbelJacobi:
    eng = getattr(periods, "_aj", None)
    if eng is None:
        eng = AbelJacobi(periods.charts, _base_index(periods.curve))
        periods._aj = eng
    return eng


def _eta_offset(periods: PeriodData):
    """Normalized integral from the integration base to eta (nonzero only for eta = infinity)."""
    if periods._eta_offset is None:
        if periods.curve.eta_is_infinite:
            raw = _aj_engine(periods).integrate(CurvePoint.infinity())
            periods._eta_offset = periods.pa_inv @ raw
        else:
            periods._eta_offset = np.zeros(2, dtype=complex)
    return periods._eta_offset


def abel_jacobi_unreduced(periods: PeriodData, p: CurvePoint, waypoint=None) -> np.ndarray:
    if not periods.curve.on_curve(p):
        raise ValueError("point is not on the curve")
    raw = _aj_engine(periods).integrate(p, waypoint)
    return periods.pa_inv @ raw - _eta_offset(periods)


def abel_jacobi(curve: CurveSpec, periods: PeriodData, p: CurvePoint):
    """alpha(p) = p - eta as a JacobianPoint."""
    from .jacobian import JacobianPoint
    if periods.curve is not curve and periods.curve.digest() != curve.digest():
        raise ValueError("period data belongs to another curve")
    return JacobianPoint(periods.reduce(abel_jacobi_unreduced(periods, p)), periods)


# --------------------------------------------------------------- delta

def sample_curve_points(curve: CurveSpec, n: int, seed: int = 0) -> list[CurvePoint]:
    """Deterministic spread of affine points over both sheets."""
    from scipy.stats import qmc
    u = qmc.Halton(d=3, scramble=True, seed=seed).random(n)
    r = 1.6 * max(curve.max_modulus, 1e-3) * np.sqrt(u[:, 0])
    x = r * np.exp(2j * np.pi * u[:, 1])
    return [curve.lift(xx, int(s > 0.5)) for xx, s in zip(x, u[:, 2])]


def theta_scale(periods: PeriodData, char) -> float:
    """Median normalized |theta[char]| over a fixed sample of the fundamental cell."""
    rng = np.random.default_rng(12345)
    z = periods.from_coords(rng.random((64, 4)) - 0.5)
    a, b = np.atleast_2d(char[0]), np.atleast_2d(char[1])
    vals = np.abs(theta_batch(a, b, z, periods.omega)[0, :, 0]) * gaussian_weight(z, periods.omega)
    return float(np.median(vals))


def identify_odd_characteristic(periods: PeriodData, n_samples: int = 20):
    pts = sample_curve_points(periods.curve, n_samples, seed=7)
    z = np.array([periods.reduce(abel_jacobi_unreduced(periods, p)) for p in pts])
    w = gaussian_weight(z, periods.omega)
    scores = []
    for ch in odd_characteristics():
        a, b = np.array([ch.a]), np.array([ch.b])
        v = np.abs(theta_batch(a, b, z, periods.omega)[0, :, 0]) * w
        scores.append((float(v.max()) / theta_scale(periods, (a, b)), ch))
    scores.sort(key=lambda t: t[0])
    best = scores[0][1]
    margin = scores[1][0] / max(scores[0][0], 1e-300)
    return (tuple(best.a), tuple(best.b)), float(margin)


def theta_constants(periods: PeriodData):
    """|theta[c](0)| for the 6 odd and 10 even half characteristics."""
    zero = np.zeros((1, 2), dtype=complex)
    odd = [abs(theta_batch([c.a], [c.b], zero, periods.omega)[0, 0, 0]) for c in odd_characteristics()]
    even = [abs(theta_batch([c.a], [c.b], zero, periods.omega)[0, 0, 0]) for c in even_characteristics()]
    return np.array(odd), np.array(even)


# ------------------------------------------------------------- caching

def load_or_compute(curve: CurveSpec, precision_target=DEFAULT_PRECISION, cache_path=None) -> PeriodData:
    """compute_periods with an optional JSON cache keyed by curve and precision."""
    import hashlib
    key = hashlib.sha256(f"{curve.digest()}:{precision_target!r}".encode()).hexdigest()
    if cache_path is not None:
        try:
            with open(cache_path) as fh:
                data = json.load(fh)
            if data.get("key") == key:
                return PeriodData.from_json(data["periods"])
        except (OSError, ValueError, KeyError):
            pass
    pd = compute_periods(curve, precision_target)
    if cache_path is not None:
        with open(cache_path, "w") as fh:
            json.dump({"key": key, "periods": pd.to_json()}, fh, indent=1)
    return pd
