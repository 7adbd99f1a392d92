"""Registry of numerical checks and the report they produce.

Every record satisfies pass == (worst_gap < threshold).  Lower bounds are
turned into upper bounds by reporting reciprocals, and verdict checks report
the number of mismatches against a threshold of 0.5.
"""

from __future__ import annotations

import time
import zlib
from dataclasses import dataclass

import numpy as np

from . import __version__
from .coble_duality import (EmbeddingContext, coble_invariance_gap, heisenberg_oracle,
                            torsion_count_on_translate, matrix_distance, sobol_points)
from .curve_model import involute
from .errors import (ClassificationMismatch, IndeterminacyPoint, KummerLabError,
                     NullspaceNotOneDimensional)
from .jacobian import (NonReduced, Reduced, alpha, flat_direction, on_theta, point_from_coords,
                       random_point, scheme_distance, scheme_sum, tangent_on_theta, tau,
                       theta_residual, torsion_points)
from .kummer_maps import (contracted_triple, k3_gap, phi_D, phi_D_secants, phi_D_spans,
                          phi_mu_theta, random_triple, secant_line, tangent_triple,
                          verify_duality, weddle_samples)
from .periods import PeriodData, abel_jacobi_unreduced, sample_curve_points, theta_constants
from .proj_linalg import fit_hypersurface, fs_distance, intersect, normalize
from .riemann_theta import half_characteristics, level_basis, theta_batch
from .secant_terracini import (classify_meeting_secants, fiber_over_N, meeting_tangents_pair,
                               nonseparated_four, points_scheme, quartic_tangent, separates,
                               terracini_double_point, terracini_two_points)

REPORT_SCHEMA = "kummerlab.verify/1"
GROUPS = ("foundations", "theoremA", "theoremB", "theoremC", "kummerK3", "appendix", "weddle")


@dataclass
class Check:
    name: str
    groups: tuple
    samples: int
    threshold: float
    fn: object
    doc: str = ""


REGISTRY: list[Check] = []


def check(name, groups, samples, threshold):
    def deco(fn):
        REGISTRY.append(Check(name, tuple(groups), samples, threshold, fn, (fn.__doc__ or "").strip()))
        return fn
    return deco


class Env:
    def __init__(self, periods: PeriodData, seed=42):
        self.periods = periods
        self.seed = seed
        self._ctx = None

    @property
    def ctx(self) -> EmbeddingContext:
        if self._ctx is None:
            self._ctx = EmbeddingContext(self.periods, self.seed)
        return self._ctx


def _random_direction(rng):
    return np.array([1.0, complex(*rng.normal(size=2))])


def _rand_z(pd, rng, n):
    return pd.from_coords(rng.random((n, 4)) - 0.5)


# ------------------------------------------------------------ foundations

@check("periods.symmetry", ["foundations"], 1, 1e-9)
def _(env, n, rng):
    """Omega - Omega^T before symmetrization."""
    return float(env.periods.metadata.get("asymmetry", np.abs(env.periods.omega - env.periods.omega.T).max()))


@check("periods.im_positive", ["foundations"], 1, 1e8)
def _(env, n, rng):
    """Reciprocal of the smallest eigenvalue of Im Omega."""
    lam = float(np.linalg.eigvalsh(env.periods.omega.imag).min())
    return 1 / lam if lam > 0 else float("inf")


@check("periods.odd_even_constants", ["foundations"], 16, 1e-8)
def _(env, n, rng):
    """Largest odd theta constant over the smallest even one."""
    odd, even = theta_constants(env.periods)
    return float(odd.max() / even.min())


@check("theta.quasi_periodicity", ["foundations"], 50, 1e-8)
def _(env, n, rng):
    """Relative error of the translation law under lattice vectors."""
    om = env.periods.omega
    chars = half_characteristics()
    worst = 0.0
    for i in range(n):
        ch = chars[i % len(chars)]
        a, b = np.array([ch.a]), np.array([ch.b])
        if i % 3 == 0:  # a few third characteristics too
            a, b = np.array([[1 / 3, 2 / 3]]), np.array([[0.0, 1 / 3]])
        z = _rand_z(env.periods, rng, 1)[0]
        m = rng.integers(-1, 2, 2)
        k = rng.integers(-1, 2, 2)
        lhs = theta_batch(a, b, [z + m + om @ k], om)[0, 0, 0]
        fac = np.exp(2j * np.pi * (a[0] @ m - b[0] @ k) - 1j * np.pi * k @ om @ k - 2j * np.pi * k @ z)
        rhs = fac * theta_batch(a, b, [z], om)[0, 0, 0]
        worst = max(worst, abs(lhs - rhs) / max(abs(lhs), abs(rhs)))
    return worst


@check("theta.parity", ["foundations"], 50, 1e-8)
def _(env, n, rng):
    """theta[c](-z) = (-1)^parity theta[c](z) for half characteristics."""
    om = env.periods.omega
    worst = 0.0
    chars = half_characteristics()
    for i in range(n):
        ch = chars[i % 16]
        z = _rand_z(env.periods, rng, 1)
        v = theta_batch([ch.a], [ch.b], np.vstack([z, -z]), om)[0, :, 0]
        sgn = -1 if ch.parity else 1
        worst = max(worst, abs(v[1] - sgn * v[0]) / max(abs(v).max(), 1e-300) if abs(v).max() > 1e-12 else 0.0)
    return worst


@check("theta.jets_vs_differences", ["foundations"], 50, 1e-6)
def _(env, n, rng):
    """First and second partials against a five-point difference stencil."""
    om = env.periods.omega
    a, b = env.periods.delta_arrays
    h = 1e-3
    st = np.array([-2, -1, 1, 2]) * h
    c1 = np.array([1, -8, 8, -1]) / (12 * h)
    worst = 0.0
    for _ in range(n):
        z = _rand_z(env.periods, rng, 1)[0]
        jets = theta_batch(a[None], b[None], [z], om, jets=((0, 0), (1, 0), (0, 1), (1, 1)))[:, 0, 0]
        scale = np.abs(jets[1:3]).max() + abs(jets[0])
        for k in range(2):
            e = np.eye(2)[k]
            vals = theta_batch(a[None], b[None], z + st[:, None] * e, om)[0, :, 0]
            worst = max(worst, abs(vals @ c1 - jets[1 + k]) / scale)
        # mixed partial through the first partial in z2
        d2 = theta_batch(a[None], b[None], z + st[:, None] * np.eye(2)[0], om, jets=((0, 1),))[0, :, 0]
        worst = max(worst, abs(d2 @ c1 - jets[3]) / (abs(jets[3]) + 2 * np.pi * scale))
    return worst


@check("abel_jacobi.involution", ["foundations"], 50, 1e-7)
def _(env, n, rng):
    """alpha(x) + alpha(iota x), the second integral taken along a different path."""
    pd = env.periods
    worst = 0.0
    for p in sample_curve_points(pd.curve, n, seed=int(rng.integers(1 << 30))):
        w = complex(*rng.normal(size=2)) * pd.charts.rho / 2
        z = abel_jacobi_unreduced(pd, p) + abel_jacobi_unreduced(pd, involute(pd.curve, p), waypoint=w)
        worst = max(worst, float(np.linalg.norm(pd.reduce(z))))
    return worst


@check("abel_jacobi.on_theta", ["foundations"], 50, 1e-7)
def _(env, n, rng):
    """Normalized |theta[delta](alpha(x))| (relative to the median theta scale)."""
    pd = env.periods
    pts = sample_curve_points(pd.curve, n, seed=int(rng.integers(1 << 30)))
    return float(max(theta_residual(pd, alpha(pd, p).z)[0] for p in pts))


def _generators(pd):
    T = {tuple(np.rint(3 * pd.lattice_coords(e.z)).astype(int) % 3): e for e in torsion_points(pd, 3)}
    keys = [(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1),
            (1, 1, 0, 0), (0, 0, 1, 1), (1, 0, 1, 0), (0, 1, 0, 1)]
    return [T[k] for k in keys]


@check("heisenberg.translation", ["foundations"], 20, 1e-7)
def _(env, n, rng):
    """phi3(a + e) against M_e phi3(a) on fresh samples, 8 generators."""
    ctx = env.ctx
    fresh = sobol_points(env.periods, n, int(rng.integers(1 << 30)))
    return max(fs_distance(ctx.heisenberg(e) @ ctx.phi3(p), ctx.phi3(p + e))
               for e in _generators(env.periods) for p in fresh)


@check("heisenberg.group_law", ["foundations"], 28, 1e-6)
def _(env, n, rng):
    """M_e M_f against M_(e+f) for pairs of generators."""
    ctx = env.ctx
    g = _generators(env.periods)
    pairs = [(i, j) for i in range(8) for j in range(i + 1, 8)][:n]
    return max(matrix_distance(ctx.heisenberg(g[i]) @ ctx.heisenberg(g[j]), ctx.heisenberg(g[i] + g[j]))
               for i, j in pairs)


@check("heisenberg.closed_form", ["foundations"], 80, 1e-7)
def _(env, n, rng):
    """Fitted M_e against the explicit index-shift-and-character matrix."""
    T = torsion_points(env.periods, 3)[1:]
    return max(matrix_distance(env.ctx.heisenberg(e), heisenberg_oracle(env.periods, e)) for e in T[:n])


# ------------------------------------------------------- involution tau

@check("tau.involution_reduced", ["theoremC"], 50, 1e-7)
def _(env, n, rng):
    """tau(tau({a, b})) = {a, b}."""
    pd = env.periods
    worst = 0.0
    for _ in range(n):
        z = Reduced(random_point(pd, rng), random_point(pd, rng))
        worst = max(worst, scheme_distance(tau(tau(z)), z))
    return worst


@check("tau.involution_nonreduced", ["theoremC"], 20, 1e-7)
def _(env, n, rng):
    """tau(tau((a, v))) = (a, v)."""
    pd = env.periods
    worst = 0.0
    for _ in range(n):
        z = NonReduced(random_point(pd, rng), _random_direction(rng))
        worst = max(worst, scheme_distance(tau(tau(z)), z))
    return worst


@check("tau.sum_preserved", ["theoremC"], 30, 1e-7)
def _(env, n, rng):
    """The sum of the support is unchanged by tau."""
    pd = env.periods
    worst = 0.0
    for i in range(n):
        a = random_point(pd, rng)
        z = Reduced(a, random_point(pd, rng)) if i % 3 else NonReduced(a, _random_direction(rng))
        worst = max(worst, scheme_sum(tau(z)).distance(scheme_sum(z)))
    return worst


@check("tau.symmetry", ["theoremC"], 30, 1e-6)
def _(env, n, rng):
    """c in tau(xi) iff xi lies on Theta_c, tested in both directions."""
    pd = env.periods
    worst = 0.0
    for i in range(n):
        if i % 2 == 0:
            xi = Reduced(random_point(pd, rng), random_point(pd, rng))
            for c in tau(xi).support:
                worst = max(worst, tangent_on_theta(c, xi))
        else:
            c = random_point(pd, rng)
            pts = sample_curve_points(pd.curve, 2, seed=int(rng.integers(1 << 30)))
            xi = Reduced(alpha(pd, pts[0]) + c, alpha(pd, pts[1]) + c)
            worst = max(worst, min(c.distance(s) for s in tau(xi).support))
    return worst


@check("tau.E_to_F", ["theoremC"], 20, 1e-6)
def _(env, n, rng):
    """tau((a, v)) is a pair on Theta_a with sum 2a."""
    pd = env.periods
    worst = 0.0
    for _ in range(n):
        a = random_point(pd, rng)
        z = tau(NonReduced(a, _random_direction(rng)))
        worst = max(worst, tangent_on_theta(a, z), scheme_sum(z).distance(a + a))
    return worst


@check("torsion.on_translate", ["theoremC"], 30, 2.5)
def _(env, n, rng):
    """Largest number of 3-torsion points on one translate Theta_a (must be at most 2)."""
    pd = env.periods
    T = torsion_points(pd, 3)
    counts = []
    for i in range(n):
        if i % 3 == 0:
            a = random_point(pd, rng)
        elif i % 3 == 1:  # forces a torsion point onto Theta_a
            p = sample_curve_points(pd.curve, 1, seed=int(rng.integers(1 << 30)))[0]
            a = T[int(rng.integers(81))] - alpha(pd, p)
        else:
            a = T[int(rng.integers(81))]
        counts.append(torsion_count_on_translate(a))
    return float(max(counts))


# ------------------------------------------------------ spans, duality

@check("spans.dimension", ["theoremB"], 20, 1e-8)
def _(env, n, rng):
    """Sixth singular value of the span of Theta_a samples (the span is 4-dimensional)."""
    worst = 0.0
    for _ in range(n):
        S = env.ctx.translate_span(random_point(env.periods, rng))
        sv = S.singular_values
        worst = max(worst, sv[5] / sv[0] if S.dim == 4 else float("inf"))
    return worst


@check("spans.meets_A_in_theta", ["theoremB"], 20, 1.0)
def _(env, n, rng):
    """max(distance of Theta_a points / 1e-6, 1e-3 / distance of other points of A) to the span."""
    pd = env.periods
    a = random_point(pd, rng)
    S = env.ctx.translate_span(a)
    pts = sample_curve_points(pd.curve, n, seed=int(rng.integers(1 << 30)))
    on = max(S.distance_to(env.ctx.phi3(alpha(pd, p) + a)) for p in pts)
    off = min(S.distance_to(env.ctx.phi3(q)) for q in sobol_points(pd, n, int(rng.integers(1 << 30)))
              if not on_theta(a, q, 1e-3))
    return max(on / 1e-6, 1e-3 / off) if off > 0 else float("inf")


@check("spans.pair_is_secant_line", ["theoremB"], 20, 1e-6)
def _(env, n, rng):
    """The spans of Theta_a and Theta_b meet in a line through tau(a, b)."""
    pd = env.periods
    worst = 0.0
    for _ in range(n):
        a, b = random_point(pd, rng), random_point(pd, rng)
        L = intersect([env.ctx.translate_span(a), env.ctx.translate_span(b)], rank_tol=1e-6)
        if L.dim != 1:
            return float("inf")
        worst = max(worst, L.singular_values[1], *[L.distance_to(env.ctx.phi3(w)) for w in tau(Reduced(a, b)).support])
    return worst


@check("spans.triple_point", ["theoremB"], 20, 1e-6)
def _(env, n, rng):
    """Three spans with a + b + c = 0 meet (smallest singular value)."""
    worst = 0.0
    for _ in range(n):
        _, S = phi_D_spans(env.ctx, random_triple(env.periods, rng))
        worst = max(worst, S.singular_values[0])
    return worst


@check("spans.triple_empty", ["theoremB"], 20, 1e3)
def _(env, n, rng):
    """Perturbing c by 0.1 leaves no common point (reciprocal of the smallest singular value)."""
    worst = 0.0
    for _ in range(n):
        a, b, c = random_triple(env.periods, rng).points
        c = point_from_coords(env.periods, env.periods.lattice_coords(c.z) + 0.1 * np.sign(rng.normal(size=4)) / 2)
        S = intersect([env.ctx.translate_span(p) for p in (a, b, c)], rank_tol=1e-6)
        worst = max(worst, 1 / S.singular_values[0])
    return worst


@check("coble.uniqueness", ["theoremB"], 60, 1e-3)
def _(env, n, rng):
    """Reciprocal of the nullspace gap of the cubic fit."""
    return 1 / env.ctx.coble().meta["gap"]


@check("coble.singular_along_A", ["theoremB"], 30, 1e-6)
def _(env, n, rng):
    """Gradient of the cubic at fresh points of A."""
    F = env.ctx.coble()
    return max(float(np.linalg.norm(F.gradient(env.ctx.phi3(p))))
               for p in sobol_points(env.periods, n, int(rng.integers(1 << 30))))


@check("coble.heisenberg_invariant", ["theoremB"], 8, 1e-6)
def _(env, n, rng):
    """F(M_e x) proportional to F(x) for the generators."""
    return max(coble_invariance_gap(env.ctx, e) for e in _generators(env.periods)[:n])


@check("coble.stable_under_resampling", ["theoremB"], 60, 1e-8)
def _(env, n, rng):
    """A second fit from different samples reproduces the coefficients."""
    pts = sobol_points(env.periods, max(n, 40), int(rng.integers(1 << 30)))
    F2, _ = fit_hypersurface([env.ctx.phi3(p) for p in pts], 3, jet_conditions=True)
    return fs_distance(F2.coeffs, env.ctx.coble().coeffs)


@check("duality.polar_of_phi_D", ["theoremB"], 30, 1e-5)
def _(env, n, rng):
    """D(phi_D(xi)) against the theta-product point of xi in |3 Theta|."""
    worst = 0.0
    for _ in range(n):
        worst = max(worst, verify_duality(env.ctx, random_triple(env.periods, rng)))
    return worst


@check("duality.routes_agree", ["theoremB"], 10, 1e-6)
def _(env, n, rng):
    """Span-intersection and secant-line computations of phi_D."""
    worst = 0.0
    for _ in range(n):
        xi = random_triple(env.periods, rng)
        worst = max(worst, fs_distance(phi_D_spans(env.ctx, xi)[0], phi_D_secants(env.ctx, xi)[0]))
    return worst


@check("duality.F_contraction", ["theoremB"], 10, 1e-5)
def _(env, n, rng):
    """Triples inside Theta_e go to phi3(e), where the polar map is undefined."""
    worst = 0.0
    for _ in range(n):
        xi, e = contracted_triple(env.periods, rng)
        p = phi_D(env.ctx, xi, cross_check=False)
        worst = max(worst, fs_distance(p, env.ctx.phi3(e)))
        try:
            env.ctx.coble_polar(p)
            worst = float("inf")
        except IndeterminacyPoint:
            pass
    return worst


@check("duality.tangent_triples", ["theoremB"], 10, 1e-6)
def _(env, n, rng):
    """phi_D((a, v), -2a) lies on l(tau(a, -2a))."""
    worst = 0.0
    for _ in range(n):
        a = random_point(env.periods, rng)
        p = phi_D(env.ctx, tangent_triple(a, _random_direction(rng)))
        worst = max(worst, secant_line(env.ctx, tau(Reduced(a, -(a + a)))).distance_to(p))
    return worst


# ------------------------------------------------------- theta products

def _support_gap(p1, p2):
    """Smallest total support mismatch over matchings of two point lists."""
    from itertools import permutations
    return min(max(x.distance(y) for x, y in zip(p1, perm)) for perm in permutations(p2))


def _injectivity(env, n, rng, k):
    pd = env.periods
    worst = 0.0
    done = 0
    while done < n:
        sets = []
        for _ in range(2):
            pts = [random_point(pd, rng) for _ in range(k)]
            s = pts[0]
            for p in pts[1:]:
                s = s + p
            sets.append(pts + [-s])
        if _support_gap(*sets) <= 1e-2:
            continue
        d = fs_distance(phi_mu_theta(env.ctx, sets[0]).coeffs, phi_mu_theta(env.ctx, sets[1]).coeffs)
        worst = max(worst, 1 / d if d > 0 else float("inf"))
        done += 1
    return worst


@check("theoremA.injective_n2", ["theoremA"], 100, 1e4)
def _(env, n, rng):
    """Reciprocal of the closest pair of images of distinct triples."""
    return _injectivity(env, n, rng, 2)


@check("theoremA.injective_n3", ["theoremA"], 100, 1e4)
def _(env, n, rng):
    """Reciprocal of the closest pair of images of distinct quadruples."""
    return _injectivity(env, n, rng, 3)


@check("theoremA.expansion_residual", ["theoremA"], 20, 1e-7)
def _(env, n, rng):
    """Held-out residual of the theta product expansion (n = 1, 2, 3)."""
    worst = 0.0
    pd = env.periods
    for i in range(n):
        k = 1 + i % 3
        pts = [random_point(pd, rng) for _ in range(k)]
        s = pts[0]
        for p in pts[1:]:
            s = s + p
        worst = max(worst, phi_mu_theta(env.ctx, pts + [-s]).residual)
    return worst


@check("theoremA.symmetric", ["theoremA"], 20, 1e-9)
def _(env, n, rng):
    """Permuting the points leaves the image fixed."""
    worst = 0.0
    for _ in range(n):
        pts = list(random_triple(env.periods, rng).points)
        v1 = phi_mu_theta(env.ctx, pts).coeffs
        v2 = phi_mu_theta(env.ctx, [pts[2], pts[0], pts[1]]).coeffs
        worst = max(worst, fs_distance(v1, v2))
    return worst


# ------------------------------------------------------------- Kummer K3

@check("kummerK3.quartic_uniqueness", ["kummerK3"], 60, 1e-3)
def _(env, n, rng):
    """Reciprocal of the nullspace gap of the quartic fit."""
    return 1 / env.ctx.kummer_quartic().meta["gap"]


@check("kummerK3.quartic_residual", ["kummerK3"], 50, 1e-7)
def _(env, n, rng):
    """Quartic at fresh points phi2(a)."""
    Q = env.ctx.kummer_quartic()
    return max(abs(Q(env.ctx.phi2(p))) for p in sobol_points(env.periods, n, int(rng.integers(1 << 30))))


@check("kummerK3.phi2_even", ["kummerK3"], 50, 1e-8)
def _(env, n, rng):
    """phi2(a) = phi2(-a)."""
    return max(fs_distance(env.ctx.phi2(a), env.ctx.phi2(-a))
               for a in (random_point(env.periods, rng) for _ in range(n)))


@check("kummerK3.polar_triangle", ["kummerK3"], 20, 1e-5)
def _(env, n, rng):
    """G P(phi2(tau(a, -a))) against Theta_a + Theta_-a in |2 Theta|."""
    worst = 0.0
    for _ in range(n):
        a = random_point(env.periods, rng)
        worst = max(worst, k3_gap(env.ctx, a))
    return worst


# --------------------------------------------------------------- Weddle

@check("weddle.quartic", ["weddle", "kummerK3"], 70, 1.0)
def _(env, n, rng):
    """Quartic through phi_D({b, -b, 0}) in P3_0: max(fresh residual / 1e-6, distance to P3_0 / 1e-6, 1e2 / gap)."""
    samples, P3 = weddle_samples(env.ctx, n + 30, rng)
    fit, fresh = samples[:n], samples[n:]
    try:
        F, gap = fit_hypersurface([s[3] for s in fit], 4)
    except NullspaceNotOneDimensional:
        return float("inf")
    res = max(abs(F(normalize(s[3]))) for s in fresh)
    dist = max(s[2] for s in samples)
    return max(res / 1e-6, dist / 1e-6, 1e2 / gap)


# -------------------------------------------------------------- appendix

@check("appendix.meeting_secants", ["appendix"], 60, 0.5)
def _(env, n, rng):
    """Cases where the numerical meeting class differs from the constructed one."""
    pd = env.periods
    T3 = [e for e in torsion_points(pd, 3)][1:]
    bad = 0
    for i in range(n):
        kind = i % 3
        if kind == 0:
            pts = sample_curve_points(pd.curve, 4, seed=int(rng.integers(1 << 30)))
            e = random_point(pd, rng)
            al = [alpha(pd, p) + e for p in pts]
            z1, z2, want = Reduced(al[0], al[1]), Reduced(al[2], al[3]), "MeetOnA"
        elif kind == 1:
            a, b = random_point(pd, rng), random_point(pd, rng)
            sub = (i // 3) % 3
            if sub == 0:
                z1, z2 = Reduced(a, b), Reduced(a, -(a + b))
            elif sub == 1:
                z1, z2 = Reduced(a, -(a + a)), NonReduced(a, _random_direction(rng))
            else:
                t = T3[int(rng.integers(len(T3)))]
                z1, z2 = NonReduced(t, _random_direction(rng)), NonReduced(t, _random_direction(rng))
            want = "MeetOffA"
        else:
            p = [random_point(pd, rng) for _ in range(4)]
            z1, z2, want = Reduced(p[0], p[1]), Reduced(p[2], p[3]), "Disjoint"
        try:
            got = classify_meeting_secants(env.ctx, z1, z2).kind
        except ClassificationMismatch:
            got = None
        bad += got != want
    return float(bad)


@check("appendix.terracini_two_points", ["appendix"], 40, 0.5)
def _(env, n, rng):
    """Verdict mismatches: generic pairs injective, p at a support point or meeting tangents not."""
    pd = env.periods
    ctx = env.ctx
    bad = 0
    for i in range(n):
        if i % 2 == 0:
            b, c = random_point(pd, rng), random_point(pd, rng)
            p = normalize(ctx.phi3(b) + complex(*rng.normal(size=2)) * ctx.phi3(c))
            want = True
        elif i % 4 == 1:
            b, c = random_point(pd, rng), random_point(pd, rng)
            p, want = ctx.phi3(b), False
        else:
            b, c, _, _ = meeting_tangents_pair(pd, rng)
            p = normalize(ctx.phi3(b) + complex(*rng.normal(size=2)) * ctx.phi3(c))
            want = False
        bad += bool(terracini_two_points(ctx, b, c, p)) != want
    return float(bad)


@check("appendix.terracini_double_point", ["appendix"], 40, 0.5)
def _(env, n, rng):
    """Verdict mismatches for tangent vectors: generic injective, p = a or quartic contact not."""
    pd = env.periods
    ctx = env.ctx
    bad = 0
    for i in range(n):
        if i % 2 == 0:
            a, v, want = random_point(pd, rng), _random_direction(rng), True
        elif i % 4 == 1:
            a, v, want = random_point(pd, rng), _random_direction(rng), False
        else:
            a, v, _ = quartic_tangent(pd, rng)
            want = False
        w = flat_direction(pd, v)
        J = level_basis(3, a.z, pd.omega, pd.delta, jets=((0, 0), (1, 0), (0, 1)))
        if i % 4 == 1:
            p = normalize(J[0])
        else:
            p = normalize(J[0] + complex(*rng.normal(size=2)) * (w[0] * J[1] + w[1] * J[2]))
        bad += bool(terracini_double_point(ctx, a, v, p)) != want
    return float(bad)


@check("appendix.four_point_separation", ["appendix"], 20, 0.5)
def _(env, n, rng):
    """Four points alpha_a(x1+..+x4) with sum in |2K - 3a| are not separated, random ones are."""
    pd = env.periods
    bad = 0
    for i in range(n):
        if i % 2 == 0:
            Z, a = nonseparated_four(pd, rng)
            sep = separates(env.ctx, points_scheme(Z))
            # and Theta_a contains all four points
            bad += bool(sep) or not all(on_theta(a, z) for z in Z)
        else:
            Z = [random_point(pd, rng) for _ in range(4)]
            bad += not separates(env.ctx, points_scheme(Z))
    return float(bad)


@check("appendix.fiber_over_N", ["appendix"], 10, 0.5)
def _(env, n, rng):
    """Triples whose phi_D image does not lie on exactly three secant lines."""
    bad = 0
    for _ in range(n):
        try:
            bad += fiber_over_N(env.ctx, random_triple(env.periods, rng), rng=rng) != 3
        except KummerLabError:
            bad += 1
    return float(bad)


# ---------------------------------------------------------------- runner

def select(group: str):
    if group == "all":
        return list(REGISTRY)
    if group not in GROUPS:
        raise ValueError(f"unknown group {group!r}")
    return [c for c in REGISTRY if group in c.groups]


def check_seed(seed: int, name: str) -> int:
    return (seed + zlib.crc32(name.encode())) % (1 << 32)


def run_checks(periods: PeriodData, group="all", seed=42, samples=None, tolerances=None,
               log=None, env=None):
    """Run the selected checks; returns the report dictionary."""
    env = env or Env(periods, seed)
    tolerances = tolerances or {}
    records = []
    for c in select(group):
        n = samples if samples is not None else c.samples
        thr = float(tolerances.get(c.name, c.threshold))
        rng = np.random.default_rng(check_seed(seed, c.name))
        t0 = time.perf_counter()
        err = None
        try:
            gap = float(c.fn(env, n, rng))
        except KummerLabError as exc:
            gap, err = float("inf"), f"{type(exc).__name__}: {exc}"
        rec = {"name": c.name, "groups": list(c.groups), "samples": n,
               "worst_gap": gap if np.isfinite(gap) else None, "threshold": thr,
               "pass": bool(np.isfinite(gap) and gap < thr),
               "wall_time": round(time.perf_counter() - t0, 3)}
        if err:
            rec["error"] = err
        records.append(rec)
        if log:
            log(rec)
    return {"schema": REPORT_SCHEMA, "version": __version__, "curve_hash": periods.curve.digest(),
            "curve": periods.curve.to_json(), "seed": seed, "group": group,
            "tolerances": {c.name: float(tolerances.get(c.name, c.threshold)) for c in select(group)},
            "records": records, "pass": all(r["pass"] for r in records)}
