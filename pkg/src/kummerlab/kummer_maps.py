"""Two projective models of Kum_2(A) and the maps between them."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coble_duality import EmbeddingContext, dlt_projective_map, iota_splitting, sobol_points
from .errors import (EmptyIntersection, ExpansionResidualTooLarge, IndeterminacyPoint,
                     OnContractedLocus, SumNotZero, UnexpectedDimension)
from .jacobian import (JacobianPoint, NonReduced, Reduced, flat_direction, random_point, tau,
                       zero)
from .periods import sample_curve_points
from .proj_linalg import (Subspace, fit_hypersurface, fs_distance, intersect, normalize,
                          point_subspace_distance, span)
from .riemann_theta import level_basis, theta_batch

POINT_TOL = 1e-6  # smallest-singular-value cutoff for span intersections
EXPANSION_LIMIT = 1e-5


# ---------------------------------------------------------------- triples

@dataclass(frozen=True, eq=False)
class KummerTriple:
    """Length-three subscheme of A with sum zero.

    ``points`` lists the support with multiplicity; when the first two agree,
    ``v`` is the tangent direction [v0 : v1] there.
    """

    points: tuple
    v: np.ndarray | None = None

    @property
    def periods(self):
        return self.points[0].periods

    @property
    def is_reduced(self):
        return self.v is None

    def sum(self) -> JacobianPoint:
        a, b, c = self.points
        return a + b + c

    def pairs(self):
        """The length-two subschemes it contains."""
        a, b, c = self.points
        if self.v is None:
            return [Reduced(a, b), Reduced(a, c), Reduced(b, c)]
        return [NonReduced(a, self.v), Reduced(a, c)]

    def translate(self, e):
        return KummerTriple(tuple(p + e for p in self.points), self.v)


def reduced_triple(a, b, c=None) -> KummerTriple:
    if c is None:
        c = -(a + b)
    return KummerTriple((a, b, c))


def tangent_triple(a, v, c=None) -> KummerTriple:
    if c is None:
        c = -(a + a)
    return KummerTriple((a, a, c), np.asarray(v, dtype=complex))


def random_triple(periods, rng, min_sep=1e-2) -> KummerTriple:
    while True:
        a, b = random_point(periods, rng), random_point(periods, rng)
        xi = reduced_triple(a, b)
        p = xi.points
        if min(p[0].distance(p[1]), p[0].distance(p[2]), p[1].distance(p[2])) > min_sep:
            return xi


def contracted_triple(periods, rng):
    """A triple inside one translate Theta_e, together with e."""
    from .jacobian import alpha
    pts = sample_curve_points(periods.curve, 3, seed=int(rng.integers(1 << 30)))
    al = [alpha(periods, p) for p in pts]
    e = JacobianPoint(-(al[0].z + al[1].z + al[2].z) / 3, periods)
    return KummerTriple(tuple(x + e for x in al)), e


# ---------------------------------------------------- theta products

@dataclass
class DivisorClassVector:
    n: int
    coeffs: np.ndarray
    residual: float


def _exact_sum_zero(points):
    """Complex representatives summing to exactly zero (not just modulo the lattice)."""
    pd = points[0].periods
    s = points[0]
    for p in points[1:]:
        s = s + p
    if s.distance(zero(pd)) > 1e-8:
        raise SumNotZero(f"points sum to {s!r}")
    zs = [p.z for p in points[:-1]]
    return zs + [-np.sum(zs, axis=0)]


def _product_section(periods, reps, z):
    a, b = periods.delta_arrays
    vals = np.ones(z.shape[0], dtype=complex)
    for r in reps:
        vals = vals * theta_batch(a[None], b[None], z - r, periods.omega)[0, :, 0]
    return vals


def phi_mu_theta(ctx: EmbeddingContext, points, n=None) -> DivisorClassVector:
    """Theta_{a_0} + ... + Theta_{a_n} as a point of |(n+1) Theta| (level-(n+1) coefficients)."""
    points = list(points.points if isinstance(points, KummerTriple) else points)
    if n is None:
        n = len(points) - 1
    if len(points) != n + 1:
        raise ValueError(f"need {n + 1} points for n = {n}")
    pd = ctx.periods
    reps = _exact_sum_zero(points)
    N = n + 1
    rng = np.random.default_rng(1000 + N)
    K = 3 * N * N
    z = pd.from_coords(rng.random((K + 20, 4)) - 0.5)
    V = level_basis(N, z, pd.omega, pd.delta)
    g = _product_section(pd, reps, z)
    # rows scaled so every sample point carries comparable weight
    w = 1 / np.linalg.norm(V, axis=1)
    Vw, gw = V * w[:, None], g * w
    c, *_ = np.linalg.lstsq(Vw[:K], gw[:K], rcond=None)
    res = float(np.max(np.abs(Vw[K:] @ c - gw[K:])) / np.linalg.norm(c))
    if res > EXPANSION_LIMIT:
        raise ExpansionResidualTooLarge(f"held-out residual {res:.2e}")
    return DivisorClassVector(n, normalize(c), res)


# ------------------------------------------------------------ secant lines

def secant_line(ctx: EmbeddingContext, zeta) -> Subspace:
    """The line l(zeta) in the level-3 space spanned by a length-two scheme."""
    pd = ctx.periods
    if isinstance(zeta, Reduced):
        return span([ctx.phi3(zeta.a), ctx.phi3(zeta.b)])
    w = flat_direction(pd, zeta.v)
    jets = level_basis(3, zeta.a.z, pd.omega, pd.delta, jets=((0, 0), (1, 0), (0, 1)))
    val, d1, d2 = jets
    return span([val, w[0] * d1 + w[1] * d2], rank_tol=1e-12)


def _single_point(S: Subspace, what: str):
    if S.dim < 0:
        raise EmptyIntersection(f"{what} is empty (smallest singular value {S.singular_values[0]:.2e})")
    if S.dim > 0:
        raise UnexpectedDimension(f"{what} has dimension {S.dim}")
    return S.point()


def phi_D_spans(ctx, xi: KummerTriple):
    """Reduced triple: intersection of the three translate spans."""
    S = intersect([ctx.translate_span(p) for p in xi.points], rank_tol=POINT_TOL)
    return _single_point(S, "intersection of translate spans"), S


def phi_D_secants(ctx, xi: KummerTriple):
    """Intersection of the secant lines l(tau(zeta)) over two subschemes zeta of xi."""
    pairs = xi.pairs()[:2]
    lines = [secant_line(ctx, tau(z)) for z in pairs]
    S = intersect(lines, rank_tol=POINT_TOL)
    return _single_point(S, "intersection of secant lines"), S


def phi_D(ctx: EmbeddingContext, xi: KummerTriple, cross_check=True):
    if not xi.is_reduced:
        return phi_D_secants(ctx, xi)[0]
    if xi.sum().distance(zero(ctx.periods)) > 1e-6:
        # the spans still meet in nothing, but report it the same way
        p, _ = phi_D_spans(ctx, xi)
        return p
    p, _ = phi_D_spans(ctx, xi)
    if cross_check:
        q, _ = phi_D_secants(ctx, xi)
        gap = fs_distance(p, q)
        if gap > 1e-6:
            raise UnexpectedDimension(f"span and secant routes disagree by {gap:.2e}")
    return p


def verify_duality(ctx: EmbeddingContext, xi: KummerTriple) -> float:
    """Fubini-Study gap between D(phi_D(xi)) and the theta-product coefficients of xi."""
    p = phi_D(ctx, xi)
    try:
        q = ctx.coble_polar(p)
    except IndeterminacyPoint as exc:
        raise OnContractedLocus(str(exc)) from None
    return fs_distance(q, phi_mu_theta(ctx, xi, 2).coeffs)


def distance_to_A(ctx: EmbeddingContext, p) -> float:
    """Size of the Coble gradient at p, which vanishes exactly on phi3(A)."""
    return float(np.linalg.norm(ctx.coble().gradient(normalize(p))))


# ------------------------------------------------------------- K3 models

def _k3_raw(ctx, a: JacobianPoint):
    if (a + a).distance(zero(ctx.periods)) < 1e-6:
        raise ValueError("a is 2-torsion")
    z = tau(Reduced(a, -a))
    p_minus = ctx.phi2(z.support[0])
    p_plus = phi_mu_theta(ctx, [a, -a], 1)
    return p_minus, p_plus, z


def k3_coordinate_change(ctx: EmbeddingContext) -> np.ndarray:
    """The projective change G with G . P(p_minus) = p_plus, fitted from 6 samples and frozen."""
    G = getattr(ctx, "_k3_G", None)
    if G is None:
        pts = sobol_points(ctx.periods, 6, ctx.seed + 3)
        P, Q = [], []
        for a in pts:
            pm, pp, _ = _k3_raw(ctx, a)
            P.append(ctx.kummer_polar(pm))
            Q.append(pp.coeffs)
        G, _ = dlt_projective_map(np.array(P).T, np.array(Q).T)
        ctx._k3_G = G
    return G


def k3_models(ctx: EmbeddingContext, a: JacobianPoint):
    """(phi2 of a support point of tau(a, -a), Theta_a + Theta_{-a} in |2 Theta|)."""
    p_minus, p_plus, _ = _k3_raw(ctx, a)
    return p_minus, p_plus


def k3_gap(ctx, a) -> float:
    p_minus, p_plus = k3_models(ctx, a)
    G = k3_coordinate_change(ctx)
    return fs_distance(G @ ctx.kummer_polar(p_minus), p_plus.coeffs)


# ---------------------------------------------------------------- Weddle

def weddle_samples(ctx: EmbeddingContext, n, rng):
    """phi_D({b, -b, 0}) for random b, with distance to P3_0 and coordinates there."""
    pd = ctx.periods
    O, P3, _ = iota_splitting(ctx, zero(pd))
    out = []
    while len(out) < n:
        b = random_point(pd, rng)
        if (b + b).distance(zero(pd)) < 1e-2 or b.distance(zero(pd)) < 1e-2:
            continue
        p = phi_D(ctx, reduced_triple(b, -b, zero(pd)), cross_check=False)
        out.append((b, p, point_subspace_distance(p, P3), P3.basis.conj().T @ p))
    return out, P3


def weddle_fit(ctx: EmbeddingContext, n_samples=70, seed=None):
    rng = np.random.default_rng(ctx.seed + 4 if seed is None else seed)
    samples, P3 = weddle_samples(ctx, n_samples, rng)
    form, gap = fit_hypersurface([s[3] for s in samples], 4)
    info = {"max_distance_to_P3": max(s[2] for s in samples), "P3": P3}
    return form, gap, info
