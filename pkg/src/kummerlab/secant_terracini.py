"""Jet separation, Terracini-type injectivity tests, meeting secants and the fiber over N."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .coble_duality import EmbeddingContext
from .errors import (ClassificationMismatch, GenericityViolation, PointNotOnSecant,
                     PointNotOnTangent, UnexpectedIncidence)
from .jacobian import (JacobianPoint, Reduced, alpha, flat_direction, random_point,
                       tangent_on_theta, tau, zero)
from .kummer_maps import KummerTriple, distance_to_A, phi_D, secant_line
from .periods import sample_curve_points
from .proj_linalg import (fs_distance, intersect, normalize, point_subspace_distance, span,
                          subspace_distance)
from .riemann_theta import level_basis

SEPARATION_GAP = 1e-6
MEET_TOL = 1e-6
ON_A_TOL = 1e-6
ARITH_TOL = 1e-6

ALL_JETS = [(i, k - i) for k in range(4) for i in range(k, -1, -1)]


# ------------------------------------------------------------- jet schemes

@dataclass
class JetScheme:
    """Finite scheme given by linear functionals on sections.

    Each functional is (z, {(i, j): coefficient}) meaning the combination of
    partial derivatives d^(i+j) / dz1^i dz2^j evaluated at z.
    """

    functionals: list = field(default_factory=list)

    def __len__(self):
        return len(self.functionals)

    def __add__(self, other):
        return JetScheme(self.functionals + other.functionals)

    def sub(self, idx):
        return JetScheme([self.functionals[i] for i in idx])


def _dir_jet(vs):
    """D^k f[v_1, ..., v_k] as a combination of partials."""
    out = {(0, 0): 1.0 + 0j}
    for v in vs:
        nxt = {}
        for (i, j), c in out.items():
            nxt[(i + 1, j)] = nxt.get((i + 1, j), 0) + c * v[0]
            nxt[(i, j + 1)] = nxt.get((i, j + 1), 0) + c * v[1]
        out = nxt
    return out


def _combine(*terms):
    out = {}
    for coef, jet in terms:
        for k, c in jet.items():
            out[k] = out.get(k, 0) + coef * c
    return out


def point_scheme(z) -> JetScheme:
    return JetScheme([(np.asarray(z, dtype=complex), {(0, 0): 1.0})])


def points_scheme(points) -> JetScheme:
    s = JetScheme()
    for p in points:
        s = s + point_scheme(getattr(p, "z", p))
    return s


def tangent_scheme(z, w) -> JetScheme:
    """The length-two scheme at z in the flat direction w."""
    z = np.asarray(z, dtype=complex)
    return JetScheme([(z, {(0, 0): 1.0}), (z, _dir_jet([w]))])


def aligned_frame(w):
    """(v, u): v along w, u a unit vector completing the frame."""
    v = np.asarray(w, dtype=complex) / np.linalg.norm(w)
    u = np.array([-np.conj(v[1]), np.conj(v[0])])
    return v, u


def curvilinear_scheme(z, w, a, b, length=4) -> JetScheme:
    """(z1^length, z2 - a z1^2 - b z1^3) in coordinates aligned with w."""
    z = np.asarray(z, dtype=complex)
    v, u = aligned_frame(w)
    f = [{(0, 0): 1.0}, _dir_jet([v]),
         _combine((1, _dir_jet([v, v])), (2 * a, _dir_jet([u]))),
         _combine((1, _dir_jet([v, v, v])), (6 * a, _dir_jet([v, u])), (6 * b, _dir_jet([u])))]
    return JetScheme([(z, j) for j in f[:length]])


def planar_scheme(z, w) -> JetScheme:
    """(z1^2, z2^2) in coordinates aligned with w."""
    z = np.asarray(z, dtype=complex)
    v, u = aligned_frame(w)
    f = [{(0, 0): 1.0}, _dir_jet([v]), _dir_jet([u]), _dir_jet([v, u])]
    return JetScheme([(z, j) for j in f])


def fat_scheme(z, w) -> JetScheme:
    """Functionals 1, v, u, v^2, vu, v^3; every curvilinear and planar scheme above lies in it."""
    z = np.asarray(z, dtype=complex)
    v, u = aligned_frame(w)
    f = [{(0, 0): 1.0}, _dir_jet([v]), _dir_jet([u]), _dir_jet([v, v]), _dir_jet([v, u]),
         _dir_jet([v, v, v])]
    return JetScheme([(z, j) for j in f])


def evaluation_matrix(ctx: EmbeddingContext, scheme: JetScheme) -> np.ndarray:
    """(length x 9) matrix of the functionals applied to the level-3 sections.

    Rows at one support point share a scale factor; this stands in for the
    automorphy normalization and leaves every rank untouched.
    """
    pd = ctx.periods
    rows = []
    cache = {}
    for z, jet in scheme.functionals:
        key = tuple(np.round(z, 14))
        if key not in cache:
            vals = level_basis(3, z, pd.omega, pd.delta, jets=ALL_JETS)
            cache[key] = (vals, np.linalg.norm(vals[0]))
        vals, nrm = cache[key]
        row = np.zeros(9, dtype=complex)
        for (i, j), c in jet.items():
            row += c * vals[ALL_JETS.index((i, j))]
        rows.append(row / nrm)
    return np.array(rows)


@dataclass
class Verdict:
    value: bool
    gap: float
    detail: dict = field(default_factory=dict)

    def __bool__(self):
        return bool(self.value)


def separates(ctx: EmbeddingContext, scheme: JetScheme, gap_tol=SEPARATION_GAP) -> Verdict:
    if len(scheme) > 6:
        raise ValueError("schemes of length at most 6 only")
    s = np.linalg.svd(evaluation_matrix(ctx, scheme), compute_uv=False)
    gap = float(s[len(scheme) - 1] / s[0]) if len(s) >= len(scheme) else 0.0
    return Verdict(gap > gap_tol, gap)


# ------------------------------------------------------------- Terracini

def terracini_two_points(ctx: EmbeddingContext, b, c, p) -> Verdict:
    """Injectivity of the differential at ({b, c}, p) on the abstract secant variety."""
    pb, pc = ctx.phi3(b), ctx.phi3(c)
    dist = point_subspace_distance(p, span([pb, pc]))
    if dist > 1e-6:
        raise PointNotOnSecant(f"point is {dist:.2e} away from the secant line")
    full = [(0, 0), (1, 0), (0, 1)]
    scheme = JetScheme([(b.z, {j: 1.0}) for j in full] + [(c.z, {j: 1.0}) for j in full])
    sep = separates(ctx, scheme)
    near = min(fs_distance(p, pb), fs_distance(p, pc))
    return Verdict(sep.value and near > 1e-6, sep.gap, {"tangent_rank_gap": sep.gap, "to_support": near})


def double_point_witness(ctx, a, w):
    """Curvilinear or planar length-4 scheme at a (aligned with w) that is not separated, if any.

    Any such scheme sits inside the length-6 fat scheme, so a left kernel of
    the fat evaluation matrix pins down its (alpha, beta) exactly.
    """
    M = evaluation_matrix(ctx, fat_scheme(a.z, w))
    U, s, _ = np.linalg.svd(M)
    if s[-1] / s[0] > SEPARATION_GAP:
        return None
    mu = U[:, -1].conj()  # mu^T M = 0 up to conjugation convention
    m_g, m_v, m_w, m_vv, m_vw, m_vvv = mu
    if abs(m_vvv) > 1e-8:
        al = m_vw / (6 * m_vvv)
        be = (m_w - 2 * al * m_vv) / (6 * m_vvv)
        return ("curvilinear", complex(al), complex(be))
    if abs(m_vv) < 1e-8:
        return ("planar", None, None)
    return None


def probe_grid(n=5, phase=np.exp(1j * np.pi / 7)):
    g = np.linspace(-1, 1, n)
    return [(phase * x, phase * y) for x in g for y in g]


def terracini_double_point(ctx: EmbeddingContext, a: JacobianPoint, v, p) -> Verdict:
    """Injectivity of the differential at ((a, v), p), with v in P(T_a A)."""
    pd = ctx.periods
    w = flat_direction(pd, v)
    jets = level_basis(3, a.z, pd.omega, pd.delta, jets=((0, 0), (1, 0), (0, 1)))
    line = span([jets[0], w[0] * jets[1] + w[1] * jets[2]], rank_tol=1e-12)
    dist = point_subspace_distance(p, line)
    if dist > 1e-6:
        raise PointNotOnTangent(f"point is {dist:.2e} away from the tangent line")
    schemes = [("grid", ab, curvilinear_scheme(a.z, w, *ab)) for ab in probe_grid()]
    schemes.append(("planar", None, planar_scheme(a.z, w)))
    wit = double_point_witness(ctx, a, w)
    if wit is not None:
        kind, al, be = wit
        schemes.append(("witness", (al, be),
                        planar_scheme(a.z, w) if kind == "planar" else curvilinear_scheme(a.z, w, al, be)))
    worst, failed = np.inf, None
    for label, ab, sch in schemes:
        sep = separates(ctx, sch)
        if sep.gap < worst:
            worst = sep.gap
        if not sep and failed is None:
            failed = (label, ab)
    near = fs_distance(p, ctx.phi3(a))
    ok = failed is None and near > 1e-6
    return Verdict(ok, float(worst), {"failed": failed, "to_support": near,
                                      "probes": len(schemes), "sampled_claim": failed is None})


# ------------------------------------------------------------ constructions

def _curve_alphas(periods, n, rng):
    pts = sample_curve_points(periods.curve, n, seed=int(rng.integers(1 << 30)))
    return pts, [alpha(periods, p) for p in pts]


def nonseparated_four(periods, rng):
    """Four points alpha(x_i) + a with x_1 + ... + x_4 in |2K - 3a|, and a."""
    _, al = _curve_alphas(periods, 4, rng)
    a = JacobianPoint(-sum(x.z for x in al) / 3, periods)
    return [x + a for x in al], a


def meeting_tangents_pair(periods, rng):
    """b, c with tangent vectors on a common translate Theta_e, 2x + 2y ~ 2K - 3e."""
    pts, (ax, ay) = _curve_alphas(periods, 2, rng)
    e = JacobianPoint(-(2 * ax.z + 2 * ay.z) / 3, periods)
    return ax + e, ay + e, e, pts


def quartic_tangent(periods, rng):
    """(b, v) on Theta_e with 4x ~ 2K - 3e; returns b, v (direction of x) and e."""
    from .curve_model import canonical_map
    pts, (ax,) = _curve_alphas(periods, 1, rng)
    e = JacobianPoint(-4 * ax.z / 3, periods)
    return ax + e, canonical_map(pts[0]), e


# -------------------------------------------------------- meeting secants

@dataclass
class SecantMeeting:
    kind: str  # "Disjoint", "MeetOnA" or "MeetOffA"
    point: np.ndarray | None
    gap: float
    predicted: str
    conditions: list


def _meet(ctx, L1, L2):
    S = intersect([L1, L2], rank_tol=MEET_TOL)
    gap = float(S.singular_values[0])
    if S.dim < 0:
        return None, gap
    return S.basis[:, 0], gap


def _close(p, q):
    return p.distance(q) < ARITH_TOL


def predicted_conditions(zeta, zeta2):
    """Which of the four meeting conditions hold, decided without projective geometry."""
    pd = zeta.support[0].periods
    O = zero(pd)
    conds = []
    # (1): a common translate containing both; its parameter lies in tau of each
    for e in tau(zeta).support:
        if tangent_on_theta(e, zeta) < 1e-6 and tangent_on_theta(e, zeta2) < 1e-6:
            conds.append(1)
            break
    r1, r2 = isinstance(zeta, Reduced), isinstance(zeta2, Reduced)
    if r1 and r2:
        for a in zeta.support:
            for a2 in zeta2.support:
                if _close(a, a2):
                    b = zeta.b if a is zeta.a else zeta.a
                    c = zeta2.b if a2 is zeta2.a else zeta2.a
                    if not (_close(a, b) or _close(a, c) or _close(b, c)) and _close(a + b + c, O):
                        conds.append(2)
    elif r1 != r2:
        red, nr = (zeta, zeta2) if r1 else (zeta2, zeta)
        for a in red.support:
            b = red.b if a is red.a else red.a
            if _close(a, nr.a) and _close(a + a + b, O):
                conds.append(3)
    else:
        if _close(zeta.a, zeta2.a) and 1 - abs(np.vdot(zeta.v, zeta2.v)) > 1e-6 \
                and _close(3 * zeta.a, O):
            conds.append(4)
    return sorted(set(conds))


def classify_meeting_secants(ctx: EmbeddingContext, zeta, zeta2) -> SecantMeeting:
    L1 = secant_line(ctx, tau(zeta))
    L2 = secant_line(ctx, tau(zeta2))
    p, gap = _meet(ctx, L1, L2)
    if p is None:
        kind = "Disjoint"
    else:
        kind = "MeetOnA" if distance_to_A(ctx, p) < ON_A_TOL else "MeetOffA"
    conds = predicted_conditions(zeta, zeta2)
    predicted = "Disjoint" if not conds else ("MeetOnA" if 1 in conds else "MeetOffA")
    if predicted != kind:
        raise ClassificationMismatch(f"numeric {kind} (gap {gap:.2e}) vs predicted {predicted} {conds}")
    return SecantMeeting(kind, None if p is None else normalize(p), gap, predicted, conds)


# --------------------------------------------------------------- fibers

def secant_via_spans(ctx, a, b):
    """l(tau(a, b)) as the intersection of the two translate spans."""
    return intersect([ctx.translate_span(a), ctx.translate_span(b)], rank_tol=MEET_TOL)


def fiber_over_N(ctx: EmbeddingContext, xi: KummerTriple, pool=200, rng=None, detail=False):
    """Number of secant lines l(tau(zeta)) through phi_D(xi) (3 for generic xi)."""
    pd = ctx.periods
    if not xi.is_reduced:
        raise GenericityViolation("fiber count needs a reduced triple")
    a, b, c = xi.points
    if min(a.distance(b), a.distance(c), b.distance(c)) < 1e-2:
        raise GenericityViolation("support points too close")
    p = phi_D(ctx, xi)
    if distance_to_A(ctx, p) < 1e-3:
        raise GenericityViolation("triple is on the contracted divisor")
    own = [secant_via_spans(ctx, a, b), secant_via_spans(ctx, a, c), secant_via_spans(ctx, b, c)]
    d_own = [point_subspace_distance(p, L) for L in own]
    if max(d_own) > 1e-6:
        raise UnexpectedIncidence(f"phi_D(xi) misses its own secant lines by {max(d_own):.2e}")
    distinct = min(subspace_distance(own[i], own[j]) for i, j in ((0, 1), (0, 2), (1, 2)))
    if distinct < 1e-3:
        raise UnexpectedIncidence("the three secant lines are not distinct")
    rng = rng if rng is not None else np.random.default_rng(ctx.seed + 5)
    pairs = [(a, b), (a, c), (b, c)]
    d_min = np.inf
    count = 3
    done = 0
    while done < pool:
        c1, c2 = random_point(pd, rng), random_point(pd, rng)
        if any(min(max(c1.distance(x), c2.distance(y)), max(c1.distance(y), c2.distance(x))) < 0.1
               for x, y in pairs):
            continue
        d = point_subspace_distance(p, secant_via_spans(ctx, c1, c2))
        d_min = min(d_min, d)
        if d < 1e-3:
            count += 1
        done += 1
    if count != 3:
        raise UnexpectedIncidence(f"{count - 3} extra secant lines through phi_D(xi)")
    if detail:
        return count, {"own": max(d_own), "others": float(d_min), "distinct": distinct}
    return count
