"""Level-3 and level-2 embeddings, the Coble cubic, the Kummer quartic and the Heisenberg action."""

from __future__ import annotations

import threading
import warnings

import numpy as np
from scipy.stats import qmc

from .errors import EigensplitFailed, NullspaceNotOneDimensional, WrongSpanDimension
from .jacobian import JacobianPoint, alpha, point_from_coords, torsion_points
from .periods import PeriodData, sample_curve_points
from .proj_linalg import (Subspace, fit_hypersurface, fs_distance, normalize, polar_map,
                          span)
from .riemann_theta import level_basis

SPAN_SAMPLES = 14
COBLE_SAMPLES = 60
QUARTIC_SAMPLES = 60
HEIS_SAMPLES = 12
INDET_TOL = 1e-7  # relative gradient size treated as a base point of a fitted form


def sobol_points(periods, n, seed):
    """Well spread points of the fundamental cell."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)  # n need not be a power of two
        u = qmc.Sobol(d=4, scramble=True, seed=seed).random(n)
    return [point_from_coords(periods, t - 0.5) for t in u]


def dlt_projective_map(P, Q):
    """Matrix M with M p_i proportional to q_i for all i (columns of P, Q).

    Returns (M, gap) with gap the ratio of the two smallest singular values.
    """
    P = np.asarray(P, dtype=complex)
    Q = np.asarray(Q, dtype=complex)
    n, k = P.shape[0], Q.shape[0]
    rows = []
    for p, q in zip(P.T, Q.T):
        q = q / np.linalg.norm(q)
        proj = np.eye(k) - np.outer(q, q.conj())
        rows.append(proj @ np.kron(p[None, :] / np.linalg.norm(p), np.eye(k)))
    A = np.vstack(rows)
    _, s, Vh = np.linalg.svd(A)
    s = s / s[0]
    gap = s[-2] / max(s[-1], 1e-300)
    if gap < 10:
        raise NullspaceNotOneDimensional(f"projective map not determined (gap {gap:.2e})")
    return Vh[-1].conj().reshape(k, n, order="F"), float(gap)


def matrix_distance(M, N) -> float:
    """Fubini-Study distance between matrices viewed as projective points."""
    return fs_distance(np.ravel(M), np.ravel(N))


class EmbeddingContext:
    """Everything built on top of one PeriodData; heavy objects are fitted lazily."""

    def __init__(self, periods: PeriodData, seed: int = 42):
        self.periods = periods
        self.seed = seed
        self._lock = threading.RLock()
        self._spans = {}
        self._heis = {}
        self._coble = None
        self._quartic = None
        self._curve_alpha = None

    # embeddings
    def phi3(self, a: JacobianPoint) -> np.ndarray:
        return normalize(level_basis(3, a.z, self.periods.omega, self.periods.delta))

    def phi2(self, a: JacobianPoint) -> np.ndarray:
        return normalize(level_basis(2, a.z, self.periods.omega, self.periods.delta))

    def phi3_many(self, zs) -> np.ndarray:
        zs = self.periods.reduce(np.asarray(zs, dtype=complex).reshape(-1, 2))
        v = level_basis(3, zs, self.periods.omega, self.periods.delta)
        return v / np.linalg.norm(v, axis=1, keepdims=True)

    def curve_alpha(self):
        """alpha(x) for the fixed curve sample used to span translates."""
        if self._curve_alpha is None:
            pts = sample_curve_points(self.periods.curve, SPAN_SAMPLES, seed=self.seed)
            self._curve_alpha = np.array([alpha(self.periods, p).z for p in pts])
        return self._curve_alpha

    # translates of the theta divisor
    def translate_span(self, a: JacobianPoint) -> Subspace:
        key = a.cache_key()
        with self._lock:
            S = self._spans.get(key)
            if S is None:
                S = span(self.phi3_many(self.curve_alpha() + a.z))
                if S.dim != 4:
                    raise WrongSpanDimension(f"span of Theta_a has dimension {S.dim}")
                self._spans[key] = S
        return S

    # hypersurfaces
    def coble(self):
        with self._lock:
            if self._coble is None:
                pts = sobol_points(self.periods, COBLE_SAMPLES, self.seed)
                F, gap = fit_hypersurface([self.phi3(p) for p in pts], 3, jet_conditions=True)
                F.meta.update({"sampler": "sobol", "seed": self.seed})
                self._coble = F
        return self._coble

    def kummer_quartic(self):
        with self._lock:
            if self._quartic is None:
                pts = sobol_points(self.periods, QUARTIC_SAMPLES, self.seed + 1)
                Q, gap = fit_hypersurface([self.phi2(p) for p in pts], 4)
                Q.meta.update({"sampler": "sobol", "seed": self.seed + 1})
                self._quartic = Q
        return self._quartic

    def coble_polar(self, p):
        return polar_map(self.coble(), p, INDET_TOL)

    def kummer_polar(self, p):
        return polar_map(self.kummer_quartic(), p, INDET_TOL)

    # Heisenberg action of A[3]
    def heisenberg(self, e: JacobianPoint) -> np.ndarray:
        """Fitted 9x9 matrix M_e with phi3(a + e) = M_e phi3(a), unit Frobenius norm."""
        key = e.cache_key(1e-6)
        with self._lock:
            M = self._heis.get(key)
            if M is None:
                pts = sobol_points(self.periods, HEIS_SAMPLES, self.seed + 2)
                P = np.array([self.phi3(p) for p in pts]).T
                Q = np.array([self.phi3(p + e) for p in pts]).T
                M, _ = dlt_projective_map(P, Q)
                M = M / np.linalg.norm(M)
                self._heis[key] = M
        return M


def build_coble(ctx: EmbeddingContext):
    return ctx.coble()


def build_kummer_quartic(ctx: EmbeddingContext):
    return ctx.kummer_quartic()


def coble_polar(ctx, p):
    return ctx.coble_polar(p)


def kummer_polar(ctx, p):
    return ctx.kummer_polar(p)


def phi3(ctx, a):
    return ctx.phi3(a)


def phi2(ctx, a):
    return ctx.phi2(a)


def translate_span(ctx, a):
    return ctx.translate_span(a)


def heisenberg_oracle(periods, e: JacobianPoint) -> np.ndarray:
    """Closed form of M_e for e = (k + Omega m)/3.

    Translating by e shifts the level-3 index by m and multiplies by the
    character exp(2 pi i (sigma + m) . k / 3).
    """
    t = np.rint(3 * periods.lattice_coords(e.z)).astype(int) % 3
    k, m = t[:2], t[2:]
    sig = [(i, j) for i in range(3) for j in range(3)]
    M = np.zeros((9, 9), dtype=complex)
    for row, s in enumerate(sig):
        s2 = ((s[0] + m[0]) % 3, (s[1] + m[1]) % 3)
        M[row, sig.index(s2)] = np.exp(2j * np.pi * (s2[0] * k[0] + s2[1] * k[1]) / 3)
    return M / np.linalg.norm(M)


def substitute(F, M):
    """Coefficients of x -> F(M x), fitted by least squares on random points."""
    rng = np.random.default_rng(0)
    from .proj_linalg import FormCoefficients, eval_monomials
    X = rng.normal(size=(2 * F.exps.shape[0], F.nvars)) + 1j * rng.normal(size=(2 * F.exps.shape[0], F.nvars))
    vals = F(X @ np.asarray(M).T)
    c, *_ = np.linalg.lstsq(eval_monomials(X, F.exps), vals, rcond=None)
    return FormCoefficients(F.degree, F.nvars, c)


def coble_invariance_gap(ctx, e) -> float:
    F = ctx.coble()
    return fs_distance(substitute(F, ctx.heisenberg(e)).coeffs, F.coeffs)


# ------------------------------------------------------ iota on a translate

def iota_splitting(ctx: EmbeddingContext, a: JacobianPoint):
    """Eigen-decomposition of z -> 2a - z restricted to the span of Theta_a, a in A[3].

    Returns (O_a, P3_a, info).
    """
    pd = ctx.periods
    if (3 * a).distance(JacobianPoint(np.zeros(2), pd)) > 1e-8:
        raise ValueError("a must be 3-torsion")
    S = ctx.translate_span(a)
    al = ctx.curve_alpha()
    P = S.basis.conj().T @ ctx.phi3_many(al + a.z).T
    Q = S.basis.conj().T @ ctx.phi3_many(a.z - al).T
    L, _ = dlt_projective_map(P, Q)
    L2 = L @ L
    lam = np.trace(L2) / 5
    L = L / np.sqrt(lam)
    w, V = np.linalg.eig(L)
    plus = np.abs(w - 1) < 1e-6
    minus = np.abs(w + 1) < 1e-6
    if plus.sum() + minus.sum() != 5 or sorted([plus.sum(), minus.sum()]) != [1, 4]:
        raise EigensplitFailed(f"eigenvalues {np.round(w, 6).tolist()}")
    one, four = (plus, minus) if plus.sum() == 1 else (minus, plus)
    O = normalize(S.basis @ V[:, one][:, 0])
    P3 = span((S.basis @ V[:, four]).T)
    info = {"eigenvalues": w, "residual": float(np.linalg.norm(L @ L - np.eye(5)))}
    return O, P3, info


def project_from_point(O, P3: Subspace, p):
    """Coordinates in P3 of the projection of p from O (P3 and O span the ambient cone piece)."""
    B = np.column_stack([O, P3.basis])
    c, *_ = np.linalg.lstsq(B, np.asarray(p, dtype=complex), rcond=None)
    return normalize(c[1:])


def twisted_cubic_check(xs_fit, q_fit, xs_test, q_test):
    """Fit T with T (1, x, x^2, x^3) ~ q, then the worst catalecticant rank gap on fresh samples."""
    ver = lambda x: np.array([1, x, x * x, x ** 3], dtype=complex)
    P = np.array([ver(x) for x in xs_fit]).T
    T, gap = dlt_projective_map(P, np.array(q_fit).T)
    Ti = np.linalg.inv(T)
    worst = 0.0
    for q in q_test:
        r = Ti @ q
        s = np.linalg.svd(np.array([[r[0], r[1], r[2]], [r[1], r[2], r[3]]]), compute_uv=False)
        worst = max(worst, s[1] / s[0])
    return worst, T


def torsion_count_on_translate(a: JacobianPoint, tol=1e-6) -> int:
    """Number of 3-torsion points on Theta_a."""
    from .jacobian import theta_residual
    pd = a.periods
    diffs = np.array([(e - a).z for e in torsion_points(pd, 3)])
    return int(np.sum(theta_residual(pd, diffs) < tol))
