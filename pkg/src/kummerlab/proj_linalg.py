"""Projective linear algebra over C: normalized points, spans, intersections, forms."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations_with_replacement

import numpy as np

from .errors import IndeterminacyPoint, NullspaceNotOneDimensional

MONOMIAL_ORDER = "grlex-v1"  # bump if the monomial enumeration ever changes
RANK_TOL = 1e-8


def normalize(v) -> np.ndarray:
    """Unit norm, first nonzero coordinate real positive."""
    v = np.asarray(v, dtype=complex).ravel()
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError("zero vector has no projective point")
    v = v / n
    k = int(np.argmax(np.abs(v) > 1e-12))
    return v * (abs(v[k]) / v[k])


ProjPoint = np.ndarray  # always produced by normalize()


def fs_distance(p, q) -> float:
    """Fubini-Study distance sqrt(1 - |<p, q>|^2) of the normalized vectors."""
    p = np.asarray(p, dtype=complex).ravel()
    q = np.asarray(q, dtype=complex).ravel()
    p = p / np.linalg.norm(p)
    q = q / np.linalg.norm(q)
    # the residual form keeps full precision for nearby points, 1 - c^2 does not
    return float(min(1.0, np.linalg.norm(p - q * np.vdot(q, p))))


@dataclass
class Subspace:
    """Projective subspace stored as orthonormal columns of its cone."""

    basis: np.ndarray
    singular_values: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def ambient(self) -> int:
        return self.basis.shape[0] - 1

    @property
    def dim(self) -> int:
        return self.basis.shape[1] - 1

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    def point(self) -> np.ndarray:
        if self.dim != 0:
            raise ValueError(f"subspace has dimension {self.dim}, not a point")
        return normalize(self.basis[:, 0])

    def distance_to(self, p) -> float:
        return point_subspace_distance(p, self)


def span(points, rank_tol=RANK_TOL) -> Subspace:
    M = np.array([np.asarray(p, dtype=complex) for p in points]).T
    if M.size == 0:
        raise ValueError("span of no points")
    M = M / np.linalg.norm(M, axis=0)
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    r = int(np.sum(s > rank_tol * s[0]))
    return Subspace(U[:, :r], s)


def intersect(subspaces, rank_tol=RANK_TOL) -> Subspace:
    """Intersection of cones; dimension -1 means empty.

    ``singular_values`` of the result holds the spectrum of the stacked
    complement projectors in ascending order, the smallest ones certify how
    close the intersection is to being larger.
    """
    n = subspaces[0].basis.shape[0]
    if any(S.basis.shape[0] != n for S in subspaces):
        raise ValueError("ambient dimensions differ")
    M = np.vstack([np.eye(n) - S.projector() for S in subspaces])
    _, s, Vh = np.linalg.svd(M)
    order = np.argsort(s)
    s, V = s[order], Vh.conj().T[:, order]
    r = int(np.sum(s < rank_tol * max(1.0, s[-1])))
    return Subspace(V[:, :r], s)


def point_subspace_distance(p, S: Subspace) -> float:
    p = normalize(p)
    return float(np.linalg.norm(p - S.basis @ (S.basis.conj().T @ p)))


def subspace_distance(S: Subspace, T: Subspace) -> float:
    """Spectral norm of the projector difference."""
    return float(np.linalg.norm(S.projector() - T.projector(), 2))


# ----------------------------------------------------------------- forms

def monomials(m: int, d: int) -> np.ndarray:
    """Exponent vectors of degree-d monomials in m variables, graded-lex order."""
    out = []
    for idx in combinations_with_replacement(range(m), d):
        e = np.zeros(m, dtype=int)
        for i in idx:
            e[i] += 1
        out.append(e)
    return np.array(out)


def _powers(P, d):
    P = np.atleast_2d(np.asarray(P, dtype=complex))
    pw = np.ones(P.shape + (d + 1,), dtype=complex)
    for k in range(1, d + 1):
        pw[..., k] = pw[..., k - 1] * P
    return pw


def eval_monomials(P, exps) -> np.ndarray:
    """(n, M) values of each monomial at each row of P."""
    d = int(exps.sum(1).max())
    pw = _powers(P, d)  # (n, m, d+1)
    m = exps.shape[1]
    vals = pw[:, np.arange(m)[None, :], exps]  # (n, M, m)
    return vals.prod(-1)


def grad_monomials(P, exps) -> np.ndarray:
    """(n, m, M): partial derivative d/dx_i of each monomial at each point."""
    P = np.atleast_2d(np.asarray(P, dtype=complex))
    n, m = P.shape
    d = int(exps.sum(1).max())
    pw = _powers(P, d)
    out = np.zeros((n, m, exps.shape[0]), dtype=complex)
    for i in range(m):
        e = exps.copy()
        c = e[:, i].astype(float)
        e[:, i] = np.maximum(e[:, i] - 1, 0)
        vals = pw[:, np.arange(m)[None, :], e].prod(-1)
        out[:, i] = vals * c
    return out


@dataclass
class FormCoefficients:
    degree: int
    nvars: int
    coeffs: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        self.coeffs = self.coeffs / np.linalg.norm(self.coeffs)
        self.exps = monomials(self.nvars, self.degree)
        if self.exps.shape[0] != self.coeffs.size:
            raise ValueError("coefficient count does not match the monomial basis")

    def __call__(self, P):
        P = np.asarray(P, dtype=complex)
        v = eval_monomials(P.reshape(-1, self.nvars), self.exps) @ self.coeffs
        return v[0] if P.ndim == 1 else v

    def gradient(self, P):
        P = np.asarray(P, dtype=complex)
        g = grad_monomials(P.reshape(-1, self.nvars), self.exps) @ self.coeffs
        return g[0] if P.ndim == 1 else g

    def to_json(self) -> dict:
        return {"monomial_order": MONOMIAL_ORDER, "degree": self.degree, "nvars": self.nvars,
                "coeffs": [[float(c.real), float(c.imag)] for c in self.coeffs],
                "meta": self.meta}

    @classmethod
    def from_json(cls, data):
        if data.get("monomial_order") != MONOMIAL_ORDER:
            raise ValueError(f"unsupported monomial order {data.get('monomial_order')!r}")
        return cls(data["degree"], data["nvars"], [complex(a, b) for a, b in data["coeffs"]],
                   data.get("meta", {}))


def fit_hypersurface(samples, degree, jet_conditions=False):
    """Unique degree-d form vanishing on the samples (or singular there).

    Returns (form, gap) where gap = sigma_{last-1} / sigma_last.
    """
    P = np.array([normalize(p) for p in samples])
    n, m = P.shape
    exps = monomials(m, degree)
    if jet_conditions:
        rows = grad_monomials(P, exps).reshape(n * m, -1)
    else:
        rows = eval_monomials(P, exps)
    if rows.shape[0] < exps.shape[0] + 5:
        raise ValueError(f"{rows.shape[0]} conditions for {exps.shape[0]} monomials")
    _, s, Vh = np.linalg.svd(rows, full_matrices=False)
    s = s / s[0]
    gap = float(s[-2] / s[-1]) if s[-1] > 0 else float("inf")
    if s[-2] < 10 * s[-1]:
        raise NullspaceNotOneDimensional(
            f"two smallest normalized singular values {s[-2]:.2e}, {s[-1]:.2e}")
    form = FormCoefficients(degree, m, normalize(Vh[-1].conj()),
                            {"gap": gap, "samples": n, "jet_conditions": bool(jet_conditions),
                             "sigma_last": float(s[-1])})
    return form, gap


def polar_map(F: FormCoefficients, p, indet_tol=1e-10) -> np.ndarray:
    if F.degree < 2:
        raise ValueError("polar map needs degree at least 2")
    p = np.asarray(p, dtype=complex)
    g = F.gradient(p)
    bound = indet_tol * np.linalg.norm(F.coeffs) * np.linalg.norm(p) ** (F.degree - 1)
    if np.linalg.norm(g) < bound:
        raise IndeterminacyPoint(f"gradient norm {np.linalg.norm(g):.2e} at a base point")
    return normalize(g)
