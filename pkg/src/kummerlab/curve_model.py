"""Genus-2 hyperelliptic curves y^2 = f(x) with a marked Weierstrass point."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .errors import BadDegree, BadEtaIndex, NotSquarefree

DEFAULT_COEFFS = (0, 1, 0, 0, 0, -1, 0)  # x^5 - x, highest degree first
DEFAULT_ETA_INDEX = 2  # the root x = 0 in (Re, Im) order
SQUAREFREE_GAP = 1e-6  # relative root separation below which f counts as non-squarefree


@dataclass(frozen=True)
class CurvePoint:
    """A point of the curve; ``x is None`` marks a point at infinity."""

    x: complex | None
    y: complex | None = None
    branch: int = 0

    @classmethod
    def infinity(cls, branch: int = 0) -> "CurvePoint":
        return cls(None, None, branch)

    @property
    def is_infinite(self) -> bool:
        return self.x is None


def _sort_key(z):
    return (round(z.real, 9), round(z.imag, 9))


def _polish(coeffs, roots, steps=8):
    d = np.polyder(coeffs)
    out = []
    for r in roots:
        for _ in range(steps):
            fd = np.polyval(d, r)
            if fd == 0:
                break
            step = np.polyval(coeffs, r) / fd
            r = r - step
            if abs(step) < 1e-16 * (1 + abs(r)):
                break
        out.append(complex(r))
    return out


class CurveSpec:
    """Squarefree f of degree 5 or 6 together with the marked Weierstrass point.

    ``coeffs`` holds 7 complex numbers, highest degree first; ``eta_index``
    indexes the finite roots sorted by (Re, Im), with index 5 meaning the
    point at infinity when deg f = 5.
    """

    def __init__(self, coeffs, eta_index):
        c = np.zeros(7, dtype=complex)
        given = np.asarray(coeffs, dtype=complex).ravel()
        if given.size > 7:
            raise BadDegree(f"at most 7 coefficients expected, got {given.size}")
        c[7 - given.size:] = given
        scale = np.max(np.abs(c))
        if scale == 0:
            raise BadDegree("zero polynomial")
        lead = np.nonzero(np.abs(c) > 1e-14 * scale)[0][0]
        degree = 6 - lead
        if degree not in (5, 6):
            raise BadDegree(f"degree {degree} is not 5 or 6")
        self.coeffs = c
        self.poly = c[lead:].copy()
        self.degree = degree
        self.lead = self.poly[0]

        roots = _polish(self.poly, np.roots(self.poly))
        roots.sort(key=_sort_key)
        roots = np.array(roots)
        big = max(1.0, float(np.max(np.abs(roots))))
        gaps = np.abs(roots[:, None] - roots[None, :]) + np.eye(degree) * 1e300
        deriv = np.abs(np.polyval(np.polyder(self.poly), roots))
        # rounding the coefficients splits a double root by about sqrt(eps),
        # so closer clusters are indistinguishable from a repeated root
        if gaps.min() <= SQUAREFREE_GAP * big or deriv.min() < 1e-10 * abs(self.lead) * big ** (degree - 1):
            raise NotSquarefree("f has a repeated root")
        self.roots = roots
        self.max_modulus = float(np.max(np.abs(roots)))
        self.min_gap = float(gaps.min())

        # six Weierstrass points either way: deg 6 has six finite roots,
        # deg 5 has five plus the point at infinity (index 5)
        if not isinstance(eta_index, (int, np.integer)) or not 0 <= eta_index < 6:
            raise BadEtaIndex(f"eta_index {eta_index!r} out of range")
        self.eta_index = int(eta_index)

    # basic evaluation
    def f(self, x):
        return np.polyval(self.poly, x)

    @property
    def eta_is_infinite(self) -> bool:
        return self.degree == 5 and self.eta_index == 5

    @property
    def eta_root(self) -> complex | None:
        return None if self.eta_is_infinite else complex(self.roots[self.eta_index])

    def weierstrass_points(self) -> list[CurvePoint]:
        pts = [CurvePoint(complex(r), 0j) for r in self.roots]
        if self.degree == 5:
            pts.append(CurvePoint.infinity())
        return pts

    def eta_point(self) -> CurvePoint:
        return self.weierstrass_points()[self.eta_index]

    def lift(self, x, sheet: int = 0) -> CurvePoint:
        """Point over x with y the principal root (sheet 0) or its negative."""
        y = np.sqrt(complex(self.f(x)))
        return CurvePoint(complex(x), -y if sheet else y)

    def on_curve(self, p: CurvePoint, tol=1e-10) -> bool:
        if p.is_infinite:
            return self.degree == 6 or p.branch == 0
        fx = self.f(p.x)
        return abs(p.y * p.y - fx) <= tol * (1 + abs(fx))

    def is_weierstrass(self, p: CurvePoint, tol=1e-12) -> bool:
        if p.is_infinite:
            return self.degree == 5
        return bool(np.min(np.abs(self.roots - p.x)) <= tol * (1 + self.max_modulus))

    def to_json(self) -> dict:
        return {"f": [[float(z.real), float(z.imag)] for z in self.coeffs],
                "eta_index": self.eta_index}

    @classmethod
    def from_json(cls, data: dict) -> "CurveSpec":
        return cls([complex(re, im) for re, im in data["f"]], data["eta_index"])

    def digest(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()

    def __repr__(self):
        return f"CurveSpec(degree={self.degree}, eta_index={self.eta_index}, roots={np.round(self.roots, 6).tolist()})"


def new_curve(coeffs, eta_index) -> CurveSpec:
    return CurveSpec(coeffs, eta_index)


def default_curve() -> CurveSpec:
    return CurveSpec(DEFAULT_COEFFS, DEFAULT_ETA_INDEX)


def involute(curve: CurveSpec, p: CurvePoint) -> CurvePoint:
    if p.is_infinite:
        if curve.degree == 5:
            return p
        return CurvePoint.infinity(1 - p.branch)
    return CurvePoint(p.x, -p.y)


def canonical_map(p: CurvePoint) -> np.ndarray:
    """The hyperelliptic cover to P^1, [1 : x] for affine points."""
    if p.is_infinite:
        return np.array([0j, 1 + 0j])
    v = np.array([1 + 0j, complex(p.x)])
    return v / np.linalg.norm(v)


def random_point(curve: CurveSpec, rng, radius=None) -> CurvePoint:
    """Affine point with x uniform in a disk around the branch locus."""
    r = radius if radius is not None else 1.5 * max(curve.max_modulus, 1e-3)
    x = r * np.sqrt(rng.random()) * np.exp(2j * np.pi * rng.random())
    return curve.lift(x, int(rng.integers(2)))
