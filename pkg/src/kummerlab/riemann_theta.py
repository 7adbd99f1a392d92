"""Riemann theta functions with rational characteristics.

    theta[a, b](z, Omega) = sum_m exp(pi i (m+a).Omega.(m+a) + 2 pi i (m+a).(z+b))

All kernels are vectorized over many arguments and many characteristics.
Each argument gets its own summation box centred on the peak of the
Gaussian envelope, so reduced and unreduced arguments cost the same.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import RadiusOverflow

DEFAULT_TOL = 1e-12
MAX_RADIUS = 64
_CHUNK = 1 << 21  # terms per block, keeps peak memory near 50 MB


@dataclass(frozen=True)
class ThetaChar:
    """Characteristic (a, b), components reduced to [0, 1)."""

    a: tuple
    b: tuple

    def __post_init__(self):
        for v in (self.a, self.b):
            for c in v:
                if Fraction(c).limit_denominator(6).denominator not in (1, 2, 3, 6):
                    raise ValueError(f"characteristic entry {c} has denominator outside 1,2,3,6")
        object.__setattr__(self, "a", tuple(float(c) % 1.0 for c in self.a))
        object.__setattr__(self, "b", tuple(float(c) % 1.0 for c in self.b))

    @property
    def parity(self) -> int:
        """0 for even, 1 for odd (half-integer characteristics only)."""
        return int(round(4 * float(np.dot(self.a, self.b)))) % 2


def half_characteristics() -> list[ThetaChar]:
    out = []
    for bits in range(16):
        a = ((bits >> 3) & 1, (bits >> 2) & 1)
        b = ((bits >> 1) & 1, bits & 1)
        out.append(ThetaChar(tuple(x / 2 for x in a), tuple(x / 2 for x in b)))
    return out


def odd_characteristics() -> list[ThetaChar]:
    return [c for c in half_characteristics() if c.parity == 1]


def even_characteristics() -> list[ThetaChar]:
    return [c for c in half_characteristics() if c.parity == 0]


def truncation_radius(omega, tol=DEFAULT_TOL, max_order=0) -> int:
    lam = float(np.linalg.eigvalsh(np.asarray(omega).imag).min())
    if lam <= 0:
        raise ValueError("Im Omega is not positive definite")
    r = int(np.ceil(np.sqrt(np.log(1.0 / tol) / (np.pi * lam)))) + 2 + (1 if max_order else 0)
    if r > MAX_RADIUS:
        raise RadiusOverflow(f"truncation radius {r} exceeds {MAX_RADIUS}")
    return r


def theta_batch(a, b, z, omega, tol=DEFAULT_TOL, jets=((0, 0),)):
    """Theta values and partial derivatives.

    a, b: (C, 2) real characteristics; z: (N, 2) complex arguments.
    Returns an array of shape (len(jets), N, C).
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    z = np.atleast_2d(np.asarray(z, dtype=complex))
    omega = np.asarray(omega, dtype=complex)
    jets = [tuple(j) for j in jets]
    max_order = max(sum(j) for j in jets)
    R = truncation_radius(omega, tol, max_order)
    Y = omega.imag
    centre = -np.linalg.solve(Y, z.imag.T).T  # (N, 2): peak of |term| in m + a
    g = np.arange(-R, R + 1)
    box = np.stack(np.meshgrid(g, g, indexing="ij"), -1).reshape(-1, 2).astype(float)

    N, C, M = z.shape[0], a.shape[0], box.shape[0]
    out = np.empty((len(jets), N, C), dtype=complex)
    step = max(1, _CHUNK // (C * M))
    for s in range(0, N, step):
        zs, cs = z[s:s + step], centre[s:s + step]
        k = np.round(cs[:, None, :] - a[None, :, :])  # (n, C, 2)
        v = k[:, :, None, :] + box[None, None] + a[None, :, None, :]  # (n, C, M, 2)
        quad = np.einsum("ncmi,ij,ncmj->ncm", v, omega, v)
        lin = np.einsum("ncmi,nci->ncm", v, zs[:, None, :] + b[None, :, :])
        terms = np.exp(1j * np.pi * quad + 2j * np.pi * lin)
        for t, (k1, k2) in enumerate(jets):
            if k1 == 0 and k2 == 0:
                out[t, s:s + step] = terms.sum(-1)
            else:
                w = (2j * np.pi * v[..., 0]) ** k1 * (2j * np.pi * v[..., 1]) ** k2
                out[t, s:s + step] = (terms * w).sum(-1)
    return out


def _as_char_arrays(char):
    if isinstance(char, ThetaChar):
        return np.array([char.a]), np.array([char.b])
    a, b = char
    return np.atleast_2d(a), np.atleast_2d(b)


def theta(char, z, omega, tol=DEFAULT_TOL):
    """theta[char](z, Omega); z may be a single 2-vector or an (N, 2) array."""
    a, b = _as_char_arrays(char)
    z = np.asarray(z, dtype=complex)
    val = theta_batch(a, b, z.reshape(-1, 2), omega, tol)[0, :, 0]
    return val[0] if z.ndim == 1 else val


def theta_jet(char, z, omega, jet=(0, 0), tol=DEFAULT_TOL):
    """Partial derivative d^jet theta[char] / dz1^j1 dz2^j2 at z."""
    if sum(jet) > 4 or min(jet) < 0:
        raise ValueError("jet order must be between 0 and 4")
    a, b = _as_char_arrays(char)
    z = np.asarray(z, dtype=complex)
    val = theta_batch(a, b, z.reshape(-1, 2), omega, tol, jets=(tuple(jet),))[0, :, 0]
    return val[0] if z.ndim == 1 else val


def gaussian_weight(z, omega):
    """exp(-pi Im z . (Im Omega)^-1 . Im z); |theta| times this is Lambda-invariant."""
    z = np.atleast_2d(np.asarray(z, dtype=complex))
    y = z.imag
    q = np.einsum("ni,ni->n", y, np.linalg.solve(omega.imag, y.T).T)
    return np.exp(-np.pi * q)


def level_characteristics(n: int, delta):
    """Characteristics of the level-n basis, sigma = (s1, s2) in row-major order.

    theta_sigma(z) = theta[sigma/n + delta_1, n delta_2](n z, n Omega); every
    member has the factor of automorphy of theta[delta]^n.
    """
    d1 = np.asarray(delta[0], dtype=float)
    d2 = np.asarray(delta[1], dtype=float)
    sig = np.array([(i, j) for i in range(n) for j in range(n)], dtype=float)
    a = np.mod(sig / n + d1, 1.0)
    b = np.tile(np.mod(n * d2, 1.0), (n * n, 1))
    return a, b


def level_basis(n: int, z, omega, delta, tol=DEFAULT_TOL, jets=None):
    """Level-n section values at z (shape (N, n^2), or (n^2,) for one point).

    With ``jets`` the result gains a leading axis over the requested partials
    with respect to z (chain rule factor n^|jet| included).
    """
    if n < 1:
        raise ValueError("level must be positive")
    a, b = level_characteristics(n, delta)
    z = np.asarray(z, dtype=complex)
    flat = z.reshape(-1, 2)
    js = [(0, 0)] if jets is None else [tuple(j) for j in jets]
    vals = theta_batch(a, b, n * flat, n * np.asarray(omega), tol, jets=js)
    vals = vals * np.array([float(n) ** sum(j) for j in js])[:, None, None]
    if jets is None:
        vals = vals[0]
        return vals[0] if z.ndim == 1 else vals
    return vals[:, 0] if z.ndim == 1 else vals
