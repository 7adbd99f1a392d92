import json

import numpy as np
import pytest
from scipy.integrate import quad_vec

from kummerlab.curve_model import CurvePoint, CurveSpec, involute, random_point
from kummerlab.periods import (PeriodData, _segment_periods, abel_jacobi, abel_jacobi_unreduced,
                               compute_periods, load_or_compute, sample_curve_points,
                               theta_constants, theta_scale)
from kummerlab.jacobian import JacobianPoint, theta_residual

S2 = np.sqrt(2)
# the loop-integral oracle below reproduces this to 1e-12
OMEGA_DEFAULT = np.array([[-1 / 3 + 2j * S2 / 3, -1 / 3 - 1j * S2 / 3],
                          [-1 / 3 - 1j * S2 / 3, 2 / 3 + 2j * S2 / 3]])


def _continued_sqrt(vals, start):
    out = np.empty_like(vals)
    prev = start
    for k, v in enumerate(vals):
        r = np.sqrt(v)
        prev = r if abs(r - prev) <= abs(r + prev) else -r
        out[k] = prev
    return out


def loop_cycle(curve, i, n=4096, eps=0.2):
    """Integral of (dx/y, x dx/y) around an ellipse enclosing e_i and e_{i+1} (trapezoid rule)."""
    a, b = curve.roots[i], curve.roots[i + 1]
    m, d = (a + b) / 2, (b - a) / abs(b - a)
    A, B = abs(b - a) / 2 + eps, eps
    t = 2 * np.pi * np.arange(n) / n
    x = m + d * (A * np.cos(t) + 1j * B * np.sin(t))
    dx = d * (-A * np.sin(t) + 1j * B * np.cos(t)) * (2 * np.pi / n)
    y = _continued_sqrt(curve.f(x), np.sqrt(curve.f(x[0])))
    assert abs(y[-1] - y[0]) < 0.1 * abs(y[0])  # two branch points inside: y closes up
    return np.array([np.sum(dx / y), np.sum(x * dx / y)])


def oracle_omega(curve):
    cyc = np.column_stack([loop_cycle(curve, i) for i in range(4)])
    best = None
    for bits in range(16):
        s = np.array([1 - 2 * ((bits >> k) & 1) for k in range(4)])
        c = cyc * s
        A = np.column_stack([c[:, 0], c[:, 0] + c[:, 2]])
        B = np.column_stack([c[:, 1], c[:, 3]])
        om = np.linalg.solve(A, B)
        if np.linalg.eigvalsh(((om + om.T) / 2).imag).min() > 0:
            asym = np.linalg.norm(om - om.T)
            if best is None or asym < best[0]:
                best = (asym, om, cyc)
    return best[1], best[2]


def test_segment_periods_match_loop_oracle(curve):
    for i in range(4):
        ours, _ = _segment_periods(curve, i, 1e-13)
        loop = loop_cycle(curve, i)
        assert min(np.linalg.norm(ours - loop), np.linalg.norm(ours + loop)) < 1e-10 * np.linalg.norm(loop)


def test_omega_matches_oracle(periods, curve):
    om, _ = oracle_omega(curve)
    assert np.max(np.abs(om - periods.omega)) < 1e-10
    assert np.max(np.abs(periods.omega - OMEGA_DEFAULT)) < 1e-10


def test_omega_stable_under_tighter_quadrature(periods, curve):
    fine = compute_periods(curve, 1e-14)
    assert np.max(np.abs(fine.omega - periods.omega)) < 1e-10


def test_riemann_relations(periods):
    om = periods.omega
    assert np.linalg.norm(om - om.T) < 1e-9
    assert np.linalg.eigvalsh(om.imag).min() > 0


def test_odd_even_constants(periods):
    odd, even = theta_constants(periods)
    scale = max(even.max(), 1.0)
    assert np.all(odd < 1e-8 * scale)
    assert np.all(even > 1e-8 * scale)


def test_delta_is_odd(periods):
    a, b = periods.delta_arrays
    assert int(round(4 * a @ b)) % 2 == 1
    assert periods.metadata["delta_margin"] > 1e3


def test_coords_roundtrip(periods):
    rng = np.random.default_rng(3)
    t = rng.normal(size=(20, 4)) * 3
    z = periods.from_coords(t)
    assert np.allclose(periods.lattice_coords(z), t, atol=1e-12)
    r = periods.reduce(z)
    tr = periods.lattice_coords(r)
    assert np.all(np.abs(tr) <= 0.5 + 1e-12)
    assert np.allclose(periods.reduce(r), r, atol=1e-13)
    assert np.allclose(tr - t, np.round(tr - t), atol=1e-10)


def test_eta_maps_to_zero(periods, curve):
    w = abel_jacobi(curve, periods, curve.eta_point())
    assert w.distance(JacobianPoint(np.zeros(2), periods)) < 1e-12


def test_involution_and_theta(periods, curve):
    rng = np.random.default_rng(5)
    scale = theta_scale(periods, periods.delta_arrays)
    for _ in range(15):
        p = random_point(curve, rng)
        a = abel_jacobi(curve, periods, p)
        b = abel_jacobi(curve, periods, involute(curve, p))
        assert (a + b).distance(a - a) < 1e-8
        assert theta_residual(periods, a.z[None])[0] < 1e-7 * max(scale, 1)


def test_involution_along_another_path(periods, curve):
    for p in sample_curve_points(curve, 8, seed=11):
        za = abel_jacobi_unreduced(periods, p)
        zb = abel_jacobi_unreduced(periods, involute(curve, p), waypoint=1.3 + 0.9j)
        s = JacobianPoint(periods.reduce(za + zb), periods)
        assert s.distance(JacobianPoint(np.zeros(2), periods)) < 1e-8


def test_differences_match_direct_integration(periods, curve):
    """alpha(p) - alpha(q) against a quad_vec integral along a short straight path."""
    x0, x1 = 0.5 + 0.5j, 0.62 + 0.31j
    y0 = np.sqrt(curve.f(x0))
    ts = np.linspace(0, 1, 401)
    ys = _continued_sqrt(curve.f(x0 + (x1 - x0) * ts), y0)
    q, p = CurvePoint(x0, y0), CurvePoint(x1, ys[-1])

    def integrand(t):
        x = x0 + (x1 - x0) * t
        k = min(int(round(t * 400)), 400)
        y = np.sqrt(curve.f(x))
        y = y if abs(y - ys[k]) < abs(y + ys[k]) else -y
        return np.array([1 / y, x / y]) * (x1 - x0)

    raw, _ = quad_vec(integrand, 0, 1, epsabs=1e-14, epsrel=1e-13)
    diff = periods.pa_inv @ raw
    d = abel_jacobi(curve, periods, p) - abel_jacobi(curve, periods, q)
    assert d.distance(JacobianPoint(diff, periods)) < 1e-9


def test_off_curve_point_rejected(periods):
    with pytest.raises(ValueError):
        abel_jacobi_unreduced(periods, CurvePoint(0.3 + 0j, 7 + 0j))


def test_other_curve_rejected(periods):
    other = CurveSpec(np.poly([-2, -1, 0, 1, 2]), 0)
    with pytest.raises(ValueError):
        abel_jacobi(other, periods, other.lift(0.5))


@pytest.mark.parametrize("coeffs,eta", [
    (np.poly([-2, -1, 0.3j, 1, 2.5, 3 - 1j]), 2),
    ((0, 1, 0, 0, 0, -1, 0), 5),
    ((0, 2, 1j, 0, 3, -1, 1), 0),
])
def test_other_curves(coeffs, eta):
    c = CurveSpec(coeffs, eta)
    pd = compute_periods(c)
    assert np.linalg.norm(pd.omega - pd.omega.T) < 1e-9
    assert np.linalg.eigvalsh(pd.omega.imag).min() > 0
    odd, even = theta_constants(pd)
    assert odd.max() < 1e-8 * even.min()
    rng = np.random.default_rng(0)
    for _ in range(5):
        p = random_point(c, rng)
        a = abel_jacobi(c, pd, p)
        assert theta_residual(pd, a.z[None])[0] < 1e-7
        assert (a + abel_jacobi(c, pd, involute(c, p))).distance(a - a) < 1e-8


def test_json_roundtrip(periods):
    again = PeriodData.from_json(json.loads(json.dumps(periods.to_json())))
    assert np.array_equal(again.omega, periods.omega)
    assert again.delta == periods.delta


def test_cache_file(tmp_path, curve):
    path = tmp_path / "periods.json"
    first = load_or_compute(curve, cache_path=str(path))
    assert path.exists()
    second = load_or_compute(curve, cache_path=str(path))
    assert np.array_equal(first.omega, second.omega)
    path.write_text("not json")
    third = load_or_compute(curve, cache_path=str(path))
    assert np.array_equal(first.omega, third.omega)
