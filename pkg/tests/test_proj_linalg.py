import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kummerlab.coble_duality import sobol_points
from kummerlab.errors import IndeterminacyPoint, NullspaceNotOneDimensional
from kummerlab.proj_linalg import (FormCoefficients, eval_monomials, fit_hypersurface, fs_distance,
                                   intersect, monomials, normalize, point_subspace_distance,
                                   polar_map, span, subspace_distance)


def crandn(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def test_normalize_canonical():
    v = normalize([0, 2j, 1])
    assert abs(np.linalg.norm(v) - 1) < 1e-15
    assert v[1].imag == 0 and v[1].real > 0
    assert fs_distance(v, 3j * v) < 1e-15
    with pytest.raises(ValueError):
        normalize([0, 0])


def test_fs_distance_small_and_orthogonal():
    p = normalize([1, 0, 0])
    q = normalize([1, 1e-12, 0])
    assert abs(fs_distance(p, q) - 1e-12) < 1e-20
    assert abs(fs_distance([1, 0], [0, 1]) - 1) < 1e-15


def test_span_dimensions():
    rng = np.random.default_rng(0)
    p = crandn(rng, 9)
    assert span([p, 2 * p, 1j * p]).dim == 0
    assert span(crandn(rng, 40, 9)).dim == 8
    S = span(crandn(rng, 3, 9))
    assert S.dim == 2 and S.ambient == 8
    with pytest.raises(ValueError):
        S.point()


def test_intersections():
    rng = np.random.default_rng(1)
    V = span(crandn(rng, 5, 9))
    assert subspace_distance(intersect([V, V]), V) < 1e-10
    W = span(crandn(rng, 5, 9))
    X = intersect([V, W])
    assert X.dim == 0  # 4 + 4 - 8
    p = X.point()
    assert point_subspace_distance(p, V) < 1e-10 and point_subspace_distance(p, W) < 1e-10
    assert intersect([V, W, span(crandn(rng, 5, 9))]).dim == -1
    with pytest.raises(ValueError):
        intersect([V, span(crandn(rng, 2, 4))])


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 6), st.integers(1, 6))
def test_span_intersect_idempotent_and_order_free(seed, k1, k2):
    rng = np.random.default_rng(seed)
    A, B = crandn(rng, k1, 9), crandn(rng, k2, 9)
    S = span(A)
    assert subspace_distance(span(list(A) + list(A)), S) < 1e-10
    assert subspace_distance(span(A[::-1]), S) < 1e-10
    T = span(B)
    X, Y = intersect([S, T]), intersect([T, S])
    assert X.dim == Y.dim == max(-1, k1 + k2 - 9 - 1)
    if X.dim >= 0:
        assert subspace_distance(X, Y) < 1e-10
        assert subspace_distance(intersect([X, X]), X) < 1e-10


def test_monomial_counts():
    assert monomials(9, 3).shape == (165, 9)
    assert monomials(4, 4).shape == (35, 4)
    e = monomials(3, 2)
    assert e.tolist()[0] == [2, 0, 0] and e.tolist()[-1] == [0, 0, 2]


def test_sum_of_cubes_polar():
    exps = monomials(4, 3)
    c = np.array([1.0 if e.max() == 3 else 0.0 for e in exps])
    F = FormCoefficients(3, 4, c)
    for i in range(4):
        ei = np.eye(4)[i]
        assert fs_distance(polar_map(F, ei), ei) < 1e-15


def test_euler_identity():
    rng = np.random.default_rng(2)
    F = FormCoefficients(3, 9, crandn(rng, 165))
    for p in crandn(rng, 20, 9):
        lhs = F.gradient(p) @ p
        assert abs(lhs - 3 * F(p)) <= 1e-10 * abs(lhs)


def test_gradient_vs_finite_differences():
    rng = np.random.default_rng(3)
    F = FormCoefficients(4, 4, crandn(rng, 35))
    p = crandn(rng, 4)
    h = 1e-6
    fd = np.array([(F(p + h * e) - F(p - h * e)) / (2 * h) for e in np.eye(4)])
    assert np.allclose(fd, F.gradient(p), rtol=1e-7)


def test_polar_homogeneous_and_indeterminate():
    rng = np.random.default_rng(4)
    F = FormCoefficients(3, 5, crandn(rng, 35))
    p = crandn(rng, 5)
    assert fs_distance(polar_map(F, p), polar_map(F, (2 - 3j) * p)) < 1e-14
    exps = monomials(3, 2)
    G = FormCoefficients(2, 3, [1.0 if tuple(e) == (1, 1, 0) else 0.0 for e in exps])
    with pytest.raises(IndeterminacyPoint):
        polar_map(G, [0, 0, 1])
    with pytest.raises(ValueError):
        polar_map(FormCoefficients(1, 3, [1, 2, 3]), [1, 0, 0])


def test_fit_recovers_known_cubic():
    """Points on a random cubic surface (solved for the last coordinate)."""
    rng = np.random.default_rng(5)
    F = FormCoefficients(3, 4, crandn(rng, 20))
    pts = []
    while len(pts) < 30:
        head = crandn(rng, 3)
        # F(head, t) is a cubic polynomial in t
        ts = np.array([-1.0, 0.0, 1.0, 2.0])
        vals = [F(np.append(head, t)) for t in ts]
        poly = np.polyfit(ts, vals, 3)
        for t in np.roots(poly)[:1]:
            pts.append(np.append(head, t))
    G, gap = fit_hypersurface(pts, 3)
    assert gap > 1e3
    assert fs_distance(G.coeffs, F.coeffs) < 1e-8


def test_fit_rejects_underdetermined():
    rng = np.random.default_rng(6)
    with pytest.raises(ValueError):
        fit_hypersurface(crandn(rng, 10, 4), 3)
    # generic points lie on no cubic: the smallest singular value is not isolated
    with pytest.raises(NullspaceNotOneDimensional):
        fit_hypersurface(crandn(rng, 40, 3), 3)


def test_plain_cubic_fit_on_abelian_surface_is_not_unique(ctx):
    """Cubics through phi3(A): 165 - h0(9 Theta) = 84 of them, quadrics 45 - 36 = 9."""
    pts = sobol_points(ctx.periods, 180, 9)
    P = np.array([ctx.phi3(p) for p in pts])
    with pytest.raises(NullspaceNotOneDimensional):
        fit_hypersurface(P, 3)
    for d, expected in [(3, 84), (2, 9)]:
        s = np.linalg.svd(eval_monomials(P, monomials(9, d)), compute_uv=False)
        s = s / s[0]
        assert np.sum(s < 1e-9) == expected
        assert s[-expected - 1] > 1e-3


def test_form_json_roundtrip():
    rng = np.random.default_rng(7)
    F = FormCoefficients(3, 4, crandn(rng, 20), {"note": 1})
    G = FormCoefficients.from_json(json.loads(json.dumps(F.to_json())))
    assert np.allclose(F.coeffs, G.coeffs) and G.meta == {"note": 1}
    bad = F.to_json()
    bad["monomial_order"] = "other"
    with pytest.raises(ValueError):
        FormCoefficients.from_json(bad)
    with pytest.raises(ValueError):
        FormCoefficients(3, 4, np.ones(7))
