import itertools

import numpy as np
import pytest

from kummerlab.errors import GenericityViolation, PointNotOnSecant, PointNotOnTangent
from kummerlab.jacobian import (NonReduced, Reduced, alpha, flat_direction, random_point, tau,
                                tangent_on_theta, theta_residual, torsion_points)
from kummerlab.kummer_maps import random_triple, reduced_triple, tangent_triple
from kummerlab.periods import sample_curve_points
from kummerlab.proj_linalg import fs_distance, normalize
from kummerlab.riemann_theta import level_basis
from kummerlab.secant_terracini import (JetScheme, classify_meeting_secants, curvilinear_scheme,
                                        evaluation_matrix, fat_scheme, fiber_over_N,
                                        meeting_tangents_pair, nonseparated_four, planar_scheme,
                                        point_scheme, points_scheme, probe_grid, quartic_tangent,
                                        separates, tangent_scheme, terracini_double_point,
                                        terracini_two_points)


def on_tangent_line(ctx, a, v, t=0.5):
    pd = ctx.periods
    w = flat_direction(pd, v)
    J = level_basis(3, a.z, pd.omega, pd.delta, jets=((0, 0), (1, 0), (0, 1)))
    return normalize(J[0] + t * (w[0] * J[1] + w[1] * J[2]))


def test_scheme_lengths(periods):
    z = np.zeros(2, dtype=complex)
    w = np.array([1, 0.3j])
    assert len(point_scheme(z)) == 1
    assert len(tangent_scheme(z, w)) == 2
    assert len(curvilinear_scheme(z, w, 0.1, 0.2)) == 4
    assert len(planar_scheme(z, w)) == 4
    assert len(fat_scheme(z, w)) == 6
    assert len(point_scheme(z) + tangent_scheme(z, w)) == 3
    assert len(probe_grid()) == 25


def test_evaluation_matrix_rows_match_jets(ctx):
    pd = ctx.periods
    a = random_point(pd, np.random.default_rng(0))
    M = evaluation_matrix(ctx, points_scheme([a]))
    assert fs_distance(M[0], level_basis(3, a.z, pd.omega, pd.delta)) < 1e-12


def test_points_separated(ctx):
    rng = np.random.default_rng(1)
    for _ in range(5):
        pts = [random_point(ctx.periods, rng) for _ in range(4)]
        assert separates(ctx, points_scheme(pts[:3]))
        assert separates(ctx, points_scheme(pts))


def test_special_four_points_not_separated(ctx):
    rng = np.random.default_rng(2)
    for _ in range(3):
        Z, a = nonseparated_four(ctx.periods, rng)
        assert not separates(ctx, points_scheme(Z))
        for sub in itertools.combinations(Z, 3):
            assert separates(ctx, points_scheme(list(sub)))


def test_separation_is_monotone(ctx):
    rng = np.random.default_rng(3)
    pd = ctx.periods
    a = random_point(pd, rng)
    w = flat_direction(pd, [1, 0.7 - 0.2j])
    base = [point_scheme(random_point(pd, rng).z) for _ in range(2)]
    full = base[0] + base[1] + tangent_scheme(a.z, w)
    assert separates(ctx, full)
    parts = list(full.functionals)
    for k in range(1, len(parts)):
        for idx in itertools.combinations(range(len(parts)), k):
            sub = JetScheme([parts[i] for i in idx])
            assert separates(ctx, sub)


def test_nonseparated_schemes_lie_on_a_translate(ctx):
    """Among sampled length-4 schemes, the non-separated ones share a translate Theta_a.

    The translate is recovered without the construction: a lies on Theta_{z_i}
    for every i, so it is one of the two points of tau({z_1, z_2}).
    """
    rng = np.random.default_rng(4)
    pd = ctx.periods
    found = 0
    for k in range(8):
        if k % 2:
            Z = [random_point(pd, rng) for _ in range(4)]
        else:
            Z, _ = nonseparated_four(pd, rng)
        if separates(ctx, points_scheme(Z)):
            continue
        found += 1
        cands = tau(Reduced(Z[0], Z[1])).support
        res = [max(theta_residual(pd, (z - c).z)[0] for z in Z) for c in cands]
        assert min(res) < 1e-6
    assert found == 4


def test_terracini_two_points(ctx):
    rng = np.random.default_rng(5)
    pd = ctx.periods
    b, c = random_point(pd, rng), random_point(pd, rng)
    p = normalize(ctx.phi3(b) + 0.7 * ctx.phi3(c))
    assert terracini_two_points(ctx, b, c, p)
    assert not terracini_two_points(ctx, b, c, ctx.phi3(b))
    with pytest.raises(PointNotOnSecant):
        terracini_two_points(ctx, b, c, ctx.phi3(random_point(pd, rng)))
    b, c, e, _ = meeting_tangents_pair(pd, rng)
    p = normalize(ctx.phi3(b) + 0.7 * ctx.phi3(c))
    assert not terracini_two_points(ctx, b, c, p)


def test_terracini_double_point(ctx):
    rng = np.random.default_rng(6)
    pd = ctx.periods
    a = random_point(pd, rng)
    v = np.array([1, 0.4 - 0.3j])
    verdict = terracini_double_point(ctx, a, v, on_tangent_line(ctx, a, v))
    assert verdict and verdict.detail["sampled_claim"]
    assert not terracini_double_point(ctx, a, v, ctx.phi3(a))
    with pytest.raises(PointNotOnTangent):
        terracini_double_point(ctx, a, v, ctx.phi3(random_point(pd, rng)))
    b, v, e = quartic_tangent(pd, rng)
    verdict = terracini_double_point(ctx, b, v, on_tangent_line(ctx, b, v))
    assert not verdict and verdict.detail["failed"] is not None


def test_meeting_secants_classes(ctx):
    rng = np.random.default_rng(7)
    pd = ctx.periods
    a, b, c, d = (random_point(pd, rng) for _ in range(4))
    m = classify_meeting_secants(ctx, Reduced(a, b), Reduced(a, -(a + b)))
    assert m.kind == "MeetOffA" and 2 in m.conditions
    m = classify_meeting_secants(ctx, Reduced(a, b), Reduced(c, d))
    assert m.kind == "Disjoint" and m.conditions == []
    pts = sample_curve_points(pd.curve, 4, seed=int(rng.integers(1 << 30)))
    al = [alpha(pd, p) for p in pts]
    e = random_point(pd, rng)
    m = classify_meeting_secants(ctx, Reduced(al[0] + e, al[1] + e), Reduced(al[2] + e, al[3] + e))
    assert m.kind == "MeetOnA" and fs_distance(m.point, ctx.phi3(e)) < 1e-6
    m = classify_meeting_secants(ctx, Reduced(a, -(a + a)), NonReduced(a, [1, 0.2j]))
    assert m.kind == "MeetOffA" and 3 in m.conditions
    t = torsion_points(pd, 3)[41]
    m = classify_meeting_secants(ctx, NonReduced(t, [1, 0.2j]), NonReduced(t, [1, -0.5]))
    assert 4 in m.conditions


def test_classification_symmetric(ctx):
    rng = np.random.default_rng(8)
    pd = ctx.periods
    a, b, c = (random_point(pd, rng) for _ in range(3))
    for z1, z2 in [(Reduced(a, b), Reduced(a, -(a + b))), (Reduced(a, b), Reduced(b, c)),
                   (Reduced(a, -(a + a)), NonReduced(a, [1, 0.3]))]:
        m1, m2 = classify_meeting_secants(ctx, z1, z2), classify_meeting_secants(ctx, z2, z1)
        assert m1.kind == m2.kind and m1.conditions == m2.conditions


def test_condition_one_means_common_translate(ctx):
    rng = np.random.default_rng(9)
    pd = ctx.periods
    pts = sample_curve_points(pd.curve, 4, seed=3)
    e = random_point(pd, rng)
    al = [alpha(pd, p) + e for p in pts]
    z1, z2 = Reduced(al[0], al[1]), Reduced(al[2], al[3])
    assert tangent_on_theta(e, z1) < 1e-7 and tangent_on_theta(e, z2) < 1e-7


def test_fiber_over_N(ctx):
    rng = np.random.default_rng(10)
    xi = random_triple(ctx.periods, rng)
    count, info = fiber_over_N(ctx, xi, pool=30, rng=rng, detail=True)
    assert count == 3 and info["distinct"] > 1e-3 and info["others"] > 1e-3


def test_fiber_genericity_guard(ctx):
    rng = np.random.default_rng(11)
    a = random_point(ctx.periods, rng)
    with pytest.raises(GenericityViolation):
        fiber_over_N(ctx, reduced_triple(a, a))
    with pytest.raises(GenericityViolation):
        fiber_over_N(ctx, tangent_triple(a, [1, 0]))


def test_separates_rejects_long_schemes(ctx):
    rng = np.random.default_rng(12)
    with pytest.raises(ValueError):
        separates(ctx, points_scheme([random_point(ctx.periods, rng) for _ in range(7)]))
