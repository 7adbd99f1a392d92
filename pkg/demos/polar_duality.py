"""The Coble cubic and its polar map, checked against theta products.

Builds the level-3 embedding of the Jacobian of y^2 = x^5 - x, fits the
Coble cubic, then for a random triple {a, b, c} with a + b + c = 0:

  * intersects the three spans of Theta_a, Theta_b, Theta_c (one point),
  * applies the polar map of the cubic to it,
  * compares with the |3 Theta| point of Theta_a + Theta_b + Theta_c.

    python demos/polar_duality.py
"""

import numpy as np

from kummerlab.coble_duality import EmbeddingContext
from kummerlab.curve_model import default_curve
from kummerlab.kummer_maps import (contracted_triple, distance_to_A, phi_D, phi_D_secants,
                                   phi_D_spans, phi_mu_theta, random_triple)
from kummerlab.periods import compute_periods
from kummerlab.proj_linalg import fs_distance

pd = compute_periods(default_curve())
ctx = EmbeddingContext(pd, 42)
F = ctx.coble()
print(f"Coble cubic: {F.coeffs.size} coefficients, nullspace gap {F.meta['gap']:.2e}")

rng = np.random.default_rng(3)
xi = random_triple(pd, rng)
p, S = phi_D_spans(ctx, xi)
q, _ = phi_D_secants(ctx, xi)
print(f"\nspans meet in a point; smallest singular values {np.round(S.singular_values[:2], 10)}")
print(f"secant-line route agrees to {fs_distance(p, q):.2e}")
print(f"distance of the point from A (Coble gradient) {distance_to_A(ctx, p):.3f}")

lhs = ctx.coble_polar(p)
rhs = phi_mu_theta(ctx, xi, 2)
print(f"polar image vs theta product: {fs_distance(lhs, rhs.coeffs):.2e}"
      f"  (expansion residual {rhs.residual:.1e})")

# triples inside one translate Theta_e collapse onto A
xi, e = contracted_triple(pd, rng)
p = phi_D(ctx, xi, cross_check=False)
print(f"\ntriple inside Theta_e goes to phi3(e): {fs_distance(p, ctx.phi3(e)):.2e}")
