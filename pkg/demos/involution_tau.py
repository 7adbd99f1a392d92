"""Walk through the involution tau({a, b}) = Theta_a . Theta_b on the default curve.

    python demos/involution_tau.py
"""

import numpy as np

from kummerlab.curve_model import default_curve
from kummerlab.jacobian import (NonReduced, Reduced, random_point, scheme_distance, scheme_sum,
                                tangent_on_theta, tau)
from kummerlab.periods import compute_periods

pd = compute_periods(default_curve())
rng = np.random.default_rng(1)
print("Omega =\n", np.round(pd.omega, 6))

a, b = random_point(pd, rng), random_point(pd, rng)
zeta = Reduced(a, b)
t = tau(zeta)
print("\n{a, b}        ", zeta)
print("tau({a, b})   ", t)
print("tau twice, distance back to {a, b}:", f"{scheme_distance(tau(t), zeta):.2e}")
print("sum preserved:", f"{scheme_sum(t).distance(scheme_sum(zeta)):.2e}")

# each point c of tau({a, b}) is the parameter of a translate through a and b
for c in t.support:
    print("  {a, b} inside Theta_c, residual", f"{tangent_on_theta(c, zeta):.2e}")

# a tangent direction at a: tau sends it to a reduced pair symmetric about a
nz = NonReduced(a, [1, 0.5 - 0.25j])
tn = tau(nz)
print("\n(a, v)        ", nz)
print("tau((a, v))   ", tn)
print("tau twice:", f"{scheme_distance(tau(tn), nz):.2e}")
