"""When do two secant lines of the level-3 abelian surface meet?

Three constructions, each classified numerically and by Jacobian arithmetic.

    python demos/secant_meetings.py
"""

import numpy as np

from kummerlab.coble_duality import EmbeddingContext
from kummerlab.curve_model import default_curve
from kummerlab.jacobian import Reduced, alpha, random_point
from kummerlab.periods import compute_periods, sample_curve_points
from kummerlab.secant_terracini import classify_meeting_secants

pd = compute_periods(default_curve())
ctx = EmbeddingContext(pd, 42)
rng = np.random.default_rng(5)
a, b, c, d = (random_point(pd, rng) for _ in range(4))

al = [alpha(pd, x) for x in sample_curve_points(pd.curve, 4, seed=8)]
e = random_point(pd, rng)

cases = {
    "{a,b} and {c,d}, generic": (Reduced(a, b), Reduced(c, d)),
    "{a,b} and {a,-a-b}": (Reduced(a, b), Reduced(a, -(a + b))),
    "both on one translate Theta_e": (Reduced(al[0] + e, al[1] + e), Reduced(al[2] + e, al[3] + e)),
}
for label, (z1, z2) in cases.items():
    m = classify_meeting_secants(ctx, z1, z2)
    print(f"{label:<32} {m.kind:<9} conditions {m.conditions}  gap {m.gap:.1e}")
