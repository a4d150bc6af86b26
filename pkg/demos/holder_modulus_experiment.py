"""EXPLORATORY: insertion under a Hoelder modulus.

Whether a C^{1,omega} field can always be inserted between a semi-convex
and a semi-concave pair for a Hoelder modulus omega(t) = t^alpha is an
open question; the quadratic modulation argument only covers the linear
case. This experiment runs the pipeline anyway on the prototype pair
f = -|y|^(1+alpha), g = +|y|^(1+alpha) and tracks two quantities under
refinement: the modulation constant K the pipeline needs (expected to
blow up like spacing^(alpha-1), since no finite quadratic dominates a
Hoelder kink), and the measured C^{1,t^alpha} constant of the result.

There is no pass/fail here -- only measurements.
"""

import numpy as np

import smooth_insert as si
from smooth_insert.regularity import ModulusSpec

for alpha in (0.3, 0.5, 0.7):
    mod = ModulusSpec.holder(alpha)
    dom = si.Ball([0.0], 1.0)
    print(f"alpha = {alpha}:")
    for shape in (201, 401, 801):
        g = si.sample(dom, shape, lambda y: np.abs(y) ** (1 + alpha))
        f = si.sample(dom, shape, lambda y: -np.abs(y) ** (1 + alpha))
        res = si.insert_c11(f, g)
        est = si.estimate_c1omega(res.h, mod)
        h = f.spacing[0]
        print(f"  n={shape:4d} (h={h:.4f}): K = {res.K:9.2f} "
              f"(h^(alpha-1) = {h ** (alpha - 1):8.1f}), "
              f"measured C^(1,t^{alpha}) of h = {est.constant:.4f}")
    print()

print("K grows with refinement as expected; whether the measured Hoelder")
print("constant of h staying bounded reflects a theorem is exactly the open part.")
