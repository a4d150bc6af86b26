"""The insertion pipeline, stage by stage.

Between the semi-convex vee f = |y| - 1 and the semi-concave tent
g = 1 - |y| on the unit ball, the pipeline finds a Lipschitz-gradient h:

    modulate:   F = f + K/2 y^2 + 1/(1 - y^2), same for G
    convexify:  G* = lower convex envelope of G   (F <= G* <= G)
    demodulate: h = G* - K/2 y^2 - 1/(1 - y^2)

The quadratic convexifies the semi-convex side; the barrier makes the
modulated fields coercive so the envelope theorem applies.
"""

import os

import numpy as np

import smooth_insert as si

OUT = os.path.join(os.path.dirname(__file__), "demo_out", "insert_vees")

dom = si.Ball([0.0], 1.0)
f = si.sample(dom, 401, lambda y: np.abs(y) - 1)
g = si.sample(dom, 401, lambda y: 1 - np.abs(y))

res = si.insert_c11(f, g)
m = res.h.mask
print(f"modulation constant K = {res.K:.6f} (escalations: {res.escalations})")
print(f"sandwich violation: {res.sandwich_violation:.2e}")
print(f"intermediate inequality: max(F - G*) = {res.fg_gap:.2e}, max(G* - G) = {res.env_gap:.2e}")
print(f"gradient-Lipschitz estimate of h: {res.c11_estimate.constant:.3f} "
      f"(assertable ceiling {res.c11_ceiling:.1f})")
print(f"h(0) = {res.h.values[200]:.6f}, bounds f(0) = -1, g(0) = 1")

ys = f.axes()[0]
os.makedirs(OUT, exist_ok=True)
with open(os.path.join(OUT, "sandwich.csv"), "w") as fh:
    fh.write("y,f,h,g\n")
    for k in np.flatnonzero(m):
        fh.write(f"{ys[k]!r},{f.values[k]!r},{res.h.values[k]!r},{g.values[k]!r}\n")
print(f"wrote {OUT}/sandwich.csv")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.plot(ys[m], f.values[m], label="f = |y| - 1")
    plt.plot(ys[m], g.values[m], label="g = 1 - |y|")
    plt.plot(ys[m], res.h.values[m], label="inserted h")
    plt.legend()
    plt.savefig(os.path.join(OUT, "sandwich.png"), dpi=120)
    print(f"wrote {OUT}/sandwich.png")
except ImportError:
    pass
