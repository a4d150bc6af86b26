"""Lower convex envelope of the double well y^4 - y^2.

The envelope replaces the two wells by their common tangent chord: it is
-1/4 on [-1/sqrt(2), +1/sqrt(2)] and coincides with the function outside.
The script computes the envelope on a fine grid, checks it against the
closed form, pulls a Caratheodory witness at the origin, and writes
plot-ready CSV.
"""

import os

import numpy as np

import smooth_insert as si

OUT = os.path.join(os.path.dirname(__file__), "demo_out", "double_well")

dom = si.Box([-2.0], [2.0])
f = si.sample(dom, 2001, lambda y: y**4 - y**2)
res = si.lower_convex_envelope(f)

ys = f.axes()[0]
analytic = np.where(np.abs(ys) <= 1 / np.sqrt(2), -0.25, ys**4 - ys**2)
print(f"sup |envelope - analytic| = {np.abs(res.envelope.values - analytic).max():.3e}")
print(f"contact fraction: {res.contact_fraction():.3f}")

# the origin's envelope value is realized by a symmetric two-point combination
value, combo = si.envelope_lp_oracle(f, [0.0])
print(f"envelope(0) = {value:.8f}")
print("witness:", [round(float(p[0]), 6) for p in combo.points], "weights:", combo.weights)

os.makedirs(OUT, exist_ok=True)
with open(os.path.join(OUT, "envelope.csv"), "w") as fh:
    fh.write("y,f,fstar\n")
    for y, v, e in zip(ys, f.values, res.envelope.values):
        fh.write(f"{y!r},{v!r},{e!r}\n")
print(f"wrote {OUT}/envelope.csv")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.plot(ys, f.values, label="f")
    plt.plot(ys, res.envelope.values, label="envelope")
    plt.legend()
    plt.xlim(-1.4, 1.4)
    plt.ylim(-0.4, 0.6)
    plt.savefig(os.path.join(OUT, "envelope.png"), dpi=120)
    print(f"wrote {OUT}/envelope.png")
except ImportError:
    pass
