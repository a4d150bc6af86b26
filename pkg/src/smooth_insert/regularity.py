"""Numerical semi-concavity, semi-convexity and C^{1,omega} estimates.

A function is semi-concave with modulus omega when each point admits a
linear upper support up to error C ||v|| omega(||v||). Averaging that
bound at x + v and x - v eliminates the linear part, so the grid tests
the symmetric surrogate

    f(x+v) + f(x-v) - 2 f(x) <= 2 C ||v|| omega(||v||)

and the estimator returns the smallest C consistent with all tested
(point, offset) pairs, clamped at zero. Estimates are lower bounds for
any continuum constant; callers that need an upper bound (the insertion
pipeline's modulation constant) must verify a posteriori.

The C^{1,omega} estimate compares finite-difference gradients across
nearby interior points: K = max ||grad(y) - grad(z)|| / omega(||y - z||).
It inherits the O(spacing^2) gradient bias in smooth regions and O(1/
spacing) divergence across kinks, which is exactly what makes it a
usable non-smoothness detector.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import EstimationError, InputError
from .field import _shifted_valid, gradient_all, shift_mask, shift_values


class ModulusSpec:
    """A modulus of continuity: linear k*t or Hoelder t**alpha.

    Continuous, non-decreasing, concave on t >= 0 with omega(0) = 0, and
    satisfying the scaling bound omega(lambda t) <= max(1, lambda) omega(t).
    """

    def __init__(self, kind, k=1.0, alpha=0.5):
        if kind not in ("linear", "holder"):
            raise InputError(f"modulus kind must be 'linear' or 'holder', got {kind!r}")
        self.kind = kind
        if kind == "linear":
            self.k = float(k)
            if self.k < 0:
                raise InputError(f"linear modulus slope must be >= 0, got {self.k}")
        else:
            self.alpha = float(alpha)
            if not 0 < self.alpha <= 1:
                raise InputError(f"Hoelder exponent must be in (0, 1], got {self.alpha}")

    @classmethod
    def linear(cls, k=1.0):
        return cls("linear", k=k)

    @classmethod
    def holder(cls, alpha):
        return cls("holder", alpha=alpha)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise InputError("modulus argument must be >= 0")
        if self.kind == "linear":
            return self.k * t
        return t**self.alpha

    def to_json(self):
        if self.kind == "linear":
            return {"kind": "linear", "k": self.k}
        return {"kind": "holder", "alpha": self.alpha}

    @classmethod
    def from_json(cls, obj):
        if obj["kind"] == "linear":
            return cls.linear(obj["k"])
        return cls.holder(obj["alpha"])

    def __repr__(self):
        if self.kind == "linear":
            return f"ModulusSpec.linear({self.k})"
        return f"ModulusSpec.holder({self.alpha})"


@dataclass
class RegularityEstimate:
    """Largest defining quotient observed over the tested pairs."""

    constant: float
    worst_point: tuple = ()
    worst_offset: tuple = ()
    sample_count: int = 0
    modulus: ModulusSpec = dc_field(default=None, repr=False)

    def to_json(self):
        return {
            "constant": self.constant,
            "worst_point": list(self.worst_point),
            "worst_offset": list(self.worst_offset),
            "sample_count": self.sample_count,
            "modulus": self.modulus.to_json() if self.modulus is not None else None,
        }


def canonical_directions(dim):
    """Axis and diagonal directions in {-1,0,1}^n, one per +/- pair, sorted."""
    dirs = []
    for raw in np.ndindex(*(3,) * dim):
        d = np.array(raw) - 1
        if not d.any():
            continue
        nz = d[d != 0]
        if nz[0] < 0:  # keep one representative of {d, -d}
            continue
        dirs.append(d)
    dirs.sort(key=lambda v: tuple(v))
    return dirs


def _iter_offsets(field, max_steps, all_pairs):
    if all_pairs:
        half = [s - 1 for s in field.shape]
        for raw in np.ndindex(*(2 * h + 1 for h in half)):
            off = np.array(raw) - half
            if not off.any():
                continue
            nz = off[off != 0]
            if nz[0] < 0:
                continue
            yield off
    else:
        for d in canonical_directions(field.dim):
            for k in range(1, max_steps + 1):
                off = k * d
                if np.all(np.abs(off) < np.array(field.shape)):
                    yield off


def estimate_semiconcavity(field, modulus, max_steps=3, all_pairs=False):
    """Smallest C with f(x+v)+f(x-v)-2f(x) <= 2 C ||v|| omega(||v||) on tested pairs.

    Offsets run over axis and diagonal directions with 1..max_steps steps
    (``all_pairs=True`` tests every symmetric pair at quadratic cost).
    Ties break on the lexicographically smallest grid index, so repeated
    runs reproduce the same witness.
    """
    if any(s < 3 for s in field.shape):
        raise EstimationError(f"need >= 3 samples per axis to test symmetric pairs, got {field.shape}")
    v, m = field.values, field.mask
    best = -np.inf
    best_point = None
    best_offset = None
    count = 0
    for off in _iter_offsets(field, max_steps, all_pairs):
        ok = m & shift_mask(m, off) & shift_mask(m, -off)
        if not ok.any():
            continue
        up = shift_values(v, off)
        dn = shift_values(v, -off)
        sd = np.where(ok, up + dn - 2.0 * v, -np.inf)
        norm_v = float(np.linalg.norm(off * field.spacing))
        denom = 2.0 * norm_v * float(modulus(norm_v))
        if denom <= 0:
            continue
        quot = sd / denom
        count += int(ok.sum())
        local = float(quot.max())
        if local > best:
            best = local
            best_point = tuple(int(i) for i in np.unravel_index(int(np.argmax(quot)), field.shape))
            best_offset = tuple(int(s) for s in off)
    if count == 0:
        raise EstimationError("no valid symmetric pair to estimate on")
    constant = max(best, 0.0)
    return RegularityEstimate(constant, best_point, best_offset, count, modulus)


def estimate_semiconvexity(field, modulus, max_steps=3, all_pairs=False):
    """Semi-convexity constant of f = semi-concavity constant of -f."""
    est = estimate_semiconcavity(field.with_values(-field.values), modulus, max_steps, all_pairs)
    est.modulus = modulus
    return est


def estimate_c1omega(field, modulus, neighborhood_radius=None, core_mask=None):
    """Gradient-modulus constant: max ||grad(y)-grad(z)|| / omega(||y-z||).

    Gradients are central differences on the interior core (samples whose
    axis neighbors are all valid); pairs range over offsets with
    ||offset|| <= neighborhood_radius (default 3 max-spacings). Pass
    ``core_mask`` to restrict the comparison to a fixed subregion, which
    keeps estimates comparable across grid refinements near barriers.
    """
    if neighborhood_radius is None:
        neighborhood_radius = 3.0 * float(np.max(field.spacing))
    grad, _ = gradient_all(field)
    core = field.mask.copy()
    for a in range(field.dim):
        core &= _shifted_valid(field.mask, a, +1) & _shifted_valid(field.mask, a, -1)
    if core_mask is not None:
        core &= np.asarray(core_mask, dtype=bool).reshape(field.shape)
    if not core.any():
        raise EstimationError("interior core is empty; cannot form central differences")

    best = -np.inf
    best_point = None
    best_offset = None
    count = 0
    max_steps = [int(np.floor(neighborhood_radius / h)) for h in field.spacing]
    for raw in np.ndindex(*(2 * ms + 1 for ms in max_steps)):
        off = np.array(raw) - max_steps
        if not off.any():
            continue
        nz = off[off != 0]
        if nz[0] < 0:
            continue
        dist = float(np.linalg.norm(off * field.spacing))
        if dist > neighborhood_radius or dist == 0.0:
            continue
        ok = core & shift_mask(core, off)
        if not ok.any():
            continue
        diff = np.zeros(field.shape)
        for a in range(field.dim):
            comp = grad[..., a]
            shifted = shift_values(comp, off)
            diff += np.where(ok, (shifted - comp) ** 2, 0.0)
        quot = np.where(ok, np.sqrt(diff) / float(modulus(dist)), -np.inf)
        count += int(ok.sum())
        local = float(quot.max())
        if local > best:
            best = local
            best_point = tuple(int(i) for i in np.unravel_index(int(np.argmax(quot)), field.shape))
            best_offset = tuple(int(s) for s in off)
    if count == 0:
        raise EstimationError("no gradient pair within the neighborhood radius")
    return RegularityEstimate(max(best, 0.0), best_point, best_offset, count, modulus)
