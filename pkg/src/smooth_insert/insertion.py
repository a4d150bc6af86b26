"""Insertion of a C^{1,1} field between a semi-convex f and a semi-concave g.

Pipeline (for f <= g on a ball or box):

  1. estimate the semi-convexity constant of f and pick K;
  2. modulate: F = f + K/2 ||y - y0||^2 + barrier, same for G from g
     (the barrier is 1/(R^2 - ||y - x||^2) on balls and the per-axis sum
     of inverse face distances on boxes; both are convex and blow up at
     the boundary, making F coercive);
  3. convexify: G* = lower convex envelope of G, check F <= G* <= G;
  4. demodulate: h = G* - quadratic - barrier, then f <= h <= g.

The semi-convexity estimate is a lower bound of the continuum constant,
so K starts at twice the estimate plus a safety term and doubles until
the discrete convexity of F and the inequality F <= G* both verify, up
to a capped number of doublings. Strict insertion adds a smooth bump sum
phi <= (g - f)/3 that is positive away from the coincidence set, then
inserts between f + phi and g - phi.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.ndimage import distance_transform_edt

from .envelope import lower_convex_envelope, min_symmetric_second_difference, tol_env_abs
from .errors import CoverError, DomainError, InputError, ModulationError, PreconditionError
from .field import ScalarField, gradient_all, interior_core_mask
from .regularity import (
    ModulusSpec,
    estimate_c1omega,
    estimate_semiconcavity,
    estimate_semiconvexity,
)

logger = logging.getLogger(__name__)

DEFAULT_TOL_INS = 1e-8


# -- barriers -----------------------------------------------------------------

def barrier_distance(domain, points):
    """Distance from each point to the barrier singularity surface."""
    pts = np.atleast_2d(points)
    if domain.kind == "ball":
        return domain.radius - np.linalg.norm(pts - domain.center, axis=1)
    lower, upper = domain.bounds()
    return np.minimum((pts - lower).min(axis=1), (upper - pts).min(axis=1))


def barrier_values(domain, points):
    """Barrier 1/(R^2-||y-x||^2) on balls, sum_i 1/(y_i-a_i)+1/(b_i-y_i) on boxes."""
    pts = np.atleast_2d(points)
    if domain.kind == "ball":
        gap = domain.radius**2 - np.sum((pts - domain.center) ** 2, axis=1)
        return 1.0 / gap
    lower, upper = domain.bounds()
    return (1.0 / (pts - lower)).sum(axis=1) + (1.0 / (upper - pts)).sum(axis=1)


def barrier_hessian_bound(domain, points):
    """Pointwise upper bound on the barrier Hessian operator norm."""
    pts = np.atleast_2d(points)
    if domain.kind == "ball":
        r2 = np.sum((pts - domain.center) ** 2, axis=1)
        u = domain.radius**2 - r2
        return 2.0 / u**2 + 8.0 * r2 / u**3
    lower, upper = domain.bounds()
    return np.max(2.0 / (pts - lower) ** 3 + 2.0 / (upper - pts) ** 3, axis=1)


def _quadratic(domain, points, K):
    center = np.mean(np.stack(domain.bounds()), axis=0)
    return 0.5 * K * np.sum((np.atleast_2d(points) - center) ** 2, axis=1)


def modulate(field, K, domain=None):
    """field + K/2 ||y - y0||^2 + barrier(y) at valid samples.

    The quadratic is centered at the domain center y0; this differs from
    an origin-centered quadratic by an affine function, which every later
    pipeline stage commutes with, and keeps values scaled near the grid.
    Raises DomainError if a valid sample lies on or outside the barrier
    singularity.
    """
    domain = domain or field.domain
    pts = field.points()
    dist = barrier_distance(domain, pts).reshape(field.shape)
    if np.any((dist <= 0) & field.mask):
        bad = np.argwhere((dist <= 0) & field.mask)[0]
        raise DomainError(f"valid sample {tuple(bad)} on or outside the barrier singularity")
    flat = field.mask.ravel()
    extra = np.zeros(len(pts))
    extra[flat] = _quadratic(domain, pts[flat], K) + barrier_values(domain, pts[flat])
    values = field.values + extra.reshape(field.shape)
    return field.with_values(values)


def demodulate(field, K, domain=None):
    """Inverse of modulate with the same K and domain."""
    domain = domain or field.domain
    pts = field.points()
    flat = field.mask.ravel()
    extra = np.zeros(len(pts))
    extra[flat] = _quadratic(domain, pts[flat], K) + barrier_values(domain, pts[flat])
    values = field.values - extra.reshape(field.shape)
    return field.with_values(values)


# -- options and results ------------------------------------------------------

@dataclass
class InsertionOptions:
    tol_ins: float = DEFAULT_TOL_INS
    max_steps: int = 3              # offset radius for convexity checks / estimates
    core_margin_frac: float = 0.15  # fixed core for refinement-comparable C11 estimates
    k_cap_doublings: int = 10
    bump_radius: float = None       # strict insertion; default extent/6
    extra_mask: np.ndarray = None   # restrict the working region (e.g. U_a)
    c11_radius: float = None


@dataclass
class InsertionResult:
    h: ScalarField
    K: float
    barrier_kind: str
    sandwich_violation: float
    coincidence_mask: np.ndarray
    c11_estimate: object
    c11_ceiling: float
    semiconvexity_f: float
    semiconcavity_g: float
    escalations: int
    fg_gap: float          # max(F - G*) at exit, the intermediate inequality
    env_gap: float         # max(G* - G) at exit (envelope minorant check)
    partition: object = None   # BumpPartition for strict insertion
    strict_margin: float = None

    def to_json(self):
        valid = self.h.mask
        return {
            "K": self.K,
            "barrier_kind": self.barrier_kind,
            "sandwich_violation": self.sandwich_violation,
            "coincidence_fraction": float(self.coincidence_mask[valid].sum()) / max(1, int(valid.sum())),
            "c11_estimate": self.c11_estimate.to_json(),
            "c11_ceiling": self.c11_ceiling,
            "semiconvexity_f": self.semiconvexity_f,
            "semiconcavity_g": self.semiconcavity_g,
            "escalations": self.escalations,
            "fg_gap": self.fg_gap,
            "env_gap": self.env_gap,
            "strict_margin": self.strict_margin,
        }


def coincidence_set(f, g, tol=None):
    """Mask of shared valid samples with |f - g| <= tol (default tol_ins)."""
    if f.shape != g.shape or f.domain != g.domain:
        raise InputError("coincidence set needs fields on a shared grid")
    tol = DEFAULT_TOL_INS if tol is None else tol
    return f.mask & g.mask & (np.abs(f.values - g.values) <= tol)


# -- the local lemma: modulate, convexify, demodulate -------------------------

def _working_mask(f, g, domain, options):
    mask = f.mask & g.mask
    if options.extra_mask is not None:
        mask = mask & np.asarray(options.extra_mask, dtype=bool).reshape(f.shape)
    dist = barrier_distance(domain, f.points()).reshape(f.shape)
    mask = mask & (dist >= 2.0 * float(np.max(f.spacing)))
    return mask


def insert_c11(f, g, domain=None, options=None):
    """Insert a C^{1,1}-regular field h with f <= h <= g on the shared grid.

    Preconditions: shared grid, f <= g + tol_ins on the working samples.
    The working region keeps two cells of clearance from the barrier
    singularity so modulated values stay in a bounded dynamic range.
    """
    options = options or InsertionOptions()
    if f.shape != g.shape or f.domain != g.domain:
        raise InputError("insertion needs f and g on a shared grid")
    domain = domain or f.domain
    mask = _working_mask(f, g, domain, options)
    if not mask.any():
        raise PreconditionError("working region is empty after barrier clearance")

    gap = np.where(mask, f.values - g.values, -np.inf)
    worst = float(gap.max())
    if worst > options.tol_ins:
        at = tuple(int(i) for i in np.unravel_index(int(np.argmax(gap)), f.shape))
        raise PreconditionError(
            f"f > g by {worst:.3e} at sample {at} (point {f.point(at).tolist()})"
        )

    fw = ScalarField(f.domain, f.shape, f.values, mask=mask)
    gw = ScalarField(g.domain, g.shape, g.values, mask=mask)
    modulus = ModulusSpec.linear(1.0)
    c_f = estimate_semiconvexity(fw, modulus, max_steps=options.max_steps).constant
    c_g = estimate_semiconcavity(gw, modulus, max_steps=options.max_steps).constant

    lower, upper = domain.bounds()
    extent = float(np.min(upper - lower))
    k_safety = float(np.max(f.spacing)) / extent * max(1.0, 2.0 * c_f) + 1e-9
    k0 = 2.0 * c_f + k_safety

    K = k0
    escalations = 0
    result = None
    while True:
        F = modulate(fw, K, domain)
        G = modulate(gw, K, domain)
        tol_conv = tol_env_abs(F)
        conv_ok = min_symmetric_second_difference(F, options.max_steps) >= -tol_conv
        env = lower_convex_envelope(G)
        Gstar = env.envelope
        fg = np.where(mask, F.values - Gstar.values, -np.inf)
        fg_gap = float(fg.max())
        fg_ok = fg_gap <= tol_env_abs(G)
        if conv_ok and fg_ok:
            result = (F, G, env, fg_gap)
            break
        if escalations >= options.k_cap_doublings:
            raise ModulationError(
                f"modulation failed: K escalated to {K:.3e} (start {k0:.3e}); "
                f"convexity ok={conv_ok}, max(F - G*)={fg_gap:.3e}"
            )
        K *= 2.0
        escalations += 1
        logger.debug("escalating modulation constant to K=%g", K)

    F, G, env, fg_gap = result
    h = demodulate(env.envelope, K, domain)
    env_gap = float(np.where(mask, env.envelope.values - G.values, -np.inf).max())

    viol_low = np.where(mask, fw.values - h.values, -np.inf).max()
    viol_high = np.where(mask, h.values - gw.values, -np.inf).max()
    sandwich = max(0.0, float(viol_low), float(viol_high))

    core = interior_core_mask(h, options.core_margin_frac) & mask
    if not core.any():
        core = mask
    c11 = estimate_c1omega(h, modulus, neighborhood_radius=options.c11_radius, core_mask=core)
    b_core = float(barrier_hessian_bound(domain, h.points()[core.ravel()]).max())
    ceiling = 4.0 * (K + c_g + b_core)

    return InsertionResult(
        h=h,
        K=K,
        barrier_kind=domain.kind,
        sandwich_violation=sandwich,
        coincidence_mask=coincidence_set(fw, gw, options.tol_ins),
        c11_estimate=c11,
        c11_ceiling=ceiling,
        semiconvexity_f=c_f,
        semiconcavity_g=c_g,
        escalations=escalations,
        fg_gap=fg_gap,
        env_gap=env_gap,
    )


# -- strict insertion via smooth bump sums ------------------------------------

def bump_profile(t):
    """Standard compactly supported smooth profile, normalized to peak 1."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    ti = t[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - ti**2))
    return out


@dataclass
class BumpPartition:
    """Finite sum of smooth bumps with sum(beta_i bump_i) <= Phi pointwise."""

    centers: np.ndarray          # (k, n)
    radius: float
    coefficients: np.ndarray     # beta_i
    phi: np.ndarray = None       # evaluated sum on the grid
    margin_floor: float = 0.0    # min phi over samples beyond one radius from E
    max_overlap: int = 0

    def evaluate(self, points):
        pts = np.atleast_2d(points)
        total = np.zeros(len(pts))
        for c, beta in zip(self.centers, self.coefficients):
            t = np.linalg.norm(pts - c, axis=1) / self.radius
            total += beta * bump_profile(t)
        return total


def _distance_to_mask(grid_field, mask):
    """Euclidean distance from every sample to the True samples of ``mask``."""
    if not mask.any():
        return np.full(grid_field.shape, np.inf)
    if grid_field.dim == 1:
        return distance_transform_edt(~mask[None, :], sampling=[1.0, grid_field.spacing[0]])[0]
    return distance_transform_edt(~mask, sampling=grid_field.spacing)


def build_bump_partition(grid_field, coincidence, phi_cap, radius=None):
    """Greedy bump cover of the samples at distance > radius from ``coincidence``.

    Centers are chosen in row-major scan order with minimum separation
    0.7 radius, so every qualifying sample sits within 0.7 radius of a
    center; beta_i is the Phi-infimum over the bump's support divided by
    the worst overlap count, which keeps the bump sum below phi_cap.
    """
    lower, upper = grid_field.domain.bounds()
    if radius is None:
        radius = max(float(np.min(upper - lower)) / 6.0, 3.0 * float(np.max(grid_field.spacing)))
    d_coin = _distance_to_mask(grid_field, coincidence)
    qualifying = grid_field.mask & (d_coin > radius)
    pts = grid_field.points()
    flat_valid = grid_field.mask.ravel()
    cap = np.asarray(phi_cap, dtype=float).reshape(grid_field.shape)

    order = np.flatnonzero(qualifying.ravel())
    centers = []
    min_dist = np.full(len(pts), np.inf)
    for flat in order:
        if min_dist[flat] > 0.7 * radius:
            c = pts[flat]
            centers.append(c)
            np.minimum(min_dist, np.linalg.norm(pts - c, axis=1), out=min_dist)
    if not centers:
        return BumpPartition(np.zeros((0, grid_field.dim)), radius, np.zeros(0),
                             phi=np.zeros(grid_field.shape))

    centers = np.array(centers)
    support = np.zeros((len(centers), len(pts)), dtype=bool)
    alphas = np.zeros(len(centers))
    for i, c in enumerate(centers):
        near = (np.linalg.norm(pts - c, axis=1) < radius) & flat_valid
        support[i] = near
        alphas[i] = float(cap.ravel()[near].min())
    overlap = int(support.sum(axis=0).max())
    betas = alphas / max(1, overlap)

    phi = np.zeros(len(pts))
    for c, beta in zip(centers, betas):
        t = np.linalg.norm(pts - c, axis=1) / radius
        phi += beta * bump_profile(t)
    phi = np.where(flat_valid, phi, 0.0).reshape(grid_field.shape)

    margin = float(phi[qualifying].min()) if qualifying.any() else 0.0
    part = BumpPartition(centers, radius, betas, phi=phi, margin_floor=margin, max_overlap=overlap)
    excess = float((phi - np.where(grid_field.mask, cap, np.inf)).max())
    if excess > 1e-12 * max(1.0, float(np.abs(cap[grid_field.mask]).max())):
        raise RuntimeError(f"bump sum exceeds its cap by {excess:.3e}")  # internal invariant
    return part


def insert_strict(f, g, domain=None, options=None):
    """Insertion with f < h < g away from the coincidence set E = {f = g}.

    Builds phi = sum(beta_i bump_i) <= (g - f)/3, positive at samples
    beyond one bump radius from E, and inserts between f + phi and
    g - phi. On E itself h = f = g is forced by the sandwich.
    """
    options = options or InsertionOptions()
    if f.shape != g.shape or f.domain != g.domain:
        raise InputError("insertion needs f and g on a shared grid")
    domain = domain or f.domain
    mask = _working_mask(f, g, domain, options)
    if not mask.any():
        raise PreconditionError("working region is empty after barrier clearance")
    fw = ScalarField(f.domain, f.shape, f.values, mask=mask)
    gw = ScalarField(g.domain, g.shape, g.values, mask=mask)

    E = coincidence_set(fw, gw, options.tol_ins)
    Phi = np.where(mask, np.maximum(gw.values - fw.values, 0.0) / 3.0, 0.0)
    partition = build_bump_partition(fw, E, Phi, radius=options.bump_radius)
    phi = partition.phi

    f2 = fw.with_values(np.where(mask, fw.values + phi, fw.values))
    g2 = gw.with_values(np.where(mask, gw.values - phi, gw.values))
    result = insert_c11(f2, g2, domain, options)
    result.coincidence_mask = E
    result.partition = partition
    result.strict_margin = partition.margin_floor
    # report the sandwich against the original pair, not the padded one
    h = result.h
    viol_low = np.where(h.mask, fw.values - h.values, -np.inf).max()
    viol_high = np.where(h.mask, h.values - gw.values, -np.inf).max()
    result.sandwich_violation = max(0.0, float(viol_low), float(viol_high))
    return result


# -- gluing local insertions over a ball cover --------------------------------

def _plateau(t, inner=0.7):
    """C^inf transition: 1 for t <= inner, 0 for t >= 1."""
    t = np.asarray(t, dtype=float)
    u = np.clip((t - inner) / (1.0 - inner), 0.0, 1.0)

    def E(s):
        out = np.zeros_like(s)
        pos = s > 0
        out[pos] = np.exp(-1.0 / s[pos])
        return out

    a = E(1.0 - u)
    b = E(u)
    return a / (a + b)


@dataclass
class GlueResult:
    field: ScalarField
    c11_estimate: object
    partition_gradient_bound: float
    weight_sum_min: float


def glue(local_results, target, cover=None):
    """Combine local insertions over overlapping balls into one field.

    ``target`` is any field on the destination grid (its mask defines the
    region to cover); ``cover`` is a list of (center, radius) matching
    ``local_results`` and defaults to the local ball domains. The glued
    value is a convex combination of local values, so any bound shared by
    every local field (such as f <= h_i <= g) survives gluing.
    """
    if target.dim not in (1, 2):
        raise InputError("gluing is implemented for n in {1, 2}")
    locals_ = [r.h if isinstance(r, InsertionResult) else r for r in local_results]
    if cover is None:
        cover = []
        for hloc in locals_:
            if hloc.domain.kind != "ball":
                raise InputError("cover can only default to ball-shaped local domains")
            cover.append((hloc.domain.center, hloc.domain.radius))
    if len(cover) != len(locals_):
        raise InputError("cover and local_results lengths differ")

    pts = target.points()
    tvalid = target.mask.ravel()
    raw = np.zeros((len(locals_), len(pts)))
    for i, (hloc, (center, radius)) in enumerate(zip(locals_, cover)):
        hspace = float(np.max(hloc.spacing))
        r_use = radius - (2.0 + np.sqrt(target.dim)) * hspace
        if r_use <= 0:
            raise CoverError(f"cover ball {i} too small for its grid spacing")
        t = np.linalg.norm(pts - np.asarray(center, dtype=float), axis=1) / r_use
        raw[i] = _plateau(t)

    total = raw.sum(axis=0)
    uncovered = tvalid & (total < 1.0 - 1e-9)
    if uncovered.any():
        where = pts[uncovered][0]
        raise CoverError(f"partition weights sum to {total[uncovered].min():.6f} at {where.tolist()}")

    weights = raw / np.where(total > 0, total, 1.0)
    values = np.zeros(len(pts))
    for i, hloc in enumerate(locals_):
        active = tvalid & (weights[i] > 0)
        if active.any():
            values[active] += weights[i][active] * hloc.eval_many(pts[active])

    glued = ScalarField(target.domain, target.shape, values.reshape(target.shape), mask=target.mask)
    c11 = estimate_c1omega(glued, ModulusSpec.linear(1.0))

    grad_bound = 0.0
    for i in range(len(locals_)):
        wfield = ScalarField(target.domain, target.shape, weights[i].reshape(target.shape),
                             mask=target.mask, _validate=False)
        gw, _ = gradient_all(wfield)
        mags = np.linalg.norm(np.nan_to_num(gw), axis=-1)
        grad_bound = max(grad_bound, float(mags[target.mask].max()))

    return GlueResult(glued, c11, grad_bound, float(total[tvalid].min()))
