"""Lower convex envelopes of sampled coercive functions.

The discrete envelope is the convex envelope of the finite cloud of
valid samples {(y_i, f_i)}: the greatest convex function below the
samples. Two independent routes compute it:

  * hull route: the lower facets of the convex hull of the lifted cloud
    in dimension n+1; the envelope at any point of the projected hull is
    the maximum of the facet affines (each facet plane supports the
    cloud from below, with equality on its own facet);
  * LP route: at a single query point p, minimize sum(w_i f_i) over
    convex weights with sum(w_i y_i) = p. A basic optimal solution has
    at most n+1 active weights and doubles as a Caratheodory witness.

Route agreement at every valid sample is the correctness gate for the
hull code path. Convergence to the continuum envelope is O(spacing^2)
where that envelope has Lipschitz gradient; this is documented behavior,
not something the code certifies.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from . import lp
from .errors import DomainError, InputError, RankError
from .field import ScalarField, _shifted_valid, shift_mask, shift_values

logger = logging.getLogger(__name__)

# Relative envelope tolerance; every envelope invariant quotes it.
TOL_ENV_REL = 1e-9


def tol_env_abs(field_or_values, tol_rel=TOL_ENV_REL):
    """Absolute envelope tolerance: tol_rel times the value range."""
    values = getattr(field_or_values, "values", field_or_values)
    mask = getattr(field_or_values, "mask", None)
    vals = values[mask] if mask is not None else np.asarray(values)
    span = float(vals.max() - vals.min()) if vals.size else 0.0
    return tol_rel * span + 1e-13 * max(1.0, float(np.abs(vals).max()) if vals.size else 1.0)


@dataclass
class ConvexCombination:
    """Convex weights on grid points reproducing a query point and value."""

    points: np.ndarray  # (k, n) coordinates
    weights: np.ndarray  # (k,)
    value: float
    indices: list = dc_field(default_factory=list)  # grid indices of the support

    def check(self, query_point, atol=1e-9):
        if np.any(self.weights < -1e-10):
            return False
        if abs(self.weights.sum() - 1.0) > 1e-10:
            return False
        recon = self.weights @ self.points
        return bool(np.all(np.abs(recon - np.asarray(query_point)) <= atol))


@dataclass
class EnvelopeResult:
    """Envelope field plus contact set, supporting facets and witnesses."""

    envelope: ScalarField
    contact_mask: np.ndarray
    facets: list  # [(normal vector, intercept)] for n = 1, 2
    witness_cache: dict = dc_field(default_factory=dict)

    def contact_fraction(self):
        valid = self.envelope.mask
        return float(self.contact_mask[valid].sum()) / max(1, int(valid.sum()))


@dataclass
class CoercivityReport:
    """Grid-scale coercivity: does the outermost valid layer dominate the interior?"""

    boundary_min: float
    interior_max: float
    margin: float
    coercive: bool
    boundary_count: int
    interior_count: int

    def to_json(self):
        return {
            "boundary_min": self.boundary_min,
            "interior_max": self.interior_max,
            "margin": self.margin,
            "coercive": self.coercive,
            "boundary_count": self.boundary_count,
            "interior_count": self.interior_count,
        }


def boundary_layer_mask(field):
    """Valid samples with a missing or invalid axis neighbor."""
    m = field.mask
    inner = m.copy()
    for a in range(field.dim):
        inner &= _shifted_valid(m, a, +1) & _shifted_valid(m, a, -1)
    return m & ~inner


def check_coercive(field, margin=0.0, collar=2.5):
    """Report whether boundary-layer values dominate interior values.

    The interior stands ``collar`` cells clear of the boundary layer:
    rasterized ball rims place outermost samples at a range of radii, so
    samples just inside the staircase would otherwise out-value the
    shallowest rim sample even for genuinely coercive fields. Advisory
    only: the envelope is computable either way, but the smoothness claim
    for the envelope is only meaningful when the sampled window is
    coercive at grid scale.
    """
    from scipy.ndimage import distance_transform_edt

    boundary = boundary_layer_mask(field)
    clearance = distance_transform_edt(~boundary, sampling=field.spacing)
    interior = field.mask & ~boundary & (clearance >= collar * float(np.max(field.spacing)))
    bvals = field.values[boundary]
    ivals = field.values[interior]
    bmin = float(bvals.min()) if bvals.size else np.inf
    imax = float(ivals.max()) if ivals.size else -np.inf
    return CoercivityReport(
        boundary_min=bmin,
        interior_max=imax,
        margin=float(margin),
        coercive=bool(bmin >= imax + margin),
        boundary_count=int(boundary.sum()),
        interior_count=int(interior.sum()),
    )


def min_symmetric_second_difference(field, max_steps=3):
    """Smallest tested second difference; >= -tol certifies discrete convexity."""
    from .regularity import _iter_offsets  # local import to avoid a cycle

    v, m = field.values, field.mask
    worst = np.inf
    for off in _iter_offsets(field, max_steps, all_pairs=False):
        ok = m & shift_mask(m, off) & shift_mask(m, -off)
        if not ok.any():
            continue
        sd = np.where(ok, shift_values(v, off) + shift_values(v, -off) - 2.0 * v, np.inf)
        worst = min(worst, float(sd.min()))
    return worst


def lower_convex_envelope_1d(field):
    """Monotone lower-hull envelope for n=1; linear in the sample count."""
    if field.dim != 1:
        raise InputError(f"1-d envelope called on a {field.dim}-d field")
    ys = field.axes()[0][field.mask]
    fs = field.values[field.mask]
    if ys.size < 2:
        raise InputError(f"need >= 2 valid samples, got {ys.size}")

    hull = []  # indices into the valid arrays
    for i in range(ys.size):
        while len(hull) >= 2:
            i0, i1 = hull[-2], hull[-1]
            cross = (ys[i1] - ys[i0]) * (fs[i] - fs[i0]) - (fs[i1] - fs[i0]) * (ys[i] - ys[i0])
            if cross <= 0.0:
                hull.pop()
            else:
                break
        hull.append(i)

    hy = ys[hull]
    hf = fs[hull]
    env_valid = np.interp(ys, hy, hf)
    env_values = field.values.copy()
    env_values[field.mask] = env_valid
    env_field = field.with_values(env_values)

    tol = tol_env_abs(field)
    contact = np.zeros(field.shape, dtype=bool)
    contact[field.mask] = np.abs(env_valid - fs) <= tol

    facets = []
    for a, b in zip(hull[:-1], hull[1:]):
        slope = (fs[b] - fs[a]) / (ys[b] - ys[a])
        facets.append((np.array([slope]), float(fs[a] - slope * ys[a])))
    return EnvelopeResult(env_field, contact, facets)


def _affine_fit(points, values):
    """Least-squares affine fit; returns (coef, intercept, max residual)."""
    A = np.concatenate([points, np.ones((len(points), 1))], axis=1)
    sol, *_ = np.linalg.lstsq(A, values, rcond=None)
    resid = np.abs(A @ sol - values).max()
    return sol[:-1], float(sol[-1]), float(resid)


def _lower_facets(points, values):
    """Facet affines (W matrix rows [coef..., intercept]) of the lifted lower hull."""
    lifted = np.concatenate([points, values[:, None]], axis=1)
    hull = ConvexHull(lifted)
    eq = hull.equations  # a . x + d <= 0 inside
    a_last = eq[:, -2]
    lower = a_last < -1e-12
    eq = eq[lower]
    coefs = -eq[:, :-2] / eq[:, -2:-1]
    intercepts = -eq[:, -1] / eq[:, -2]
    return np.concatenate([coefs, intercepts[:, None]], axis=1)


def _max_affine(W, points, chunk=256):
    """max over facet rows of coef . y + intercept, chunked over facets."""
    P1 = np.concatenate([points, np.ones((len(points), 1))], axis=1)
    out = np.full(len(points), -np.inf)
    for start in range(0, len(W), chunk):
        block = W[start : start + chunk] @ P1.T
        np.maximum(out, block.max(axis=0), out=out)
    return out


def lower_convex_envelope_nd(field):
    """Envelope via the lifted lower hull for n in {2, 3}.

    Falls back to per-sample LP when qhull cannot triangulate the lifted
    cloud; affinely degenerate sample positions raise RankError.
    """
    if field.dim not in (2, 3):
        raise InputError(f"nd envelope supports n in {{2, 3}}, got {field.dim}")
    pts = field.points()[field.mask.ravel()]
    vals = field.values[field.mask]
    centered = pts - pts.mean(axis=0)
    if np.linalg.matrix_rank(centered, tol=1e-9 * max(1.0, np.abs(pts).max())) < field.dim:
        raise RankError("valid samples do not affinely span the domain dimension")

    coef, intercept, resid = _affine_fit(pts, vals)
    if resid <= tol_env_abs(field):
        env_field = field.with_values(field.values)
        contact = field.mask.copy()
        facets = [(coef, intercept)] if field.dim <= 2 else []
        return EnvelopeResult(env_field, contact, facets)

    try:
        W = _lower_facets(pts, vals)
        env_valid = _max_affine(W, pts)
    except QhullError:
        logger.warning("qhull failed on the lifted cloud; falling back to per-sample LP")
        env_valid = lp_envelope_sweep(field)
        W = np.empty((0, field.dim + 1))

    env_values = field.values.copy()
    env_values[field.mask] = env_valid
    env_field = field.with_values(env_values)
    tol = tol_env_abs(field)
    contact = np.zeros(field.shape, dtype=bool)
    contact[field.mask] = np.abs(env_valid - vals) <= tol
    facets = [(W[i, :-1].copy(), float(W[i, -1])) for i in range(len(W))] if field.dim == 2 else []
    return EnvelopeResult(env_field, contact, facets)


def lower_convex_envelope(field):
    """Dimension dispatch: monotone chain for n=1, lifted hull for n=2,3."""
    if field.dim == 1:
        return lower_convex_envelope_1d(field)
    return lower_convex_envelope_nd(field)


def _kuhn_basis(field, point, valid_columns):
    """Initial LP basis from the Kuhn simplex of the cell containing ``point``.

    Returns column indices into the valid-sample array, or None when the
    cell touches an invalid sample (phase 1 takes over).
    """
    lower, _ = field.domain.bounds()
    rel = (np.asarray(point, dtype=float) - lower) / field.spacing
    base = np.clip(np.floor(rel).astype(int), 0, np.array(field.shape) - 2)
    frac = rel - base
    order = np.argsort(-frac, kind="stable")
    vertex = base.copy()
    cols = []
    for v_idx in [base] + [None] * field.dim:
        if v_idx is None:
            vertex = vertex.copy()
            vertex[order[len(cols) - 1]] += 1
            v_idx = vertex
        flat = int(np.ravel_multi_index(tuple(v_idx), field.shape))
        col = valid_columns[flat]
        if col < 0:
            return None
        cols.append(col)
    return np.array(cols)


def _dual_restore(A, c, b, basis, z, tol_feas, max_iter=500):
    """Dual-simplex pivots restoring primal feasibility of a dual-feasible basis.

    Returns (basis, Binv, z, x) on success or None when the iteration guard
    trips; the reduced costs z stay nonnegative up to roundoff, so the
    restored basis is optimal for the new right-hand side b.
    """
    Binv = np.linalg.inv(A[:, basis])
    for _ in range(max_iter):
        x = Binv @ b
        bad = np.flatnonzero(x < -tol_feas)
        if bad.size == 0:
            return basis, Binv, z, np.maximum(x, 0.0)
        r = int(bad[np.argmin(x[bad])])
        row = Binv[r] @ A
        piv_tol = max(1e-11, 1e-9 * float(np.abs(row).max()))
        elig = np.flatnonzero(row < -piv_tol)
        if elig.size == 0:
            return None  # new rhs infeasible for this system
        ratios = np.maximum(z[elig], 0.0) / (-row[elig])
        j = int(elig[np.argmin(ratios)])
        basis = basis.copy()
        basis[r] = j
        try:
            Binv = np.linalg.inv(A[:, basis])
        except np.linalg.LinAlgError:
            return None
        z = c - (c[basis] @ Binv) @ A
    return None


def lp_envelope_sweep(field):
    """LP-oracle envelope values at every valid sample, in row-major order.

    Same linear program as envelope_lp_oracle, but consecutive queries
    reuse the previous optimal basis: reduced costs do not depend on the
    right-hand side, so an optimal basis stays dual-feasible when the
    query point moves, and either remains optimal outright or is repaired
    by a few dual-simplex pivots. Falls back to a cold Bland solve at
    every failure, so each value equals the per-query oracle's.
    """
    pts = field.points()[field.mask.ravel()]
    vals = field.values[field.mask]
    N = len(pts)
    A = np.concatenate([pts.T, np.ones((1, N))], axis=0)
    c = vals
    scale = max(1.0, float(np.abs(pts).max()))
    tol_feas = 1e-10 * scale

    valid_columns = np.full(int(np.prod(field.shape)), -1, dtype=int)
    valid_columns[field.mask.ravel()] = np.arange(N)

    out = np.empty(N)
    basis = None
    Binv = None
    z = None
    for k in range(N):
        b = np.concatenate([pts[k], [1.0]])
        if basis is not None:
            x = Binv @ b
            if np.all(x >= -tol_feas):
                out[k] = float(c[basis] @ np.maximum(x, 0.0))
                continue
            restored = _dual_restore(A, c, b, basis, z, tol_feas)
            if restored is not None:
                basis, Binv, z, x = restored
                out[k] = float(c[basis] @ x)
                continue
        res = lp.dense_simplex(A, b, c, initial_basis=_kuhn_basis(field, pts[k], valid_columns))
        if res.status != lp.OPTIMAL:
            raise RankError(f"sweep LP terminated with status {res.status} at sample {k}")
        out[k] = res.value
        basis = res.basis
        Binv = np.linalg.inv(A[:, basis])
        z = c - (c[basis] @ Binv) @ A
    return out


def envelope_lp_oracle(field, point):
    """Envelope value at ``point`` by direct linear programming.

    min sum(w_i f_i) s.t. sum(w_i y_i) = point, sum(w_i) = 1, w >= 0,
    solved by a dense simplex with Bland's rule. Returns the optimal
    value and a ConvexCombination witness with at most n+1 support
    points. Raises DomainError outside the hull of valid samples.
    """
    point = np.atleast_1d(np.asarray(point, dtype=float))
    pts = field.points()[field.mask.ravel()]
    vals = field.values[field.mask]
    A = np.concatenate([pts.T, np.ones((1, len(pts)))], axis=0)
    b = np.concatenate([point, [1.0]])

    valid_columns = np.full(int(np.prod(field.shape)), -1, dtype=int)
    valid_columns[field.mask.ravel()] = np.arange(len(pts))
    basis = None
    if bool(field.domain.contains(point[None, :])[0]):
        basis = _kuhn_basis(field, point, valid_columns)

    res = lp.dense_simplex(A, b, vals, initial_basis=basis)
    if res.status == lp.INFEASIBLE:
        raise DomainError(f"point {point.tolist()} outside the convex hull of valid samples")
    if res.status != lp.OPTIMAL:
        raise RankError(f"LP terminated with status {res.status}")

    keep = res.weights > 1e-12
    support = res.basis[keep]
    weights = res.weights[keep]
    order = np.argsort(support, kind="stable")
    support, weights = support[order], weights[order]
    flat_valid = np.flatnonzero(field.mask.ravel())
    indices = [tuple(int(i) for i in np.unravel_index(flat_valid[s], field.shape)) for s in support]
    combo = ConvexCombination(
        points=pts[support].copy(),
        weights=weights.copy(),
        value=res.value,
        indices=indices,
    )
    return res.value, combo
