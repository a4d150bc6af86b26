"""Uniform-grid scalar fields over box and ball domains in dimension 1-3.

Grids are vertex-centered: sample i along axis a sits at
``lower[a] + i * spacing[a]`` with the endpoints on the box boundary.
Ball domains are sampled on their inscribing box and carry a mask that
invalidates samples at distance >= R * (1 - EPS_EDGE) from the center,
so the open ball is realized by the mask and barrier-type values stay
finite at every valid sample.

Evaluation between samples is multilinear: it preserves min/max bounds,
which downstream sandwich inequalities between grid points rely on.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError, EstimationError, InputError, RangeError

# Relative shrink applied to ball radii when masking samples; keeps the
# open-ball samples strictly away from the metric boundary.
EPS_EDGE = 1e-9

_SCHEME_NONE = "none"
_SCHEME_CENTRAL = "central"
_SCHEME_FORWARD = "forward"
_SCHEME_BACKWARD = "backward"


class Box:
    """Axis-aligned box domain [lower[0], upper[0]] x ... in dimension 1-3."""

    kind = "box"

    def __init__(self, lower, upper):
        self.lower = np.atleast_1d(np.asarray(lower, dtype=float)).copy()
        self.upper = np.atleast_1d(np.asarray(upper, dtype=float)).copy()
        if self.lower.ndim != 1 or self.lower.shape != self.upper.shape:
            raise InputError("box lower/upper must be 1-d vectors of equal length")
        if not 1 <= self.lower.size <= 3:
            raise InputError(f"dimension must be 1-3, got {self.lower.size}")
        if not np.all(self.lower < self.upper):
            raise InputError(f"box needs lower < upper per axis, got {self.lower} vs {self.upper}")
        self.lower.setflags(write=False)
        self.upper.setflags(write=False)

    @property
    def dim(self):
        return self.lower.size

    def bounds(self):
        """(lower, upper) corners of the sampling box."""
        return self.lower, self.upper

    def contains(self, points):
        """Boolean membership for an (N, n) array of points (closed box)."""
        pts = np.atleast_2d(points)
        return np.all((pts >= self.lower) & (pts <= self.upper), axis=1)

    def __repr__(self):
        return f"Box(lower={self.lower.tolist()}, upper={self.upper.tolist()})"

    def __eq__(self, other):
        return (
            isinstance(other, Box)
            and np.array_equal(self.lower, other.lower)
            and np.array_equal(self.upper, other.upper)
        )


class Ball:
    """Open Euclidean ball domain B(center, radius), sampled on its inscribing box."""

    kind = "ball"

    def __init__(self, center, radius):
        self.center = np.atleast_1d(np.asarray(center, dtype=float)).copy()
        self.radius = float(radius)
        if self.center.ndim != 1 or not 1 <= self.center.size <= 3:
            raise InputError(f"dimension must be 1-3, got shape {self.center.shape}")
        if not self.radius > 0:
            raise InputError(f"ball radius must be positive, got {self.radius}")
        self.center.setflags(write=False)

    @property
    def dim(self):
        return self.center.size

    def bounds(self):
        """Inscribing box [center - R, center + R]^n used for sampling."""
        return self.center - self.radius, self.center + self.radius

    def contains(self, points):
        """Open-ball membership with the EPS_EDGE shrink used for masking."""
        pts = np.atleast_2d(points)
        dist = np.linalg.norm(pts - self.center, axis=1)
        return dist < self.radius * (1.0 - EPS_EDGE)

    def __repr__(self):
        return f"Ball(center={self.center.tolist()}, radius={self.radius})"

    def __eq__(self, other):
        return (
            isinstance(other, Ball)
            and np.array_equal(self.center, other.center)
            and self.radius == other.radius
        )


class ScalarField:
    """Sampled real function on a uniform grid over a box or ball domain.

    Attributes:
        domain: Box or Ball.
        shape: per-axis sample counts (>= 2 each; estimators need >= 3).
        values: ndarray of shape ``shape`` (row-major / C order is the
            normative flat ordering for serialization).
        mask: boolean ndarray of shape ``shape``; True marks valid samples.
        spacing: per-axis step (upper - lower) / (shape - 1).
    """

    def __init__(self, domain, shape, values, mask=None, _validate=True):
        self.domain = domain
        self.shape = tuple(int(s) for s in np.atleast_1d(shape))
        if len(self.shape) != domain.dim:
            raise InputError(f"shape {self.shape} does not match domain dimension {domain.dim}")
        if any(s < 2 for s in self.shape):
            raise InputError(f"need at least 2 samples per axis, got {self.shape}")
        values = np.asarray(values, dtype=float)
        if values.size != int(np.prod(self.shape)):
            raise InputError(f"value count {values.size} != prod(shape) {int(np.prod(self.shape))}")
        self.values = values.reshape(self.shape).copy()

        lower, upper = domain.bounds()
        self.spacing = (upper - lower) / (np.array(self.shape) - 1.0)

        if mask is None:
            if domain.kind == "ball":
                mask = domain.contains(self.points()).reshape(self.shape)
            else:
                mask = np.ones(self.shape, dtype=bool)
        else:
            mask = np.asarray(mask, dtype=bool).reshape(self.shape).copy()
        self.mask = mask

        if _validate and not np.all(np.isfinite(self.values[self.mask])):
            bad = np.argwhere(~np.isfinite(self.values) & self.mask)[0]
            raise InputError(f"non-finite value at valid sample index {tuple(bad)}")

        self.values.setflags(write=False)
        self.mask.setflags(write=False)
        self.spacing.setflags(write=False)

    @property
    def dim(self):
        return len(self.shape)

    def axes(self):
        """Per-axis coordinate arrays."""
        lower, upper = self.domain.bounds()
        return [np.linspace(lower[a], upper[a], self.shape[a]) for a in range(self.dim)]

    def points(self):
        """All grid points as an (N, n) array in row-major sample order."""
        grids = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=-1)

    def point(self, index):
        """Coordinates of one grid index."""
        lower, _ = self.domain.bounds()
        return lower + np.asarray(index, dtype=float) * self.spacing

    def valid_count(self):
        return int(self.mask.sum())

    def is_valid(self, index):
        index = tuple(int(i) for i in np.atleast_1d(index))
        if any(i < 0 or i >= s for i, s in zip(index, self.shape)):
            return False
        return bool(self.mask[index])

    def with_values(self, values, _validate=True):
        """New field on the same grid with different values."""
        return ScalarField(self.domain, self.shape, values, mask=self.mask, _validate=_validate)

    def restrict(self, extra_mask):
        """New field with the mask intersected with ``extra_mask``."""
        extra_mask = np.asarray(extra_mask, dtype=bool).reshape(self.shape)
        return ScalarField(self.domain, self.shape, self.values, mask=self.mask & extra_mask)

    def value_range(self):
        """(min, max) over valid samples."""
        vals = self.values[self.mask]
        if vals.size == 0:
            raise InputError("field has no valid samples")
        return float(vals.min()), float(vals.max())

    def eval(self, point):
        """Multilinear interpolation at one point; exact at grid points."""
        return float(self.eval_many(np.atleast_2d(np.asarray(point, dtype=float)))[0])

    def eval_many(self, points):
        """Multilinear interpolation at an (N, n) batch of points.

        Raises DomainError if any point is outside the domain or its
        containing cell touches an invalid sample.
        """
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != self.dim:
            raise InputError(f"points have dimension {pts.shape[1]}, field has {self.dim}")
        inside = self.domain.contains(pts)
        if not np.all(inside):
            bad = pts[~inside][0]
            raise DomainError(f"point {bad.tolist()} outside domain {self.domain!r}")

        lower, _ = self.domain.bounds()
        rel = (pts - lower) / self.spacing
        base = np.floor(rel).astype(int)
        base = np.clip(base, 0, np.array(self.shape) - 2)
        frac = rel - base

        out = np.zeros(len(pts))
        cell_ok = np.ones(len(pts), dtype=bool)
        for corner in range(2**self.dim):
            offs = np.array([(corner >> a) & 1 for a in range(self.dim)])
            idx = tuple((base + offs).T)
            weight = np.prod(np.where(offs, frac, 1.0 - frac), axis=1)
            cell_ok &= self.mask[idx] | (weight == 0.0)
            out += weight * np.where(self.mask[idx], self.values[idx], 0.0)
        if not np.all(cell_ok):
            bad = pts[~cell_ok][0]
            raise DomainError(f"point {bad.tolist()} interpolates across invalid samples")
        return out


def sample(domain, shape, evaluator):
    """Sample ``evaluator`` on the grid of ``domain`` with the given shape.

    The evaluator is called vectorized with one 1-d array per coordinate
    (``evaluator(x)``, ``evaluator(x, y)``, ...). Ball-exterior samples are
    masked invalid and the evaluator output there is ignored (non-finite
    allowed); a non-finite value at a valid sample raises InputError.
    """
    shape = tuple(int(s) for s in np.atleast_1d(shape))
    probe = ScalarField(domain, shape, np.zeros(shape), _validate=False)
    pts = probe.points()
    coords = [pts[:, a] for a in range(domain.dim)]
    vals = np.asarray(evaluator(*coords), dtype=float)
    if vals.shape != (len(pts),):
        raise InputError(f"evaluator returned shape {vals.shape}, expected ({len(pts)},)")
    vals = vals.reshape(shape)
    mask = probe.mask
    if not np.all(np.isfinite(vals[mask])):
        bad = np.argwhere(~np.isfinite(vals.reshape(shape)) & mask)[0]
        pt = probe.point(bad)
        raise InputError(f"evaluator returned non-finite value at valid point {pt.tolist()}")
    vals = np.where(mask, vals, 0.0)
    return ScalarField(domain, shape, vals, mask=mask)


def _shifted_valid(mask, axis, step):
    """Mask of samples whose neighbor at ``step`` along ``axis`` exists and is valid."""
    ok = np.zeros_like(mask)
    src = [slice(None)] * mask.ndim
    dst = [slice(None)] * mask.ndim
    if step > 0:
        dst[axis] = slice(None, -step)
        src[axis] = slice(step, None)
    else:
        dst[axis] = slice(-step, None)
        src[axis] = slice(None, step)
    ok[tuple(dst)] = mask[tuple(src)]
    return ok


def _shift(values, axis, step):
    """values[i + step] aligned at i (garbage outside; pair with _shifted_valid)."""
    out = np.zeros_like(values)
    src = [slice(None)] * values.ndim
    dst = [slice(None)] * values.ndim
    if step > 0:
        dst[axis] = slice(None, -step)
        src[axis] = slice(step, None)
    else:
        dst[axis] = slice(-step, None)
        src[axis] = slice(None, step)
    out[tuple(dst)] = values[tuple(src)]
    return out


def shift_mask(mask, offset):
    """mask[i + offset] aligned at i for a vector offset, False outside the grid."""
    out = mask
    for axis, step in enumerate(offset):
        if step:
            out = _shifted_valid(out, axis, int(step))
    return out


def shift_values(values, offset):
    """values[i + offset] aligned at i for a vector offset (pair with shift_mask)."""
    out = values
    for axis, step in enumerate(offset):
        if step:
            out = _shift(out, axis, int(step))
    return out


def gradient_all(field):
    """Finite-difference gradient at every valid sample, vectorized.

    Returns (grad, schemes): ``grad`` has shape ``shape + (n,)``; ``schemes``
    the same shape with string codes per axis ("central", "forward",
    "backward", "none"). Central differences where both neighbors are
    valid, one-sided at mask edges, NaN where no neighbor exists.
    """
    v, m = field.values, field.mask
    grad = np.full(field.shape + (field.dim,), np.nan)
    schemes = np.full(field.shape + (field.dim,), _SCHEME_NONE, dtype=object)
    for a in range(field.dim):
        h = field.spacing[a]
        fwd_ok = m & _shifted_valid(m, a, +1)
        bwd_ok = m & _shifted_valid(m, a, -1)
        f_fwd = _shift(v, a, +1)
        f_bwd = _shift(v, a, -1)
        central = fwd_ok & bwd_ok
        ga = grad[..., a]
        ga[central] = (f_fwd[central] - f_bwd[central]) / (2.0 * h)
        fonly = fwd_ok & ~bwd_ok
        ga[fonly] = (f_fwd[fonly] - v[fonly]) / h
        bonly = bwd_ok & ~fwd_ok
        ga[bonly] = (v[bonly] - f_bwd[bonly]) / h
        sa = schemes[..., a]
        sa[central] = _SCHEME_CENTRAL
        sa[fonly] = _SCHEME_FORWARD
        sa[bonly] = _SCHEME_BACKWARD
    return grad, schemes


def gradient_fd(field, index, return_scheme=False):
    """Finite-difference gradient at one grid index.

    Central difference where both axis neighbors are valid, one-sided
    otherwise; EstimationError if some axis has no valid neighbor.
    """
    index = tuple(int(i) for i in np.atleast_1d(index))
    if not field.is_valid(index):
        raise RangeError(f"index {index} is not a valid sample")
    grad = np.zeros(field.dim)
    schemes = []
    for a in range(field.dim):
        h = field.spacing[a]
        up = list(index)
        dn = list(index)
        up[a] += 1
        dn[a] -= 1
        has_up = field.is_valid(up)
        has_dn = field.is_valid(dn)
        if has_up and has_dn:
            grad[a] = (field.values[tuple(up)] - field.values[tuple(dn)]) / (2.0 * h)
            schemes.append(_SCHEME_CENTRAL)
        elif has_up:
            grad[a] = (field.values[tuple(up)] - field.values[index]) / h
            schemes.append(_SCHEME_FORWARD)
        elif has_dn:
            grad[a] = (field.values[index] - field.values[tuple(dn)]) / h
            schemes.append(_SCHEME_BACKWARD)
        else:
            raise EstimationError(f"sample {index} has no valid neighbor along axis {a}")
    if return_scheme:
        return grad, tuple(schemes)
    return grad


def second_difference(field, index, offset):
    """Symmetric second difference f(x+v) + f(x-v) - 2 f(x), v = offset * spacing.

    The quantity a grid can test against the semi-concavity bound
    2 C ||v|| omega(||v||); zero for affine fields.
    """
    index = np.atleast_1d(np.asarray(index, dtype=int))
    offset = np.atleast_1d(np.asarray(offset, dtype=int))
    up = tuple(index + offset)
    dn = tuple(index - offset)
    ctr = tuple(index)
    for pt in (up, dn, ctr):
        if not field.is_valid(pt):
            raise RangeError(f"index {pt} invalid for second difference at {tuple(index)} +/- {tuple(offset)}")
    return float(field.values[up] + field.values[dn] - 2.0 * field.values[ctr])


def refine_shape(shape, factor=2):
    """Shape after ``factor``-fold refinement keeping endpoint samples nested."""
    return tuple(factor * (s - 1) + 1 for s in np.atleast_1d(shape))


def interior_core_mask(field, margin_frac=0.15):
    """Mask of samples at a fixed relative distance from the domain boundary.

    Refinement-independent region on which regularity estimates are
    comparable across grids; margin is ``margin_frac`` of the smallest
    half-extent (box) or of the radius (ball).
    """
    pts = field.points()
    if field.domain.kind == "ball":
        margin = margin_frac * field.domain.radius
        dist = field.domain.radius - np.linalg.norm(pts - field.domain.center, axis=1)
    else:
        lower, upper = field.domain.bounds()
        margin = margin_frac * float(np.min(upper - lower)) / 2.0
        dist = np.minimum((pts - lower).min(axis=1), (upper - pts).min(axis=1))
    return (dist >= margin).reshape(field.shape)
