import numpy as np
import pytest
import hypothesis
import hypothesis.strategies as st

import smooth_insert as si
from smooth_insert.errors import DomainError, EstimationError, InputError, RangeError


def test_sample_square_on_interval():
    f = si.sample(si.Box([0.0], [1.0]), 3, lambda y: y**2)
    assert np.allclose(f.values, [0.0, 0.25, 1.0])


def test_sample_ball_masks_open_endpoints():
    f = si.sample(si.Ball([0.0], 1.0), 5, lambda y: y)
    assert f.mask.tolist() == [False, True, True, True, False]


def test_sample_counterexample_corners():
    f = si.sample(si.Box([0.0, 0.0], [1.0, 1.0]), (2, 2), lambda x, y: 1 - np.abs(x - y))
    assert np.allclose(f.values.ravel(), [1.0, 0.0, 0.0, 1.0])


def test_sample_rejects_non_finite():
    with pytest.raises(InputError, match="non-finite"):
        si.sample(si.Box([0.0], [1.0]), 3, lambda y: np.where(y > 0.4, np.nan, y))


def test_eval_linear_reproduction():
    f = si.sample(si.Box([0.0], [1.0]), 11, lambda y: y)
    assert f.eval([0.5]) == pytest.approx(0.5, abs=1e-14)


def test_eval_bilinear_through_corners():
    f = si.sample(si.Box([0.0, 0.0], [1.0, 1.0]), (2, 2), lambda x, y: 1 - np.abs(x - y))
    assert f.eval([0.5, 0.5]) == pytest.approx(0.5, abs=1e-14)


def test_eval_exact_at_grid_points():
    f = si.sample(si.Box([-1.0], [2.0]), 7, lambda y: np.sin(y))
    for i in range(7):
        assert f.eval(f.point([i])) == f.values[i]


def test_eval_outside_domain_raises():
    f = si.sample(si.Box([0.0], [1.0]), 5, lambda y: y)
    with pytest.raises(DomainError):
        f.eval([1.5])


def test_eval_across_invalid_samples_raises():
    f = si.sample(si.Ball([0.0, 0.0], 1.0), (9, 9), lambda x, y: x + y)
    with pytest.raises(DomainError):
        f.eval([0.93, 0.2])  # inside the ball but the cell touches masked corners


def test_gradient_affine_exact():
    f = si.sample(si.Box([0.0], [1.0]), 9, lambda y: 3.0 * y)
    assert si.gradient_fd(f, 4) == pytest.approx([3.0], abs=1e-12)


def test_gradient_quadratic_central_exact():
    f = si.sample(si.Box([0.0], [1.0]), 5, lambda y: y**2)  # spacing 0.25
    assert si.gradient_fd(f, 2) == pytest.approx([1.0], abs=1e-12)


def test_gradient_distance_field_eikonal():
    f = si.sample(si.Box([-1.0], [1.0]), 21, lambda y: np.abs(y))
    i = np.argmin(np.abs(f.axes()[0] - 0.5))
    assert np.linalg.norm(si.gradient_fd(f, i)) == pytest.approx(1.0, abs=1e-12)


def test_gradient_scheme_reporting():
    f = si.sample(si.Ball([0.0], 1.0), 9, lambda y: y**2)
    grad, schemes = si.gradient_fd(f, 1, return_scheme=True)
    assert schemes == ("forward",)
    _, schemes = si.gradient_fd(f, 4, return_scheme=True)
    assert schemes == ("central",)


def test_gradient_isolated_point_errors():
    mask = np.zeros(5, dtype=bool)
    mask[2] = True
    f = si.ScalarField(si.Box([0.0], [1.0]), 5, np.zeros(5), mask=mask)
    with pytest.raises(EstimationError):
        si.gradient_fd(f, 2)


def test_second_difference_affine_zero():
    f = si.sample(si.Box([0.0], [1.0]), 9, lambda y: 2 * y - 5)
    assert si.second_difference(f, 4, 2) == 0.0


def test_second_difference_quadratic():
    f = si.sample(si.Box([0.0], [1.0]), 5, lambda y: y**2)
    s = f.spacing[0]
    assert si.second_difference(f, 2, 1) == pytest.approx(2 * s**2, rel=1e-12)


def test_second_difference_negative_abs():
    f = si.sample(si.Box([-1.0], [1.0]), 21, lambda y: -np.abs(y))
    s = f.spacing[0]
    assert si.second_difference(f, 10, 1) == pytest.approx(-2 * s, rel=1e-12)


def test_second_difference_out_of_range():
    f = si.sample(si.Box([0.0], [1.0]), 5, lambda y: y)
    with pytest.raises(RangeError):
        si.second_difference(f, 0, 1)


@st.composite
def affine_coeffs(draw):
    n = draw(st.integers(min_value=1, max_value=3))
    coefs = draw(st.lists(st.floats(-5, 5), min_size=n, max_size=n))
    intercept = draw(st.floats(-5, 5))
    return np.array(coefs), intercept


@hypothesis.given(affine_coeffs(), st.integers(0, 10**6))
@hypothesis.settings(max_examples=30, deadline=None)
def test_interpolation_reproduces_affine(coeffs, seed):
    coef, intercept = coeffs
    n = len(coef)
    dom = si.Box([-1.0] * n, [1.0] * n)
    f = si.sample(dom, (5,) * n, lambda *cs: sum(c * x for c, x in zip(coef, cs)) + intercept)
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-1, 1, size=(20, n))
    expect = pts @ coef + intercept
    got = f.eval_many(pts)
    scale = max(1.0, np.abs(expect).max())
    assert np.abs(got - expect).max() <= 1e-12 * scale


@hypothesis.given(st.integers(0, 10**6))
@hypothesis.settings(max_examples=25, deadline=None)
def test_second_difference_symmetric_and_additive(seed):
    rng = np.random.default_rng(seed)
    dom = si.Box([0.0, 0.0], [1.0, 1.0])
    f = si.ScalarField(dom, (7, 7), rng.uniform(-3, 3, size=(7, 7)))
    g = si.ScalarField(dom, (7, 7), rng.uniform(-3, 3, size=(7, 7)))
    fg = f.with_values(f.values + g.values)
    idx, off = (3, 3), (1, -2)
    assert si.second_difference(f, idx, off) == si.second_difference(f, idx, tuple(-o for o in off))
    total = si.second_difference(f, idx, off) + si.second_difference(g, idx, off)
    assert si.second_difference(fg, idx, off) == pytest.approx(total, abs=1e-10)


@pytest.mark.parametrize("shape", [(9, 9), (11, 7)])
def test_ball_mask_symmetry(shape):
    f = si.sample(si.Ball([0.0, 0.0], 1.0), shape, lambda x, y: x + y)
    assert np.array_equal(f.mask, f.mask[::-1, ::-1])


def test_refine_shape_nests():
    assert si.refine_shape((5, 9), 2) == (9, 17)
    f1 = si.sample(si.Box([0.0], [1.0]), 5, lambda y: y**3)
    f2 = si.sample(si.Box([0.0], [1.0]), si.refine_shape(5, 2), lambda y: y**3)
    assert np.allclose(f1.axes()[0], f2.axes()[0][::2])


def test_interior_core_mask_fixed_region():
    f1 = si.sample(si.Box([-1.0], [1.0]), 21, lambda y: y)
    f2 = si.sample(si.Box([-1.0], [1.0]), 41, lambda y: y)
    core1 = si.interior_core_mask(f1, 0.2)
    core2 = si.interior_core_mask(f2, 0.2)
    # the same physical region regardless of resolution, up to one sample
    lo1, lo2 = f1.axes()[0][core1].min(), f2.axes()[0][core2].min()
    assert abs(lo1 - lo2) <= f1.spacing[0] + 1e-12
    assert lo1 == pytest.approx(-0.8, abs=f1.spacing[0] + 1e-12)


def test_shape_of_two_is_allowed_but_estimators_refuse():
    f = si.sample(si.Box([0.0, 0.0], [1.0, 1.0]), (2, 2), lambda x, y: x * y)
    assert f.valid_count() == 4
    with pytest.raises(EstimationError):
        si.estimate_semiconcavity(f, si.ModulusSpec.linear(1.0))
