import numpy as np
import pytest
import hypothesis
import hypothesis.strategies as st

import smooth_insert as si
from smooth_insert.errors import InputError
from smooth_insert.regularity import ModulusSpec

LIN = ModulusSpec.linear(1.0)


class TestModulus:
    def test_linear_evaluation(self):
        assert ModulusSpec.linear(2.5)(3.0) == 7.5
        assert ModulusSpec.linear(2.5)(0.0) == 0.0

    def test_holder_evaluation(self):
        assert ModulusSpec.holder(0.5)(4.0) == pytest.approx(2.0)

    def test_invalid_parameters(self):
        with pytest.raises(InputError):
            ModulusSpec.linear(-1.0)
        with pytest.raises(InputError):
            ModulusSpec.holder(0.0)
        with pytest.raises(InputError):
            ModulusSpec.holder(1.5)
        with pytest.raises(InputError):
            ModulusSpec("cubic")

    @hypothesis.given(
        st.sampled_from([ModulusSpec.linear(0.7), ModulusSpec.linear(3.0),
                         ModulusSpec.holder(0.3), ModulusSpec.holder(1.0)]),
        st.floats(0.0, 50.0),
        st.floats(0.0, 50.0),
    )
    @hypothesis.settings(max_examples=200, deadline=None)
    def test_scaling_bound(self, mod, lam, t):
        # omega(lambda t) <= max(1, lambda) omega(t), up to roundoff
        rhs = max(1.0, lam) * mod(t)
        assert mod(lam * t) <= rhs + 1e-12 * (1.0 + abs(rhs))

    @hypothesis.given(st.sampled_from([ModulusSpec.linear(2.0), ModulusSpec.holder(0.5)]))
    @hypothesis.settings(max_examples=10, deadline=None)
    def test_concave_nondecreasing_by_sampling(self, mod):
        ts = np.linspace(0.0, 5.0, 101)
        vals = mod(ts)
        assert vals[0] == 0.0
        assert np.all(np.diff(vals) >= -1e-12)
        mid = mod((ts[:-2] + ts[2:]) / 2.0)
        assert np.all(mid >= (vals[:-2] + vals[2:]) / 2.0 - 1e-12)

    def test_json_round_trip(self):
        for mod in (ModulusSpec.linear(2.0), ModulusSpec.holder(0.25)):
            clone = ModulusSpec.from_json(mod.to_json())
            assert clone.to_json() == mod.to_json()


class TestSemiConcavity:
    def test_concave_field_constant_zero(self):
        f = si.sample(si.Box([-1.0], [1.0]), 101, lambda y: -(y**2))
        assert si.estimate_semiconcavity(f, LIN).constant == 0.0

    def test_quadratic_constant_one(self):
        f = si.sample(si.Box([-1.0], [1.0]), 101, lambda y: y**2)
        assert si.estimate_semiconcavity(f, LIN).constant == pytest.approx(1.0, rel=1e-9)

    def test_counterexample_field_concave(self):
        f = si.sample(si.Box([0.0, 0.0], [1.0, 1.0]), (21, 21), lambda x, y: 1 - np.abs(x - y))
        assert si.estimate_semiconcavity(f, LIN).constant == pytest.approx(0.0, abs=1e-12)

    def test_witness_is_reproducible(self):
        rng = np.random.default_rng(3)
        f = si.ScalarField(si.Box([0.0, 0.0], [1.0, 1.0]), (11, 11), rng.normal(size=(11, 11)))
        a = si.estimate_semiconcavity(f, LIN)
        b = si.estimate_semiconcavity(f, LIN)
        assert (a.constant, a.worst_point, a.worst_offset) == (b.constant, b.worst_point, b.worst_offset)


class TestSemiConvexity:
    def test_convex_constant_zero(self):
        f = si.sample(si.Box([-1.0], [1.0]), 101, lambda y: y**2)
        assert si.estimate_semiconvexity(f, LIN).constant == 0.0

    def test_vee_is_convex(self):
        f = si.sample(si.Ball([0.0], 1.0), 101, lambda y: np.abs(y) - 1)
        assert si.estimate_semiconvexity(f, LIN).constant == pytest.approx(0.0, abs=1e-12)

    def test_negated_quadratic_by_symmetry(self):
        f = si.sample(si.Box([-1.0], [1.0]), 101, lambda y: -(y**2))
        assert si.estimate_semiconvexity(f, LIN).constant == pytest.approx(1.0, rel=1e-9)

    def test_duality_with_semiconcavity(self):
        rng = np.random.default_rng(7)
        f = si.ScalarField(si.Box([0.0], [1.0]), 31, rng.normal(size=31))
        neg = f.with_values(-f.values)
        assert si.estimate_semiconvexity(f, LIN).constant == si.estimate_semiconcavity(neg, LIN).constant


class TestC1Omega:
    def test_affine_zero(self):
        f = si.sample(si.Box([0.0, 0.0], [1.0, 1.0]), (21, 21), lambda x, y: 2 * x - y + 0.3)
        assert si.estimate_c1omega(f, LIN).constant <= 1e-10

    def test_half_quadratic_one(self):
        f = si.sample(si.Box([-1.0], [1.0]), 201, lambda y: 0.5 * y**2)
        est = si.estimate_c1omega(f, LIN)
        assert est.constant == pytest.approx(1.0, abs=1e-4)

    def test_kink_diverges_like_one_over_spacing(self):
        for shape in (101, 201):
            f = si.sample(si.Box([-1.0], [1.0]), shape, lambda y: np.abs(y))
            est = si.estimate_c1omega(f, LIN)
            assert est.constant == pytest.approx(1.0 / f.spacing[0], rel=0.05)


class TestEstimateInvariances:
    @hypothesis.given(st.integers(0, 10**6))
    @hypothesis.settings(max_examples=20, deadline=None)
    def test_affine_addition_invariance(self, seed):
        rng = np.random.default_rng(seed)
        f = si.ScalarField(si.Box([0.0, 0.0], [1.0, 1.0]), (9, 9), rng.uniform(-2, 2, (9, 9)))
        xs, ys = np.meshgrid(*f.axes(), indexing="ij")
        shifted = f.with_values(f.values + 1.7 * xs - 0.4 * ys + 2.0)
        c0 = si.estimate_semiconcavity(f, LIN).constant
        c1 = si.estimate_semiconcavity(shifted, LIN).constant
        assert c1 == pytest.approx(c0, abs=1e-9 * max(1.0, c0))

    @hypothesis.given(st.integers(0, 10**6), st.floats(0.1, 10.0))
    @hypothesis.settings(max_examples=20, deadline=None)
    def test_positive_scaling(self, seed, lam):
        rng = np.random.default_rng(seed)
        f = si.ScalarField(si.Box([0.0], [1.0]), 17, rng.uniform(-2, 2, 17))
        c0 = si.estimate_semiconcavity(f, LIN).constant
        c1 = si.estimate_semiconcavity(f.with_values(lam * f.values), LIN).constant
        assert c1 == pytest.approx(lam * c0, rel=1e-9, abs=1e-12)

    def test_two_sided_bounds_control_c11(self):
        # smooth field: both constants finite, and the C^{1,1} estimate stays
        # within a fixed multiple of their max under refinement
        for shape in (51, 101, 201):
            f = si.sample(si.Box([-1.0], [1.0]), shape, lambda y: np.sin(3 * y))
            c1 = si.estimate_semiconcavity(f, LIN).constant
            c2 = si.estimate_semiconvexity(f, LIN).constant
            k = si.estimate_c1omega(f, LIN).constant
            assert k <= 4.0 * max(c1, c2) + 10.0 * f.spacing[0]
