import numpy as np
import pytest
import hypothesis
import hypothesis.strategies as st

import smooth_insert as si
from smooth_insert.errors import DomainError, PreconditionError
from smooth_insert.insertion import barrier_values, bump_profile

BALL1 = si.Ball([0.0], 1.0)


def vee_pair(shape=201):
    f = si.sample(BALL1, shape, lambda y: np.abs(y) - 1)
    g = si.sample(BALL1, shape, lambda y: 1 - np.abs(y))
    return f, g


class TestModulate:
    def test_barrier_at_center(self):
        f = si.sample(BALL1, 201, lambda y: np.zeros_like(y))
        out = si.modulate(f, 0.0)
        assert out.values[100] == pytest.approx(1.0, abs=1e-12)

    def test_quadratic_plus_barrier_value(self):
        f = si.sample(BALL1, 201, lambda y: np.zeros_like(y))
        out = si.modulate(f, 2.0)
        i = np.argmin(np.abs(f.axes()[0] - 0.5))
        assert out.values[i] == pytest.approx(0.25 + 4.0 / 3.0, abs=1e-12)

    def test_round_trip(self):
        rng = np.random.default_rng(1)
        f = si.sample(BALL1, 201, lambda y: np.sin(3 * y))
        f = f.with_values(np.where(f.mask, f.values + 0.1 * rng.normal(size=f.values.shape), 0.0))
        back = si.demodulate(si.modulate(f, 3.7), 3.7)
        span = si.modulate(f, 3.7).value_range()
        scale = span[1] - span[0]
        assert np.abs(back.values - f.values)[f.mask].max() <= 1e-10 * scale

    def test_box_barrier_per_axis(self):
        dom = si.Box([0.0, 0.0], [1.0, 2.0])
        pts = np.array([[0.25, 0.5]])
        val = barrier_values(dom, pts)[0]
        assert val == pytest.approx(1 / 0.25 + 1 / 0.75 + 1 / 0.5 + 1 / 1.5)

    def test_sample_on_singularity_raises(self):
        f = si.sample(si.Box([0.0], [1.0]), 11, lambda y: y)  # endpoints valid, on the faces
        with pytest.raises(DomainError):
            si.modulate(f, 1.0)


class TestInsertC11:
    def test_coincident_quadratics_force_identity(self):
        q = si.sample(BALL1, 201, lambda y: 0.5 * y**2)
        res = si.insert_c11(q, q)
        assert np.abs(res.h.values - q.values)[res.h.mask].max() <= 1e-12
        assert res.sandwich_violation <= 1e-12
        assert res.coincidence_mask[res.h.mask].all()

    def test_vee_pair_sandwich_and_regression(self):
        f, g = vee_pair()
        res = si.insert_c11(f, g)
        m = res.h.mask
        assert res.sandwich_violation <= 1e-8
        assert -1.0 <= res.h.values[100] <= 1.0
        # pipeline output is deterministic; values frozen from the first
        # verified computation and cross-checked against the LP route
        assert res.K == pytest.approx(0.0050000010022204465, rel=1e-12)
        frozen = {20: 0.20000000000000018, 60: 0.5999999999999999,
                  100: 0.7889565473690308, 140: 0.5999999999999999,
                  180: 0.20000000000000018}
        for i, v in frozen.items():
            assert res.h.values[i] == pytest.approx(v, abs=1e-12)

    def test_vee_pair_c11_bounded_under_refinement(self):
        consts = []
        for shape in (101, 201, 401):
            f, g = vee_pair(shape)
            res = si.insert_c11(f, g)
            assert res.c11_estimate.constant <= res.c11_ceiling
            consts.append(res.c11_estimate.constant)
        assert max(consts) <= 3.0 * min(consts) + 1.0

    def test_2d_paraboloid_pair(self):
        dom = si.Ball([0.0, 0.0], 0.9)
        f = si.sample(dom, (41, 41), lambda x, y: x**2 + y**2 - 1)
        g = si.sample(dom, (41, 41), lambda x, y: 1 - x**2 - y**2)
        res = si.insert_c11(f, g)
        assert res.sandwich_violation <= 1e-8
        assert -1.0 - 1e-9 <= res.h.values[20, 20] <= 1.0 + 1e-9

    def test_precondition_violation_names_point(self):
        f, g = vee_pair()
        with pytest.raises(PreconditionError, match="f > g"):
            si.insert_c11(g, f)

    def test_intermediate_inequality_reported(self):
        f, g = vee_pair()
        res = si.insert_c11(f, g)
        assert res.fg_gap <= 1e-9 * 60  # F <= G* up to envelope tolerance
        assert res.env_gap <= 1e-9 * 60  # G* <= G

    def test_pipeline_identity_when_g_convex_after_modulation(self):
        g = si.sample(BALL1, 151, lambda y: y**2)
        f = g.with_values(g.values - 0.5)
        res = si.insert_c11(f, g)
        assert np.abs(res.h.values - g.values)[res.h.mask].max() <= 1e-9

    def test_symmetry_preserved(self):
        f = si.sample(BALL1, 151, lambda y: np.abs(y) - 1)
        g = si.sample(BALL1, 151, lambda y: 1 - 0.5 * y**2)
        res = si.insert_c11(f, g)
        h = res.h.values[res.h.mask]
        assert np.abs(h - h[::-1]).max() <= 1e-9


class TestStrictInsertion:
    def test_equal_pair_degenerates(self):
        q = si.sample(BALL1, 201, lambda y: 0.5 * y**2)
        res = si.insert_strict(q, q)
        assert len(res.partition.centers) == 0
        assert np.abs(res.h.values - q.values)[res.h.mask].max() <= 1e-12
        assert res.coincidence_mask[res.h.mask].all()

    def test_constant_pair_strictly_inside(self):
        f = si.sample(BALL1, 201, lambda y: np.full_like(y, -1.0))
        g = si.sample(BALL1, 201, lambda y: np.full_like(y, 1.0))
        res = si.insert_strict(f, g)
        m = res.h.mask
        assert not res.coincidence_mask[m].any()
        gap = np.minimum(res.h.values - f.values, g.values - res.h.values)[m]
        assert gap.min() > 0
        assert res.strict_margin > 0
        assert gap.min() >= res.strict_margin - res.sandwich_violation - 1e-12

    def test_vee_pair_strict_inside_open_ball(self):
        f, g = vee_pair()
        res = si.insert_strict(f, g)
        m = res.h.mask
        d_coin = np.full(f.shape, np.inf)  # E empty on the open ball
        assert not res.coincidence_mask[m].any()
        gap = np.minimum(res.h.values - f.values, g.values - res.h.values)[m]
        assert gap.min() > 0

    def test_bump_profile_shape(self):
        assert bump_profile(0.0) == pytest.approx(1.0)
        assert bump_profile(1.0) == 0.0
        assert bump_profile(2.0) == 0.0
        ts = np.linspace(-0.999, 0.999, 201)
        vals = bump_profile(ts)
        assert np.all(vals >= 0)
        assert np.all(vals <= 1.0)

    def test_partition_respects_cap(self):
        f = si.sample(BALL1, 201, lambda y: np.abs(y) - 1)
        g = si.sample(BALL1, 201, lambda y: 1 - np.abs(y))
        res = si.insert_strict(f, g)
        phi = res.partition.phi
        cap = (g.values - f.values) / 3.0
        assert np.all(phi[res.h.mask] <= cap[res.h.mask] + 1e-12)


class TestCoincidenceSet:
    def test_equal_fields_full(self):
        q = si.sample(BALL1, 51, lambda y: y**2)
        assert si.coincidence_set(q, q)[q.mask].all()

    def test_vee_pair_on_closed_interval(self):
        dom = si.Box([-1.0], [1.0])
        f = si.sample(dom, 21, lambda y: np.abs(y) - 1)
        g = si.sample(dom, 21, lambda y: 1 - np.abs(y))
        mask = si.coincidence_set(f, g)
        expected = np.zeros(21, dtype=bool)
        expected[0] = expected[-1] = True  # only y = +-1 solve |y|-1 = 1-|y|
        assert np.array_equal(mask, expected)

    def test_shifted_fields_empty(self):
        q = si.sample(BALL1, 51, lambda y: y**2)
        assert not si.coincidence_set(q.with_values(q.values - 1.0), q, tol=0.5).any()


class TestGlue:
    def test_single_ball_cover_is_identity(self):
        dom = si.Ball([0.0], 0.8)
        f = si.sample(dom, 161, lambda y: np.abs(y) - 1)
        g = si.sample(dom, 161, lambda y: 1 - np.abs(y))
        local = si.insert_c11(f, g)
        # target: the same grid restricted to the usable interior
        r_use = 0.8 - (2.0 + 1.0) * float(local.h.spacing[0])
        target = f.restrict(np.abs(f.axes()[0]) <= 0.6 * r_use)
        res = si.glue([local], target)
        got = res.field.values[res.field.mask]
        want = np.array([local.h.eval([y]) for y in f.axes()[0][res.field.mask.ravel()]])
        assert np.abs(got - want).max() <= 1e-12

    def test_two_equal_locals_glue_to_same(self):
        f_t = si.sample(si.Box([-1.0], [1.0]), 201, lambda y: np.abs(y) - 1)
        h_values = lambda y: 0.1 * y**2 - 0.4
        locs, covers = [], []
        for c in (-0.3, 0.3):
            dom = si.Ball([c], 0.6)
            locs.append(si.sample(dom, 121, h_values))
            covers.append((np.array([c]), 0.6))
        target = f_t.restrict(np.abs(f_t.axes()[0]) <= 0.5)
        res = si.glue(locs, target, covers)
        ys = f_t.axes()[0][res.field.mask.ravel()]
        assert np.abs(res.field.values[res.field.mask] - h_values(ys)).max() <= 1e-10

    def test_random_locals_keep_sandwich(self):
        rng = np.random.default_rng(21)
        f_t = si.sample(si.Box([-1.0], [1.0]), 201, lambda y: np.abs(y) - 1)
        g_t = si.sample(si.Box([-1.0], [1.0]), 201, lambda y: 1 - np.abs(y))
        for trial in range(5):
            locs = []
            for c in (-0.3, 0.3):
                dom = si.Ball([c], 0.6)
                f = si.sample(dom, 121, lambda y: np.abs(y) - 1)
                g = si.sample(dom, 121, lambda y: 1 - np.abs(y))
                # different valid insertions: pad f upward by a random slack
                pad = rng.uniform(0, 0.2)
                f_pad = f.with_values(np.where(f.mask, np.minimum(f.values + pad, g.values), f.values))
                locs.append(si.insert_c11(f_pad, g))
            target = f_t.restrict(np.abs(f_t.axes()[0]) <= 0.5)
            res = si.glue(locs, target)
            m = res.field.mask
            assert np.where(m, f_t.values - res.field.values, -np.inf).max() <= 1e-9
            assert np.where(m, res.field.values - g_t.values, -np.inf).max() <= 1e-9

    def test_cover_gap_raises(self):
        f_t = si.sample(si.Box([-1.0], [1.0]), 201, lambda y: y)
        loc = si.sample(si.Ball([0.5], 0.4), 41, lambda y: y)
        target = f_t  # full interval cannot be covered by one small ball
        with pytest.raises(si.CoverError):
            si.glue([loc], target)
