import numpy as np
import pytest

import smooth_insert as si
from smooth_insert import lp
from smooth_insert.envelope import lp_envelope_sweep


def test_known_small_lp():
    # min x0 + 2 x1 s.t. x0 + x1 = 1, x >= 0  ->  x = (1, 0)
    res = lp.dense_simplex(np.array([[1.0, 1.0]]), np.array([1.0]), np.array([1.0, 2.0]))
    assert res.status == lp.OPTIMAL
    assert res.value == pytest.approx(1.0)
    assert res.basis.tolist() == [0]


def test_degenerate_columns_terminate():
    A = np.array([[1.0, 1.0, 1.0, 1.0], [0.0, 1.0, 2.0, 3.0]])
    b = np.array([1.0, 1.5])
    c = np.array([0.0, 0.0, 0.0, 0.0])
    res = lp.dense_simplex(A, b, c)
    assert res.status == lp.OPTIMAL
    assert res.value == pytest.approx(0.0)


def test_infeasible_detection():
    # convex weights on {0, 1} cannot average to 2
    A = np.array([[0.0, 1.0], [1.0, 1.0]])
    b = np.array([2.0, 1.0])
    res = lp.dense_simplex(A, b, np.array([0.0, 0.0]))
    assert res.status == lp.INFEASIBLE


def test_warm_start_matches_cold_start():
    rng = np.random.default_rng(11)
    pts = rng.uniform(-1, 1, size=(60, 2))
    vals = rng.normal(size=60)
    A = np.concatenate([pts.T, np.ones((1, 60))], axis=0)
    c = vals
    # query the centroid; warm basis from three random affinely independent points
    b = np.concatenate([pts.mean(axis=0), [1.0]])
    cold = lp.dense_simplex(A, b, c)
    tri = None
    for _ in range(100):
        cand = rng.choice(60, size=3, replace=False)
        w = np.linalg.solve(A[:, cand], b)
        if np.all(w >= 0):
            tri = cand
            break
    assert tri is not None
    warm = lp.dense_simplex(A, b, c, initial_basis=tri)
    assert warm.status == cold.status == lp.OPTIMAL
    assert warm.value == pytest.approx(cold.value, abs=1e-10)


@pytest.mark.parametrize("domain,shape", [
    (si.Box([-1.0], [1.0]), 151),
    (si.Box([-1.0, -1.0], [1.0, 1.0]), (17, 17)),
    (si.Ball([0.0, 0.0], 1.0), (17, 17)),
])
def test_sweep_equals_per_query_oracle(domain, shape):
    rng = np.random.default_rng(5)
    f = si.sample(domain, shape, lambda *cs: sum(np.cos(2 * c + i) for i, c in enumerate(cs)))
    f = f.with_values(np.where(f.mask, f.values + 0.3 * rng.normal(size=f.values.shape), 0.0))
    sweep = lp_envelope_sweep(f)
    pts = f.points()[f.mask.ravel()]
    idx = rng.choice(len(pts), size=25, replace=False)
    span = f.values[f.mask].max() - f.values[f.mask].min()
    for i in idx:
        value, combo = si.envelope_lp_oracle(f, pts[i])
        assert abs(value - sweep[i]) <= 1e-10 * span
        assert combo.check(pts[i])


def test_boundary_queries_are_exact():
    # regression: long degenerate runs at hull-boundary queries used to
    # drift the tableau into a singular basis
    rng = np.random.default_rng(0)
    f = si.sample(si.Box([-1.0, -1.0], [1.0, 1.0]), (41, 41),
                  lambda x, y: np.cos(3 * x) + np.cos(3 * y + 1))
    f = f.with_values(f.values + 0.2 * rng.normal(size=f.values.shape))
    env = si.lower_convex_envelope(f).envelope
    span = f.values.max() - f.values.min()
    edge = [(0.16, 1.0), (-1.0, 0.5), (1.0, 1.0), (0.0, -1.0)]
    for p in edge:
        value, _ = si.envelope_lp_oracle(f, p)
        assert abs(value - env.eval(p)) <= 1e-9 * span
