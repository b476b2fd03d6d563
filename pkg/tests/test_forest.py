import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from sklearn.base import clone

from pairedmi.exceptions import ParameterError
from pairedmi.forest import (
    ForestParams,
    RandomForest,
    apply,
    donor_draw,
    fit_forest,
    oob_predict,
    predict_mean,
)


def leaves(forest):
    for t in range(forest.n_trees):
        base = t * forest.capacity
        for k in range(base, base + forest.n_nodes[t]):
            if forest.feature[k] < 0:
                yield t, k


def test_constant_target():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(40, 3))
    f = fit_forest(X, np.full(40, 2.5), ForestParams(n_trees=20), rng)
    assert np.all(predict_mean(f, rng.normal(size=(25, 3))) == 2.5)
    assert np.all(f.n_nodes == 1)


def test_interpolation_without_bootstrap():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(60, 2))
    y = rng.normal(size=60)
    f = fit_forest(X, y, ForestParams(n_trees=1, min_node=1, bootstrap=False, mtry=2), rng)
    assert np.array_equal(predict_mean(f, X), y)


def test_oob_beats_mean_predictor():
    rng = np.random.default_rng(2)
    x = rng.uniform(-2, 2, 200)
    y = x.copy()
    f = fit_forest(x[:, None], y, ForestParams(n_trees=100), rng)
    oob = oob_predict(f, x[:, None])
    ok = ~np.isnan(oob)
    assert ok.mean() > 0.99
    assert np.mean((oob[ok] - y[ok]) ** 2) < y.var()


def test_single_leaf_is_mean():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(30, 2))
    y = rng.normal(size=30)
    f = fit_forest(X, y, ForestParams(n_trees=5, max_depth=0, bootstrap=False), rng)
    assert np.allclose(predict_mean(f, X), y.mean(), rtol=0, atol=1e-14)


def test_grid_nearest_neighbor_bound():
    step = 0.1
    x = np.arange(50) * step
    f = fit_forest(x[:, None], x, ForestParams(n_trees=200, min_node=1), np.random.default_rng(4))
    err = np.abs(predict_mean(f, x[:, None]) - x)
    # an out-of-bag endpoint can only borrow from one side, so its expected
    # error is about 0.58 * step; the half-step bound is for interior points
    assert np.max(err[1:-1]) < 0.5 * step
    assert np.max(err) < step


@given(st.integers(0, 10**6), st.integers(1, 8))
def test_prediction_in_range_and_donors_in_y(seed, min_node):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 60))
    X = rng.normal(size=(n, 3))
    y = rng.standard_t(3, size=n)
    f = fit_forest(X, y, ForestParams(n_trees=15, min_node=min_node), rng)
    Xn = rng.normal(size=(40, 3)) * 3
    p = predict_mean(f, Xn)
    assert np.all(p >= y.min() - 1e-12) and np.all(p <= y.max() + 1e-12)
    assert np.isin(donor_draw(f, Xn, rng), y).all()


def test_single_leaf_donor_frequencies():
    rng = np.random.default_rng(5)
    y = np.array([0.0, 1.0, 2.0, 3.0, 4.0])
    X = rng.normal(size=(5, 1))
    f = fit_forest(X, y, ForestParams(n_trees=3, max_depth=0, bootstrap=False), rng)
    draws = donor_draw(f, np.zeros((100_000, 1)), rng)
    freq = np.array([(draws == v).mean() for v in y])
    se = np.sqrt(0.2 * 0.8 / 100_000)
    assert np.all(np.abs(freq - 0.2) < 3 * se)


def test_singleton_leaf_donor():
    rng = np.random.default_rng(6)
    X = np.arange(10.0)[:, None]
    y = rng.normal(size=10)
    f = fit_forest(X, y, ForestParams(n_trees=4, min_node=1, bootstrap=False), rng)
    draws = donor_draw(f, np.repeat(X[3:4], 500, axis=0), rng)
    assert np.all(draws == y[3])


def test_leaf_size_and_mask_invariants_over_seeds():
    for seed in range(100):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(5, 80))
        X = rng.normal(size=(n, 2))
        X[: n // 4, 1] = X[0, 1]  # ties
        y = X[:, 0] + rng.normal(size=n)
        params = ForestParams(n_trees=5, min_node=int(rng.integers(1, 6)))
        f = fit_forest(X, y, params, rng)
        counts = f.inbag_counts()
        assert np.all(counts.sum(axis=1) == n)
        for t in range(f.n_trees):
            base = t * f.capacity
            for k in range(base, base + f.n_nodes[t]):
                if f.feature[k] >= 0:  # only nodes above min_node rows are split
                    assert f.leaf_end[k] - f.leaf_start[k] > params.min_node
        for t, k in leaves(f):
            rows = f.samples[t, f.leaf_start[k]:f.leaf_end[k]]
            assert len(rows) >= 1
            assert f.value[k] == pytest.approx(y[rows].mean(), rel=1e-12, abs=1e-12)
        # each training row lands in a leaf whose donors share its side of every split
        ids = apply(f, X)
        for t in range(f.n_trees):
            inbag = np.flatnonzero(counts[t])
            for i in inbag:
                k = ids[i, t]
                assert i in f.samples[t, f.leaf_start[k]:f.leaf_end[k]]


def test_bit_reproducible():
    X = np.random.default_rng(7).normal(size=(50, 3))
    y = X @ [1.0, -1.0, 0.5]
    a = fit_forest(X, y, ForestParams(n_trees=10), np.random.default_rng(11))
    b = fit_forest(X, y, ForestParams(n_trees=10), np.random.default_rng(11))
    for name in ("feature", "threshold", "left", "right", "value", "samples"):
        assert np.array_equal(getattr(a, name), getattr(b, name))


def test_row_permutation_keeps_prediction_function():
    rng = np.random.default_rng(8)
    x = rng.normal(size=40)
    y = np.sin(x)
    params = ForestParams(n_trees=1, min_node=1, bootstrap=False)
    perm = rng.permutation(40)
    a = fit_forest(x[:, None], y, params, np.random.default_rng(0))
    b = fit_forest(x[perm, None], y[perm], params, np.random.default_rng(1))
    grid = np.linspace(-3, 3, 200)[:, None]
    assert np.array_equal(predict_mean(a, grid), predict_mean(b, grid))


def test_more_trees_reduce_variance():
    rng = np.random.default_rng(9)
    X = rng.normal(size=(80, 1))
    y = X[:, 0] + rng.normal(size=80)
    x0 = np.array([[0.3]])
    few = [predict_mean(fit_forest(X, y, ForestParams(n_trees=50), s), x0)[0] for s in range(40)]
    many = [predict_mean(fit_forest(X, y, ForestParams(n_trees=500), 100 + s), x0)[0] for s in range(40)]
    v50, v500 = np.var(few, ddof=1), np.var(many, ddof=1)
    se = np.sqrt(2 / 39) * np.hypot(v50, v500)
    assert v50 - v500 > 3 * se


def test_parameter_errors():
    with pytest.raises(ParameterError):
        fit_forest(np.zeros((1, 1)), np.zeros(1))
    with pytest.raises(ParameterError):
        ForestParams(n_trees=0)
    with pytest.raises(ParameterError):
        ForestParams(mtry=3).resolve_mtry(2)
    assert ForestParams().resolve_mtry(2) == 1
    assert ForestParams().resolve_mtry(7) == 2


def test_estimator_api():
    rng = np.random.default_rng(10)
    X = rng.normal(size=(100, 2))
    y = X[:, 0] * 2 + 0.1 * rng.normal(size=100)
    est = RandomForest(n_trees=50, random_state=0).fit(X, y)
    assert est.score(X, y) > 0.8
    assert est.oob_prediction_.shape == (100,)
    assert np.isin(est.draw_donors(X[:5], random_state=1), y).all()
    other = clone(est).fit(X, y)
    assert np.array_equal(other.predict(X), est.predict(X))
