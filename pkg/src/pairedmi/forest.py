"""Regression random forest with leaf donor access.

CART trees grown on bootstrap samples, choosing among ``mtry`` randomly
ordered features at every node. Each leaf keeps the in-bag training rows
that reached it, so the forest can either average them (``predict_mean``)
or hand out one of them at random (``donor_draw``).

Tree growing is compiled with numba; all randomness is drawn up front from
a numpy ``Generator`` so results are reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .exceptions import ParameterError
from .utils import check_random_state


@dataclass(frozen=True)
class ForestParams:
    """Forest hyperparameters.

    ``mtry=None`` means ``max(1, p // 3)``; ``max_depth=None`` means
    unlimited and ``max_depth=0`` grows single-leaf trees.
    """

    n_trees: int = 100
    mtry: int | None = None
    min_node: int = 5
    max_depth: int | None = None
    bootstrap: bool = True

    def __post_init__(self):
        if self.n_trees < 1:
            raise ParameterError("n_trees must be at least 1")
        if self.min_node < 1:
            raise ParameterError("min_node must be at least 1")
        if self.mtry is not None and self.mtry < 1:
            raise ParameterError("mtry must be at least 1")
        if self.max_depth is not None and self.max_depth < 0:
            raise ParameterError("max_depth must be non-negative")

    def resolve_mtry(self, p: int) -> int:
        mtry = max(1, p // 3) if self.mtry is None else self.mtry
        if mtry > p:
            raise ParameterError(f"mtry={mtry} exceeds the number of features {p}")
        return mtry


@dataclass(frozen=True, eq=False)
class FittedForest:
    """Flat storage of all trees.

    Tree ``t`` owns node slots ``[t * capacity, t * capacity + n_nodes[t])``;
    node slot ``k`` is a leaf when ``feature[k] < 0``, in which case the
    training rows in ``samples[t, leaf_start[k]:leaf_end[k]]`` are its
    in-bag donors (with bootstrap multiplicity).
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    leaf_start: np.ndarray
    leaf_end: np.ndarray
    value: np.ndarray
    samples: np.ndarray
    n_nodes: np.ndarray
    capacity: int
    y: np.ndarray
    n_features: int

    @property
    def n_trees(self) -> int:
        return len(self.n_nodes)

    def inbag_counts(self) -> np.ndarray:
        """(n_trees, n) bootstrap multiplicities of the training rows."""
        n = len(self.y)
        return np.stack([np.bincount(s, minlength=n) for s in self.samples])


@njit(cache=True)
def _grow_tree(X, y, x_order, idx, keys, mtry, min_node, max_depth, base,
               feature, threshold, left, right, leaf_start, leaf_end, value):
    n_inst = idx.shape[0]
    p = X.shape[1]
    # node rows are kept contiguous: idx, xi and yi are partitioned together
    if p == 1:
        # stable partitioning keeps every node sorted, so one sort suffices;
        # counting sort of the bootstrap draw against the presorted rows
        counts = np.zeros(y.shape[0], np.int64)
        for i in range(n_inst):
            counts[idx[i]] += 1
        pos = 0
        for r in x_order:
            for c in range(counts[r]):
                idx[pos] = r
                pos += 1
    xi = np.empty((n_inst, p))
    yi = np.empty(n_inst)
    for i in range(n_inst):
        r = idx[i]
        yi[i] = y[r]
        for f in range(p):
            xi[i, f] = X[r, f]
    stack_node = np.empty(2 * n_inst + 1, np.int64)
    stack_start = np.empty(2 * n_inst + 1, np.int64)
    stack_end = np.empty(2 * n_inst + 1, np.int64)
    stack_depth = np.empty(2 * n_inst + 1, np.int64)
    stack_node[0] = 0
    stack_start[0] = 0
    stack_end[0] = n_inst
    stack_depth[0] = 0
    top = 1
    n_nodes = 1
    xs = np.empty(n_inst)
    ys = np.empty(n_inst)
    tmp_i = np.empty(n_inst, np.int64)
    tmp_y = np.empty(n_inst)
    tmp_x = np.empty((n_inst, p))
    order = np.empty(p, np.int64)
    srt = np.arange(n_inst)
    inv = np.empty(n_inst + 1)
    inv[0] = 0.0
    for i in range(1, n_inst + 1):
        inv[i] = 1.0 / i
    while top > 0:
        top -= 1
        node = stack_node[top]
        start = stack_start[top]
        end = stack_end[top]
        depth = stack_depth[top]
        size = end - start
        k = base + node
        total = 0.0
        ymin = np.inf
        ymax = -np.inf
        for i in range(start, end):
            v = yi[i]
            total += v
            if v < ymin:
                ymin = v
            if v > ymax:
                ymax = v
        value[k] = total / size
        feature[k] = -1
        leaf_start[k] = start
        leaf_end[k] = end
        if size <= min_node or ymin == ymax or (max_depth >= 0 and depth >= max_depth):
            continue
        # random feature order: insertion sort of this node's keys
        for j in range(p):
            kv = keys[node, j]
            m = j
            while m > 0 and keys[node, order[m - 1]] > kv:
                order[m] = order[m - 1]
                m -= 1
            order[m] = j
        best_score = -np.inf
        best_f = -1
        best_thr = 0.0
        tried = 0
        for j in range(p):
            if tried >= mtry:
                break
            f = order[j]
            if p == 1:
                for i in range(size):
                    xs[i] = xi[start + i, 0]
                    ys[i] = yi[start + i]
            else:
                for i in range(size):
                    tmp_y[i] = xi[start + i, f]
                s2 = np.argsort(tmp_y[:size], kind="mergesort")
                for i in range(size):
                    srt[i] = s2[i]
                    xs[i] = tmp_y[s2[i]]
                    ys[i] = yi[start + s2[i]]
            if xs[0] == xs[size - 1]:
                continue
            tried += 1
            s_left = 0.0
            for i in range(size - 1):
                s_left += ys[i]
                n_left = i + 1
                n_right = size - n_left
                if n_left < 1:
                    continue
                if n_right < 1:
                    break
                lo = xs[i]
                hi = xs[i + 1]
                if lo == hi:
                    continue
                s_right = total - s_left
                score = s_left * s_left * inv[n_left] + s_right * s_right * inv[n_right]
                if score > best_score:
                    best_score = score
                    best_f = f
                    mid = 0.5 * (lo + hi)
                    best_thr = mid if mid < hi else lo
        if best_f < 0:
            continue
        # stable partition so rows with x <= thr come first
        n_left = 0
        n_right = 0
        for i in range(start, end):
            if xi[i, best_f] <= best_thr:
                dst = start + n_left
                idx[dst] = idx[i]
                yi[dst] = yi[i]
                for f in range(p):
                    xi[dst, f] = xi[i, f]
                n_left += 1
            else:
                tmp_i[n_right] = idx[i]
                tmp_y[n_right] = yi[i]
                for f in range(p):
                    tmp_x[n_right, f] = xi[i, f]
                n_right += 1
        for i in range(n_right):
            dst = start + n_left + i
            idx[dst] = tmp_i[i]
            yi[dst] = tmp_y[i]
            for f in range(p):
                xi[dst, f] = tmp_x[i, f]
        feature[k] = best_f
        threshold[k] = best_thr
        lnode = n_nodes
        rnode = n_nodes + 1
        n_nodes += 2
        left[k] = lnode
        right[k] = rnode
        stack_node[top] = rnode
        stack_start[top] = start + n_left
        stack_end[top] = end
        stack_depth[top] = depth + 1
        top += 1
        stack_node[top] = lnode
        stack_start[top] = start
        stack_end[top] = start + n_left
        stack_depth[top] = depth + 1
        top += 1
    return n_nodes


@njit(cache=True)
def _grow_forest(X, y, x_order, boot, keys, mtry, min_node, max_depth, capacity,
                 feature, threshold, left, right, leaf_start, leaf_end, value, n_nodes):
    for t in range(boot.shape[0]):
        n_nodes[t] = _grow_tree(X, y, x_order, boot[t], keys[t], mtry, min_node, max_depth, t * capacity,
                                feature, threshold, left, right, leaf_start, leaf_end, value)


@njit(cache=True)
def _leaf(feature, threshold, left, right, base, x):
    k = base
    while feature[k] >= 0:
        if x[feature[k]] <= threshold[k]:
            k = base + left[k]
        else:
            k = base + right[k]
    return k


@njit(cache=True)
def _predict_mean(feature, threshold, left, right, value, capacity, n_trees, X):
    out = np.zeros(X.shape[0])
    for i in range(X.shape[0]):
        acc = 0.0
        for t in range(n_trees):
            acc += value[_leaf(feature, threshold, left, right, t * capacity, X[i])]
        out[i] = acc / n_trees
    return out


@njit(cache=True)
def _donor_draw(feature, threshold, left, right, leaf_start, leaf_end, samples, capacity,
                y, X, trees, u):
    out = np.empty(X.shape[0])
    for i in range(X.shape[0]):
        t = trees[i]
        k = _leaf(feature, threshold, left, right, t * capacity, X[i])
        lo = leaf_start[k]
        width = leaf_end[k] - lo
        j = lo + min(int(u[i] * width), width - 1)
        out[i] = y[samples[t, j]]
    return out


@njit(cache=True)
def _leaf_ids(feature, threshold, left, right, capacity, n_trees, X):
    out = np.empty((X.shape[0], n_trees), np.int64)
    for i in range(X.shape[0]):
        for t in range(n_trees):
            out[i, t] = _leaf(feature, threshold, left, right, t * capacity, X[i])
    return out


def fit_forest(X, y, params: ForestParams = ForestParams(), rng=None) -> FittedForest:
    """Grow a forest of regression trees on ``(X, y)``."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise ParameterError("X must be (n, p) and y must be (n,)")
    n, p = X.shape
    if n < 2:
        raise ParameterError("a forest needs at least two training rows")
    if p < 1:
        raise ParameterError("a forest needs at least one feature")
    rng = check_random_state(rng)
    mtry = params.resolve_mtry(p)
    T = params.n_trees
    if params.bootstrap:
        boot = rng.integers(0, n, size=(T, n))
    else:
        boot = np.tile(np.arange(n), (T, 1))
    capacity = 2 * n
    # one random feature ordering per potential internal node
    if p > 1:
        keys = rng.random((T, capacity, p))
    else:
        keys = np.zeros((T, capacity, 1))
    size = T * capacity
    feature = np.full(size, -1, np.int64)
    threshold = np.zeros(size)
    left = np.full(size, -1, np.int64)
    right = np.full(size, -1, np.int64)
    leaf_start = np.zeros(size, np.int64)
    leaf_end = np.zeros(size, np.int64)
    value = np.zeros(size)
    n_nodes = np.zeros(T, np.int64)
    max_depth = -1 if params.max_depth is None else params.max_depth
    x_order = np.argsort(X[:, 0], kind="stable")
    _grow_forest(X, y, x_order, boot, keys, mtry, params.min_node, max_depth, capacity,
                 feature, threshold, left, right, leaf_start, leaf_end, value, n_nodes)
    return FittedForest(feature, threshold, left, right, leaf_start, leaf_end, value,
                        boot, n_nodes, capacity, y, p)


def _as_rows(forest: FittedForest, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != forest.n_features:
        raise ParameterError(f"expected {forest.n_features} features, got {X.shape[1]}")
    return np.ascontiguousarray(X)


def predict_mean(forest: FittedForest, X) -> np.ndarray:
    """Average over trees of the mean in-bag response of each row's leaf."""
    X = _as_rows(forest, X)
    f = forest
    return _predict_mean(f.feature, f.threshold, f.left, f.right, f.value, f.capacity, f.n_trees, X)


def donor_draw(forest: FittedForest, X, rng=None) -> np.ndarray:
    """One random donor per row: a uniform tree, then a uniform in-bag row of the leaf."""
    X = _as_rows(forest, X)
    rng = check_random_state(rng)
    trees = rng.integers(0, forest.n_trees, size=X.shape[0])
    u = rng.random(X.shape[0])
    f = forest
    return _donor_draw(f.feature, f.threshold, f.left, f.right, f.leaf_start, f.leaf_end,
                       f.samples, f.capacity, f.y, X, trees, u)


def apply(forest: FittedForest, X) -> np.ndarray:
    """(n, n_trees) global node slots of the leaves reached by each row."""
    X = _as_rows(forest, X)
    f = forest
    return _leaf_ids(f.feature, f.threshold, f.left, f.right, f.capacity, f.n_trees, X)


def oob_predict(forest: FittedForest, X_train) -> np.ndarray:
    """Out-of-bag predictions for the training rows (``nan`` if never out of bag)."""
    leaves = apply(forest, X_train)
    oob = forest.inbag_counts() == 0
    vals = forest.value[leaves]
    num = (vals * oob.T).sum(axis=1)
    cnt = oob.T.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        return num / cnt


class RandomForest(RegressorMixin, BaseEstimator):
    """Random forest regressor exposing leaf donors.

    Parameters
    ----------
    n_trees : int, default=100
    mtry : int or None, default=None
        Features tried per split; ``None`` means ``max(1, p // 3)``.
    min_node : int, default=5
        Nodes holding at most this many in-bag rows are not split further
        (the ``nodesize`` rule of R's randomForest); children may be smaller.
    max_depth : int or None, default=None
    bootstrap : bool, default=True
    random_state : int, Generator or None

    Attributes
    ----------
    forest_ : FittedForest
    oob_prediction_ : ndarray of shape (n_samples,)
    """

    def __init__(self, n_trees=100, mtry=None, min_node=5, max_depth=None, bootstrap=True,
                 random_state=None):
        self.n_trees = n_trees
        self.mtry = mtry
        self.min_node = min_node
        self.max_depth = max_depth
        self.bootstrap = bootstrap
        self.random_state = random_state

    def _params(self) -> ForestParams:
        return ForestParams(self.n_trees, self.mtry, self.min_node, self.max_depth, self.bootstrap)

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64, y_numeric=True)
        self._rng = check_random_state(self.random_state)
        self.forest_ = fit_forest(X, y, self._params(), self._rng)
        self.n_features_in_ = X.shape[1]
        self.oob_prediction_ = oob_predict(self.forest_, X)
        return self

    def predict(self, X):
        check_is_fitted(self, "forest_")
        return predict_mean(self.forest_, check_array(X, dtype=np.float64))

    def draw_donors(self, X, random_state=None):
        """Random in-bag donor responses for each row of ``X``."""
        check_is_fitted(self, "forest_")
        rng = self._rng if random_state is None else check_random_state(random_state)
        return donor_draw(self.forest_, check_array(X, dtype=np.float64), rng)
