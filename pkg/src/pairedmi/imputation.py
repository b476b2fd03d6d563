"""Multiple imputation engines: NORM, PMM, RF MI (missForest) and RF MICE.

All engines act on an ``(n, p)`` float matrix where ``nan`` marks a missing
cell. NORM, PMM and RF MICE are chained-equation samplers: missing cells are
initialized with random observed values of their column and then refreshed
column by column for ``n_iter`` sweeps. RF MI is the missForest loop: mean
initialization, forest predictions, and a stop as soon as the imputed values
stop converging.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .data import CompletedDataset, PairedSample
from .exceptions import ParameterError, RankError, ValidationError
from .forest import ForestParams, donor_draw, fit_forest, predict_mean
from .utils import check_missing_matrix, check_random_state

METHODS = ("norm", "pmm", "rfmi", "rfmice")
RIDGE = 1e-8


@dataclass(frozen=True)
class ImputationMethod:
    """Engine choice and its tuning.

    ``n_iter`` is the number of chained sweeps (NORM, PMM, RF MICE);
    ``max_iter`` caps the missForest loop; ``k`` is the PMM donor count.
    ``forest=None`` picks the engine default: 100 trees for RF MI and
    10 trees for RF MICE.
    """

    kind: str = "norm"
    k: int = 5
    n_iter: int = 5
    max_iter: int = 10
    forest: ForestParams | None = None

    def __post_init__(self):
        if self.kind not in METHODS:
            raise ParameterError(f"unknown imputation method {self.kind!r}; expected one of {METHODS}")
        if self.k < 1:
            raise ParameterError("PMM donor count k must be at least 1")
        if self.n_iter < 0:
            raise ParameterError("n_iter must be non-negative")
        if self.max_iter < 1:
            raise ParameterError("max_iter must be at least 1")

    @property
    def forest_params(self) -> ForestParams:
        if self.forest is not None:
            return self.forest
        return ForestParams(n_trees=10) if self.kind == "rfmice" else ForestParams()


# --------------------------------------------------------------------------
# Bayesian linear regression draws


def _design(predictors: np.ndarray) -> np.ndarray:
    return np.column_stack([np.ones(len(predictors)), predictors])


def _posterior_draw(Xo, yo, rng):
    """Least-squares fit and one draw of ``(beta, sigma)`` from its posterior."""
    n_obs, q = Xo.shape
    if n_obs <= q:
        raise RankError(f"{n_obs} observed rows cannot support {q} design columns")
    xtx = Xo.T @ Xo
    xtx = xtx + RIDGE * np.trace(xtx) / q * np.eye(q)
    V = np.linalg.inv(xtx)
    V = 0.5 * (V + V.T)
    beta_hat = V @ (Xo.T @ yo)
    resid = yo - Xo @ beta_hat
    df = n_obs - q
    sigma = np.sqrt(resid @ resid / rng.chisquare(df))
    beta_star = beta_hat + sigma * (np.linalg.cholesky(V) @ rng.standard_normal(q))
    return beta_hat, beta_star, sigma


def _split_target(target, predictors):
    target = np.asarray(target, dtype=float)
    predictors = np.asarray(predictors, dtype=float)
    if predictors.ndim == 1:
        predictors = predictors[:, None]
    miss = np.isnan(target)
    X = _design(predictors)
    return X[~miss], target[~miss], X[miss]


def norm_draw(target, predictors, rng) -> np.ndarray:
    """Impute the missing entries of ``target`` by a Bayesian linear-regression draw.

    ``predictors`` must be complete. The draw is
    ``x_mis @ beta* + sigma* z`` with ``sigma*^2 = SSR / chi2(n_obs - q)`` and
    ``beta* ~ N(beta_hat, sigma*^2 (X'X + eps I)^-1)``.
    """
    Xo, yo, Xm = _split_target(target, predictors)
    _, beta_star, sigma = _posterior_draw(Xo, yo, rng)
    return Xm @ beta_star + sigma * rng.standard_normal(len(Xm))


def pmm_draw(target, predictors, k: int, rng) -> np.ndarray:
    """Predictive mean matching (type-1): donors are matched on ``X_obs b_hat`` vs ``X_mis b*``."""
    Xo, yo, Xm = _split_target(target, predictors)
    if len(yo) < k:
        raise RankError(f"PMM needs at least k={k} observed rows, got {len(yo)}")
    beta_hat, beta_star, _ = _posterior_draw(Xo, yo, rng)
    yhat_obs = Xo @ beta_hat
    yhat_mis = Xm @ beta_star
    dist = np.abs(yhat_mis[:, None] - yhat_obs[None, :])
    nearest = np.argsort(dist, axis=1, kind="stable")[:, :k]
    pick = rng.integers(0, k, size=len(Xm))
    return yo[nearest[np.arange(len(Xm)), pick]]


def rf_donor_draw(target, predictors, params: ForestParams, rng) -> np.ndarray:
    """Forest leaf donors for the missing entries of ``target``."""
    Xo, yo, Xm = _split_target(target, predictors)
    forest = fit_forest(Xo[:, 1:], yo, params, rng)
    return donor_draw(forest, Xm[:, 1:], rng)


def rf_predict(target, predictors, params: ForestParams, rng) -> np.ndarray:
    Xo, yo, Xm = _split_target(target, predictors)
    forest = fit_forest(Xo[:, 1:], yo, params, rng)
    return predict_mean(forest, Xm[:, 1:])


# --------------------------------------------------------------------------
# Chained equations


def _visit_order(missing: np.ndarray) -> np.ndarray:
    counts = missing.sum(axis=0)
    cols = np.flatnonzero(counts)
    return cols[np.argsort(counts[cols], kind="stable")]


def _validate(data: np.ndarray) -> np.ndarray:
    missing = np.isnan(data)
    n_obs = (~missing).sum(axis=0)
    for j in np.flatnonzero(missing.any(axis=0)):
        if n_obs[j] == 0:
            raise ValidationError(f"column {j} is entirely missing")
        if n_obs[j] < 2:
            raise ValidationError(f"column {j} has fewer than two observed values")
    return missing


@dataclass
class ChainedState:
    """Current completed matrix of a chained-equations run."""

    matrix: np.ndarray
    missing: np.ndarray
    order: np.ndarray = field(default=None)
    iteration: int = 0

    def __post_init__(self):
        if self.order is None:
            self.order = _visit_order(self.missing)

    @classmethod
    def initialize(cls, data, rng) -> "ChainedState":
        """Fill each missing cell with a uniformly drawn observed value of its column."""
        data = np.array(data, dtype=float)
        missing = _validate(data)
        state = cls(data, missing)
        for j in state.order:
            obs = data[~missing[:, j], j]
            data[missing[:, j], j] = obs[rng.integers(0, len(obs), size=missing[:, j].sum())]
        return state


Drawer = Callable[[np.ndarray, np.ndarray, np.random.Generator], np.ndarray]


def chained_sweep(state: ChainedState, draw: Drawer, rng) -> ChainedState:
    """One sweep: each incomplete column is re-drawn given the current other columns."""
    Z = state.matrix.copy()
    p = Z.shape[1]
    for j in state.order:
        miss = state.missing[:, j]
        target = np.where(miss, np.nan, Z[:, j])
        others = np.delete(Z, j, axis=1) if p > 1 else np.zeros((len(Z), 0))
        Z[miss, j] = draw(target, others, rng)
    return ChainedState(Z, state.missing, state.order, state.iteration + 1)


def _drawer(method: ImputationMethod) -> Drawer:
    if method.kind == "norm":
        return norm_draw
    if method.kind == "pmm":
        return lambda t, x, rng: pmm_draw(t, x, method.k, rng)
    if method.kind == "rfmice":
        params = method.forest_params
        return lambda t, x, rng: rf_donor_draw(t, x, params, rng)
    raise ParameterError(f"{method.kind} is not a chained-equations engine")


def rf_mice_sweep(state: ChainedState, params: ForestParams, rng) -> ChainedState:
    return chained_sweep(state, lambda t, x, g: rf_donor_draw(t, x, params, g), rng)


def chained_impute(data, method: ImputationMethod, rng) -> np.ndarray:
    rng = check_random_state(rng)
    state = ChainedState.initialize(data, rng)
    draw = _drawer(method)
    for _ in range(method.n_iter):
        state = chained_sweep(state, draw, rng)
    return state.matrix


def rf_mi_complete(data, params: ForestParams = ForestParams(), rng=None, max_iter: int = 10):
    """missForest imputation of one matrix.

    Returns the completed matrix and the trace of normalized changes
    ``sum((new - old)^2) / sum(new^2)`` over imputed cells, one per sweep.
    The loop stops at the first sweep whose change does not decrease and
    returns the matrix from before that sweep, or after ``max_iter`` sweeps.
    """
    rng = check_random_state(rng)
    Z = np.array(data, dtype=float)
    missing = _validate(Z)
    order = _visit_order(missing)
    trace: list[float] = []
    if not missing.any():
        return Z, trace
    for j in order:
        Z[missing[:, j], j] = np.nanmean(Z[:, j])
    prev = np.inf
    for _ in range(max_iter):
        new = Z.copy()
        for j in order:
            miss = missing[:, j]
            target = np.where(miss, np.nan, new[:, j])
            new[miss, j] = rf_predict(target, np.delete(new, j, axis=1), params, rng)
        num = float(((new - Z)[missing] ** 2).sum())
        den = float((new[missing] ** 2).sum())
        delta = num / den if den > 0 else 0.0
        trace.append(delta)
        if delta >= prev:
            return Z, trace
        prev = delta
        Z = new
    return Z, trace


def impute_once(data, method: ImputationMethod, rng):
    """One completed matrix; the second value is the RF MI change trace (else ``None``)."""
    if method.kind == "rfmi":
        return rf_mi_complete(data, method.forest_params, rng, method.max_iter)
    return chained_impute(data, method, rng), None


def multiple_impute_traced(sample: PairedSample, method: ImputationMethod, m: int, rng=None):
    """Like :func:`multiple_impute`, also returning each draw's RF MI change trace."""
    if m < 1:
        raise ParameterError("m must be at least 1")
    rng = check_random_state(rng)
    data = sample.matrix()
    mask = np.isnan(data)
    out, traces = [], []
    for child in rng.spawn(m):
        Z, trace = impute_once(data, method, child)
        out.append(CompletedDataset(Z, mask))
        traces.append(trace)
    return out, traces


def multiple_impute(sample: PairedSample, method: ImputationMethod, m: int, rng=None) -> list[CompletedDataset]:
    """``m`` independent completions of the pair columns plus auxiliaries."""
    return multiple_impute_traced(sample, method, m, rng)[0]


# --------------------------------------------------------------------------
# Estimator API


class _BaseImputer(TransformerMixin, BaseEstimator):
    """Transductive imputer: ``fit`` completes X, ``transform`` completes new data."""

    def _method(self) -> ImputationMethod:
        raise NotImplementedError

    def fit(self, X, y=None):
        X = check_missing_matrix(X)
        self._rng = check_random_state(self.random_state)
        self.n_features_in_ = X.shape[1]
        self.completed_, self.trace_ = impute_once(X, self._method(), self._rng)
        return self

    def fit_transform(self, X, y=None, **fit_params):
        return self.fit(X).completed_.copy()

    def transform(self, X):
        check_is_fitted(self, "completed_")
        X = check_missing_matrix(X)
        if X.shape[1] != self.n_features_in_:
            raise ValidationError(f"expected {self.n_features_in_} columns, got {X.shape[1]}")
        Z, _ = impute_once(X, self._method(), self._rng)
        return Z


class NormImputer(_BaseImputer):
    """Chained Bayesian linear-regression imputation.

    Parameters
    ----------
    n_iter : int, default=5
        Number of chained sweeps.
    random_state : int, Generator or None
    """

    def __init__(self, n_iter=5, random_state=None):
        self.n_iter = n_iter
        self.random_state = random_state

    def _method(self):
        return ImputationMethod("norm", n_iter=self.n_iter)


class PMMImputer(_BaseImputer):
    """Chained predictive mean matching with ``k`` donors."""

    def __init__(self, k=5, n_iter=5, random_state=None):
        self.k = k
        self.n_iter = n_iter
        self.random_state = random_state

    def _method(self):
        return ImputationMethod("pmm", k=self.k, n_iter=self.n_iter)


class MissForestImputer(_BaseImputer):
    """Iterative random-forest imputation (missForest).

    Parameters
    ----------
    n_trees, mtry, min_node, max_depth : forest settings
    max_iter : int, default=10
    random_state : int, Generator or None

    Attributes
    ----------
    completed_ : ndarray
    trace_ : list of float
        Normalized change of the imputed values after each sweep.
    """

    def __init__(self, n_trees=100, mtry=None, min_node=5, max_depth=None, max_iter=10,
                 random_state=None):
        self.n_trees = n_trees
        self.mtry = mtry
        self.min_node = min_node
        self.max_depth = max_depth
        self.max_iter = max_iter
        self.random_state = random_state

    def _method(self):
        forest = ForestParams(self.n_trees, self.mtry, self.min_node, self.max_depth)
        return ImputationMethod("rfmi", max_iter=self.max_iter, forest=forest)


class RFMiceImputer(_BaseImputer):
    """Chained equations with random-forest leaf donors."""

    def __init__(self, n_trees=10, mtry=None, min_node=5, max_depth=None, n_iter=5,
                 random_state=None):
        self.n_trees = n_trees
        self.mtry = mtry
        self.min_node = min_node
        self.max_depth = max_depth
        self.n_iter = n_iter
        self.random_state = random_state

    def _method(self):
        forest = ForestParams(self.n_trees, self.mtry, self.min_node, self.max_depth)
        return ImputationMethod("rfmice", n_iter=self.n_iter, forest=forest)


def make_imputer(method: ImputationMethod, random_state=None) -> _BaseImputer:
    f = method.forest_params
    if method.kind == "norm":
        return NormImputer(method.n_iter, random_state)
    if method.kind == "pmm":
        return PMMImputer(method.k, method.n_iter, random_state)
    if method.kind == "rfmi":
        return MissForestImputer(f.n_trees, f.mtry, f.min_node, f.max_depth, method.max_iter, random_state)
    return RFMiceImputer(f.n_trees, f.mtry, f.min_node, f.max_depth, method.n_iter, random_state)
