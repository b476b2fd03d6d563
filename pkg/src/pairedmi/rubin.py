"""Rubin's rules for the mean contrast and the multiple-imputation paired t test."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator

from .data import CompletedDataset, PairedSample
from .exceptions import DegenerateVarianceError, ParameterError
from .imputation import ImputationMethod, multiple_impute
from .stats import TestOutcome, t_sf_two_sided
from .utils import check_pairs, check_random_state


@dataclass(frozen=True)
class PooledEstimate:
    """Pooled mean contrast with its variance components and degrees of freedom.

    ``nu`` is the large-sample Rubin df (``inf`` when ``B == 0``), ``nu_obs``
    the observed-data df and ``nu_adj`` the small-sample adjusted df used for
    inference.
    """

    q_bar: float
    u_bar: float
    b: float
    t: float
    r: float
    nu: float
    nu_obs: float
    nu_adj: float
    m: int


def per_dataset_estimates(completed: CompletedDataset) -> tuple[float, float]:
    """Mean difference ``x1 - x2`` over all rows and its estimated variance ``s_d^2 / n``."""
    d = completed.differences
    n = d.size
    if n < 2:
        raise ParameterError("need at least two rows")
    var = float(np.var(d, ddof=1))
    if not var > (1e-14 * float(np.max(np.abs(d)))) ** 2:
        raise DegenerateVarianceError("completed differences have zero variance")
    return float(d.mean()), var / n


def rubin_pool(estimates: Sequence[tuple[float, float]], n: int) -> PooledEstimate:
    """Pool ``m >= 2`` (estimate, variance) pairs from a sample of size ``n``."""
    est = np.asarray(estimates, dtype=float).reshape(-1, 2)
    m = len(est)
    if m < 2:
        raise ParameterError("Rubin pooling needs m >= 2 imputations")
    q, u = est[:, 0], est[:, 1]
    q_bar = float(q.mean())
    u_bar = float(u.mean())
    b = float(((q - q_bar) ** 2).sum() / (m - 1))
    if u_bar <= 0:
        raise DegenerateVarianceError("within-imputation variance is zero")
    t = u_bar + (1 + 1 / m) * b
    r = (1 + 1 / m) * b / u_bar
    nu_obs = n * (n - 1) / ((1 + r) * (n + 2))
    # nu overflows to inf as r -> 0; written this way nu_adj tends to nu_obs
    inv = 1 + 1 / r if r > 0 else math.inf
    nu = (m - 1) * inv * inv if inv < 1e150 else math.inf
    nu_adj = nu_obs / (1 + nu_obs / nu)
    return PooledEstimate(q_bar, u_bar, b, t, r, nu, nu_obs, nu_adj, m)


def pooled_test(pooled: PooledEstimate, method: str = "mi") -> TestOutcome:
    stat = pooled.q_bar / math.sqrt(pooled.t)
    return TestOutcome(stat, pooled.nu_adj, t_sf_two_sided(stat, pooled.nu_adj), method)


@dataclass(frozen=True)
class MIAnalysis:
    outcome: TestOutcome
    pooled: PooledEstimate
    draws: list[CompletedDataset]


def mi_analysis(sample: PairedSample, method: ImputationMethod, m: int = 5, rng=None) -> MIAnalysis:
    """Impute ``m`` times, pool, and test ``H0: mu1 = mu2`` against ``t(nu_adj)``."""
    if m < 2:
        raise ParameterError("the pooled test needs m >= 2 imputations")
    draws = multiple_impute(sample, method, m, check_random_state(rng))
    pooled = rubin_pool([per_dataset_estimates(c) for c in draws], sample.n)
    return MIAnalysis(pooled_test(pooled, method.kind), pooled, draws)


def mi_t_test(sample: PairedSample, method: ImputationMethod, m: int = 5, rng=None) -> TestOutcome:
    return mi_analysis(sample, method, m, rng).outcome


class MIPairedTTest(BaseEstimator):
    """Paired t test after multiple imputation, pooled by Rubin's rules.

    Parameters
    ----------
    method : str, default="norm"
        One of ``norm``, ``pmm``, ``rfmi``, ``rfmice``.
    n_imputations : int, default=5
    k, n_iter, max_iter : engine settings (see :class:`ImputationMethod`)
    random_state : int, Generator or None

    Attributes
    ----------
    statistic_, pvalue_, df_ : float
    pooled_ : PooledEstimate
    """

    def __init__(self, method="norm", n_imputations=5, k=5, n_iter=5, max_iter=10, random_state=None):
        self.method = method
        self.n_imputations = n_imputations
        self.k = k
        self.n_iter = n_iter
        self.max_iter = max_iter
        self.random_state = random_state

    def fit(self, X, y=None):
        sample = check_pairs(X)
        method = ImputationMethod(self.method, k=self.k, n_iter=self.n_iter, max_iter=self.max_iter)
        res = mi_analysis(sample, method, self.n_imputations, check_random_state(self.random_state))
        self.pooled_ = res.pooled
        self.statistic_ = res.outcome.statistic
        self.pvalue_ = res.outcome.pvalue
        self.df_ = res.outcome.df
        self.outcome_ = res.outcome
        return self
