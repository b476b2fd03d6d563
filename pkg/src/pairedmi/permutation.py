"""Weighted permutation test for incompletely observed matched pairs.

The statistic combines a paired t statistic on the complete pairs with a
Welch statistic on the two groups of singletons,

    T = sqrt(a) * T_t(complete) + sqrt(1 - a) * T_w(first-only, second-only),

and is calibrated by permuting the two parts separately: the components of
each complete pair are swapped independently with probability 1/2, which is
the same as flipping the sign of its difference, while the singleton values
are pooled and re-split into groups of the original sizes.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .data import PairedSample
from .exceptions import ComputationError, DegenerateVarianceError, ParameterError, SizeError
from .stats import TestOutcome
from .utils import check_pairs, check_random_state

EXACT_BUDGET = 10**6
_BATCH = 4096


@dataclass(frozen=True)
class PermutationConfig:
    B: int = 1000
    a_override: float | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.B < 1:
            raise ParameterError("B must be at least 1")
        if self.a_override is not None and not 0.0 <= self.a_override <= 1.0:
            raise ParameterError("a_override must lie in [0, 1]")


def weight_a(n1: int, n2: int, n3: int) -> float:
    """Recommended weight ``2 n1 / (n + n1)`` of the complete-pairs statistic."""
    n = n1 + n2 + n3
    if n < 1:
        raise ParameterError("sample is empty")
    return 2.0 * n1 / (n + n1)


def count_arrangements(n1: int, n2: int, n3: int) -> int:
    """Number of sign-flip x regrouping arrangements."""
    return 2**n1 * math.comb(n2 + n3, n2)


def _parts(sample: PairedSample):
    """Complete differences and singleton values (row order) with first-only flags."""
    obs = sample.observed
    c = obs[:, 0] & obs[:, 1]
    d = sample.x[c, 0] - sample.x[c, 1]
    single = ~c
    values = np.where(obs[single, 0], sample.x[single, 0], sample.x[single, 1])
    is_first = obs[single, 0]
    return d, values, is_first


def _check_sizes(n1: int, n2: int, n3: int, a: float):
    if a > 0 and n1 < 2:
        raise DegenerateVarianceError(f"weight a={a:.3g} > 0 needs at least two complete pairs, got {n1}")
    if a < 1 and (n2 < 2 or n3 < 2):
        raise DegenerateVarianceError(
            f"weight a={a:.3g} < 1 needs at least two singletons per group, got ({n2}, {n3})"
        )


def _ratio(num, var, scale):
    """num / sqrt(var) row-wise; 0 where both vanish, nan where only var does."""
    zero_var = var <= (1e-14 * scale) ** 2
    out = np.empty_like(num)
    ok = ~zero_var
    out[ok] = num[ok] / np.sqrt(var[ok])
    out[zero_var] = np.where(num[zero_var] == 0.0, 0.0, np.nan)
    return out


def _paired_stats(ds: np.ndarray) -> np.ndarray:
    """Row-wise paired t statistics of a (B, n1) matrix of differences."""
    n1 = ds.shape[1]
    mean = ds.sum(axis=1) / n1
    var = ((ds - mean[:, None]) ** 2).sum(axis=1) / (n1 - 1)
    scale = np.abs(ds).max(axis=1) if n1 else np.zeros(len(ds))
    return _ratio(math.sqrt(n1) * mean, var, scale)


def _welch_stats(values: np.ndarray, first: np.ndarray) -> np.ndarray:
    """Row-wise Welch statistics; ``first`` is a (B, N) membership mask."""
    n2 = first[0].sum()
    n3 = first.shape[1] - n2
    m1 = np.where(first, values, 0.0)
    m2 = np.where(first, 0.0, values)
    mean1 = m1.sum(axis=1) / n2
    mean2 = m2.sum(axis=1) / n3
    v1 = (np.where(first, values - mean1[:, None], 0.0) ** 2).sum(axis=1) / (n2 - 1)
    v2 = (np.where(first, 0.0, values - mean2[:, None]) ** 2).sum(axis=1) / (n3 - 1)
    scale = np.full(len(first), np.abs(values).max())
    return _ratio(mean1 - mean2, v1 / n2 + v2 / n3, scale)


def tml_statistics(d, values, signs, first, a: float) -> np.ndarray:
    """T_ML for each row of an explicit batch of arrangements.

    Parameters
    ----------
    d : ndarray (n1,)
        Complete-pair differences.
    values : ndarray (N,)
        Singleton values in row order.
    signs : ndarray (B, n1)
        +1/-1 sign flips for the complete differences.
    first : ndarray (B, N) of bool
        Membership of each singleton in the first-only group.
    a : float
        Weight of the complete-pairs statistic.

    Returns ``nan`` for arrangements with a degenerate needed branch.
    """
    B = len(signs)
    total = np.zeros(B)
    if a > 0:
        total += math.sqrt(a) * _paired_stats(signs * d[None, :])
    if a < 1:
        total += math.sqrt(1.0 - a) * _welch_stats(np.asarray(values, float), first)
    return total


def t_ml(sample: PairedSample, a: float | None = None) -> float:
    """Observed weighted statistic; ``a`` defaults to :func:`weight_a`."""
    n1, n2, n3 = sample.sizes
    if a is None:
        a = weight_a(n1, n2, n3)
    if not 0.0 <= a <= 1.0:
        raise ParameterError("a must lie in [0, 1]")
    _check_sizes(n1, n2, n3, a)
    d, values, is_first = _parts(sample)
    stat = tml_statistics(d, values, np.ones((1, n1)), is_first[None, :], a)[0]
    if np.isnan(stat):
        raise DegenerateVarianceError("a needed branch of T_ML has zero variance")
    return float(stat)


def _draw(rng, n_rows, n1, N, n2):
    signs = np.where(rng.random((n_rows, n1)) < 0.5, -1.0, 1.0)
    keys = rng.random((n_rows, N))
    return signs, _first_from_keys(keys, n2)


def _first_from_keys(keys, n2):
    """Singletons holding the ``n2`` smallest keys form the first-only group."""
    ranks = np.argsort(np.argsort(keys, axis=1, kind="stable"), axis=1, kind="stable")
    return ranks < n2


def _exceed_count(t_star: np.ndarray, t_obs: float) -> int:
    # relative slack absorbs summation-order rounding of tied arrangements
    return int(np.count_nonzero(np.abs(t_star) >= abs(t_obs) * (1 - 1e-12)))


def permutation_distribution(sample: PairedSample, cfg: PermutationConfig, rng=None):
    """Observed statistic, B permuted statistics and the number of re-draws.

    Permuted arrangements with a degenerate needed branch are re-drawn; the
    run aborts after ``100 * B`` re-draws.
    """
    rng = check_random_state(cfg.seed if rng is None else rng)
    n1, n2, n3 = sample.sizes
    a = weight_a(n1, n2, n3) if cfg.a_override is None else cfg.a_override
    t_obs = t_ml(sample, a)
    d, values, _ = _parts(sample)
    N = n2 + n3
    out = np.empty(cfg.B)
    filled = 0
    redraws = 0
    while filled < cfg.B:
        want = min(_BATCH, cfg.B - filled)
        signs, first = _draw(rng, want, n1, N, n2)
        t = tml_statistics(d, values, signs, first, a)
        good = t[~np.isnan(t)]
        redraws += want - good.size
        if redraws > 100 * cfg.B:
            raise ComputationError(f"more than {100 * cfg.B} degenerate permutation re-draws")
        out[filled : filled + good.size] = good
        filled += good.size
    return t_obs, out, redraws


def permute_and_test(sample: PairedSample, cfg: PermutationConfig = PermutationConfig(), rng=None) -> TestOutcome:
    """Permutation test of equal means; add-one two-sided p-value."""
    t_obs, t_star, _ = permutation_distribution(sample, cfg, rng)
    p = (1 + _exceed_count(t_star, t_obs)) / (cfg.B + 1)
    return TestOutcome(t_obs, "permutation", p, "tml")


def enumerate_exact(sample: PairedSample, a: float | None = None) -> float:
    """Exact two-sided permutation p-value over all arrangements.

    Arrangements with a degenerate needed branch are excluded from the
    reference set, matching the re-draw rule of :func:`permute_and_test`.
    """
    n1, n2, n3 = sample.sizes
    total = count_arrangements(n1, n2, n3)
    if total > EXACT_BUDGET:
        raise SizeError(f"{total} arrangements exceed the budget of {EXACT_BUDGET}")
    if a is None:
        a = weight_a(n1, n2, n3)
    t_obs = t_ml(sample, a)
    d, values, _ = _parts(sample)
    signs = np.array(list(itertools.product((1.0, -1.0), repeat=n1))).reshape(-1, n1)
    N = n2 + n3
    firsts = np.zeros((math.comb(N, n2), N), dtype=bool)
    for i, idx in enumerate(itertools.combinations(range(N), n2)):
        firsts[i, list(idx)] = True
    tt = _paired_stats(signs * d[None, :]) if a > 0 else np.zeros(len(signs))
    tw = _welch_stats(values, firsts) if a < 1 else np.zeros(len(firsts))
    t_all = (math.sqrt(a) * tt[:, None] + math.sqrt(1.0 - a) * tw[None, :]).ravel()
    t_all = t_all[~np.isnan(t_all)]
    return _exceed_count(t_all, t_obs) / t_all.size


class WeightedPermutationTest(BaseEstimator):
    """Estimator wrapper around :func:`permute_and_test`.

    Parameters
    ----------
    n_permutations : int, default=1000
        Number of permutation replicates B.
    weight : float or None, default=None
        Weight of the complete-pairs statistic; ``None`` uses ``2 n1 / (n + n1)``.
    random_state : int, Generator or None
        Seed of the permutation stream.

    Attributes
    ----------
    statistic_, pvalue_, weight_ : float
    sizes_ : tuple of int
        ``(n1, n2, n3)`` of the fitted data.
    """

    def __init__(self, n_permutations=1000, weight=None, random_state=None):
        self.n_permutations = n_permutations
        self.weight = weight
        self.random_state = random_state

    def fit(self, X, y=None):
        sample = check_pairs(X)
        cfg = PermutationConfig(B=self.n_permutations, a_override=self.weight)
        outcome = permute_and_test(sample, cfg, check_random_state(self.random_state))
        self.sizes_ = sample.sizes
        self.weight_ = weight_a(*self.sizes_) if self.weight is None else self.weight
        self.statistic_ = outcome.statistic
        self.pvalue_ = outcome.pvalue
        self.outcome_ = outcome
        return self
