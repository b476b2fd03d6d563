"""Paired t and Welch statistics, and a Student-t distribution function.

The t distribution function goes through the regularized incomplete beta
function, evaluated by a modified-Lentz continued fraction, so that
fractional degrees of freedom (as produced by pooled multiple-imputation
inference) are handled exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .exceptions import DegenerateVarianceError, ParameterError

CF_TOL = 1e-14
CF_MAX_ITER = 300
_TINY = 1e-300

Df = Union[float, str]


@dataclass(frozen=True)
class TestOutcome:
    """Result of one hypothesis test.

    ``df`` is a positive real, ``math.inf``, or the string ``"permutation"``
    when the reference distribution is a resampling one.
    """

    __test__ = False  # not a pytest class

    statistic: float
    df: Df
    pvalue: float
    method: str

    def __post_init__(self):
        if not 0.0 <= self.pvalue <= 1.0:
            raise ValueError(f"p-value {self.pvalue} outside [0, 1]")
        if self.df != "permutation" and not self.df > 0:
            raise ValueError(f"degrees of freedom must be positive, got {self.df}")


def _betacf(a: float, b: float, x: float) -> float:
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < CF_TOL:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def betainc(a: float, b: float, x: float, y: float | None = None) -> float:
    """Regularized incomplete beta function ``I_x(a, b)``.

    ``y`` may carry ``1 - x`` computed without cancellation.
    """
    if a <= 0 or b <= 0:
        raise ParameterError("betainc requires a > 0 and b > 0")
    if y is None:
        y = 1.0 - x
    if x <= 0.0:
        return 0.0
    if y <= 0.0:
        return 1.0
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log(y)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, y) / b


def t_cdf(x: float, df: float) -> float:
    """Student-t distribution function with real ``df > 0``."""
    if not df > 0:
        raise ParameterError(f"df must be positive, got {df}")
    if math.isinf(df):
        return 0.5 * math.erfc(-x / math.sqrt(2.0))
    if x == 0.0:
        return 0.5
    t2 = x * x
    # tail = P(T > |x|) = I_{df/(df+x^2)}(df/2, 1/2) / 2
    tail = 0.5 * betainc(0.5 * df, 0.5, df / (df + t2), t2 / (df + t2))
    return 1.0 - tail if x > 0 else tail


def t_sf_two_sided(statistic: float, df: float) -> float:
    """Two-sided p-value ``P(|T| >= |statistic|)``."""
    return min(1.0, 2.0 * t_cdf(-abs(statistic), df))


def _check_spread(values: np.ndarray, var: float) -> bool:
    scale = float(np.max(np.abs(values))) if values.size else 0.0
    return var > (1e-14 * scale) ** 2


def paired_t(d) -> TestOutcome:
    """Paired t test on differences ``d`` (two-sided, df = n - 1)."""
    d = np.asarray(d, dtype=float)
    n = d.size
    if n < 2:
        raise ParameterError("paired t requires at least two differences")
    var = float(np.var(d, ddof=1))
    if not _check_spread(d, var):
        raise DegenerateVarianceError("differences have zero variance")
    stat = math.sqrt(n) * float(d.mean()) / math.sqrt(var)
    return TestOutcome(stat, n - 1, t_sf_two_sided(stat, n - 1), "paired-t")


def welch(g1, g2) -> float:
    """Welch-type two-sample statistic ``(mean1 - mean2) / sqrt(s1^2/n1 + s2^2/n2)``."""
    g1 = np.asarray(g1, dtype=float)
    g2 = np.asarray(g2, dtype=float)
    if g1.size < 2 or g2.size < 2:
        raise ParameterError("Welch statistic requires at least two values per group")
    v1 = float(np.var(g1, ddof=1))
    v2 = float(np.var(g2, ddof=1))
    se2 = v1 / g1.size + v2 / g2.size
    if not (_check_spread(g1, v1) or _check_spread(g2, v2)):
        raise DegenerateVarianceError("both groups have zero variance")
    return (float(g1.mean()) - float(g2.mean())) / math.sqrt(se2)


def one_sided_from_two(
    p_two: float,
    statistic_sign: int,
    direction: str = "greater",
    literal: bool = False,
) -> float:
    """Convert a two-sided p-value into a one-sided one.

    The sign-aware form returns ``p/2`` when the statistic points towards the
    alternative and ``1 - p/2`` otherwise (0.5 for a zero statistic).
    ``literal=True`` returns ``max(p/2, 1 - p/2)`` regardless of sign.
    """
    if not 0.0 <= p_two <= 1.0:
        raise ParameterError("p-value must lie in [0, 1]")
    if direction not in ("greater", "less"):
        raise ParameterError("direction must be 'greater' or 'less'")
    if literal:
        return max(p_two / 2, 1 - p_two / 2)
    sign = int(np.sign(statistic_sign))
    if sign == 0:
        return 0.5
    towards = sign > 0 if direction == "greater" else sign < 0
    return p_two / 2 if towards else 1 - p_two / 2
