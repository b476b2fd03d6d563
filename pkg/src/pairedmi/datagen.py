"""Bivariate matched-pairs data: ``X = S @ eps + [delta, 0]`` with ``S @ S = Sigma``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import PairedSample
from .exceptions import ParameterError

LAW_KINDS = ("normal", "exp", "chisq", "laplace")
CHISQ_DF = 30


@dataclass(frozen=True)
class ResidualLaw:
    """A zero-mean, unit-variance residual distribution.

    ``kind`` is one of ``normal``, ``exp`` (Exp(1) - 1), ``chisq``
    (standardized chi-squared with 30 df) or ``laplace`` (asymmetric Laplace
    with asymmetry ``kappa``, standardized analytically).
    """

    kind: str = "normal"
    kappa: float = 2.0

    def __post_init__(self):
        if self.kind not in LAW_KINDS:
            raise ParameterError(f"unknown residual law {self.kind!r}; expected one of {LAW_KINDS}")
        if self.kappa <= 0:
            raise ParameterError("asymmetric Laplace kappa must be positive")

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        if self.kind == "normal":
            return rng.standard_normal(size)
        if self.kind == "exp":
            return rng.standard_exponential(size) - 1.0
        if self.kind == "chisq":
            return (rng.chisquare(CHISQ_DF, size) - CHISQ_DF) / math.sqrt(2 * CHISQ_DF)
        # AL(kappa) as a difference of exponentials: E1 / kappa - kappa * E2
        k = self.kappa
        e1 = rng.standard_exponential(size)
        e2 = rng.standard_exponential(size)
        raw = e1 / k - k * e2
        return (raw - (1 / k - k)) / math.sqrt(1 / k**2 + k**2)


def sample_residual(law: ResidualLaw, rng: np.random.Generator) -> float:
    return float(law.sample(rng, None))


@dataclass(frozen=True)
class CovarianceSpec:
    """``sigma1``: [[1, rho], [rho, 1]]; ``sigma2``: [[1, 2 rho], [2 rho, 4]]."""

    variant: str = "sigma1"
    rho: float = 0.0

    def __post_init__(self):
        if self.variant not in ("sigma1", "sigma2"):
            raise ParameterError(f"unknown covariance variant {self.variant!r}")
        if not abs(self.rho) < 1:
            raise ParameterError(f"|rho| must be < 1, got {self.rho}")

    @property
    def matrix(self) -> np.ndarray:
        r = self.rho
        if self.variant == "sigma1":
            return np.array([[1.0, r], [r, 1.0]])
        return np.array([[1.0, 2 * r], [2 * r, 4.0]])


def matrix_sqrt(spec: CovarianceSpec) -> np.ndarray:
    """Symmetric positive-definite square root of a 2x2 covariance.

    Uses the closed form ``(M + s I) / t`` with ``s = sqrt(det M)`` and
    ``t = sqrt(trace M + 2 s)``.
    """
    m = spec.matrix
    s = math.sqrt(np.linalg.det(m))
    t = math.sqrt(np.trace(m) + 2 * s)
    return (m + s * np.eye(2)) / t


def generate(
    n: int,
    law: ResidualLaw,
    cov: CovarianceSpec,
    delta: float,
    rng: np.random.Generator,
) -> PairedSample:
    """Draw ``n`` i.i.d. fully observed pairs with mean ``[delta, 0]``."""
    if n < 1:
        raise ParameterError("n must be at least 1")
    if not math.isfinite(delta):
        raise ParameterError("delta must be finite")
    eps = law.sample(rng, (n, 2))
    x = eps @ matrix_sqrt(cov).T
    x[:, 0] += delta
    return PairedSample(x)
