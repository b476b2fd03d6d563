"""Normalized root mean squared imputation error over multiple draws."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .data import CompletedDataset, PairedSample
from .exceptions import UndefinedMetricError, ValidationError


@dataclass(frozen=True)
class NrmseReport:
    value: float
    m: int
    n_first: int
    n_second: int


def nrmse(truth: PairedSample, masked: PairedSample, draws: Sequence[CompletedDataset]) -> NrmseReport:
    """NRMSE of imputed pair cells against their true values.

    The numerator sums squared errors over the missing cells of both pair
    components and all draws; the denominator is ``m`` times the sum of
    squared deviations of the true missing values around their per-component
    means (taken over the missing cells only).
    """
    if truth.sizes[0] != truth.n:
        raise ValidationError("truth must be fully observed")
    if truth.n != masked.n:
        raise ValidationError("truth and masked samples differ in size")
    missing = ~masked.observed
    m = len(draws)
    if m < 1:
        raise ValidationError("need at least one imputation draw")
    num = 0.0
    for c in draws:
        if not np.array_equal(c.imputed_mask[:, :2], missing):
            raise ValidationError("draw mask does not match the masked sample")
        num += float(((c.matrix[:, :2] - truth.x)[missing] ** 2).sum())
    den = 0.0
    for j in range(2):
        t = truth.x[missing[:, j], j]
        if t.size:
            den += float(((t - t.mean()) ** 2).sum())
    den *= m
    if den <= 0:
        raise UndefinedMetricError("true missing values have no spread")
    return NrmseReport(math.sqrt(num / den), m, int(missing[:, 0].sum()), int(missing[:, 1].sum()))
