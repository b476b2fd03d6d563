import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pairedmi.data import CompletedDataset, FixedCounts, PairedSample, inject_mcar
from pairedmi.exceptions import UndefinedMetricError, ValidationError
from pairedmi.metrics import nrmse


def setup(seed, n=12, sizes=(4, 3)):
    rng = np.random.default_rng(seed)
    truth = PairedSample(rng.normal(size=(n, 2)))
    masked = inject_mcar(truth, FixedCounts(*sizes), rng)
    return truth, masked, rng


def fill(masked, values):
    m = np.array(masked.x)
    miss = np.isnan(m)
    m[miss] = values
    return CompletedDataset(m, miss)


def test_perfect_imputation():
    truth, masked, _ = setup(0)
    miss = np.isnan(masked.x)
    assert nrmse(truth, masked, [fill(masked, truth.x[miss])] * 3).value == 0.0


def test_mean_imputation_is_one():
    truth, masked, _ = setup(1)
    miss = np.isnan(masked.x)
    m = np.array(masked.x)
    for j in range(2):
        m[miss[:, j], j] = truth.x[miss[:, j], j].mean()
    r = nrmse(truth, masked, [CompletedDataset(m, miss)])
    assert r.value == pytest.approx(1.0, abs=1e-14)
    assert (r.n_first, r.n_second) == (3, 4)


def brute(truth, masked, draws):
    num = 0.0
    for c in draws:
        for i in range(truth.n):
            for j in range(2):
                if math.isnan(masked.x[i, j]):
                    num += (truth.x[i, j] - c.matrix[i, j]) ** 2
    den = 0.0
    for j in range(2):
        vals = [truth.x[i, j] for i in range(truth.n) if math.isnan(masked.x[i, j])]
        mu = sum(vals) / len(vals)
        den += sum((v - mu) ** 2 for v in vals)
    return math.sqrt(num / (len(draws) * den))


@given(st.integers(0, 10**6), st.integers(1, 6))
def test_brute_force_six_cells(seed, m):
    truth, masked, rng = setup(seed, n=8, sizes=(3, 3))
    draws = [fill(masked, rng.normal(size=6)) for _ in range(m)]
    assert abs(nrmse(truth, masked, draws).value - brute(truth, masked, draws)) < 1e-12


@given(st.integers(0, 10**6), st.sampled_from([0.25, 2.0, 8.0]), st.floats(-100, 100))
def test_scale_and_shift(seed, c, shift):
    truth, masked, rng = setup(seed)
    draws = [fill(masked, rng.normal(size=7)) for _ in range(3)]
    base = nrmse(truth, masked, draws).value
    # powers of two scale exactly
    scaled = nrmse(PairedSample(truth.x * c), PairedSample(masked.x * c),
                   [CompletedDataset(d.matrix * c, d.imputed_mask) for d in draws]).value
    assert scaled == base
    shifted = nrmse(PairedSample(truth.x + shift), PairedSample(masked.x + shift),
                    [CompletedDataset(d.matrix + shift, d.imputed_mask) for d in draws]).value
    assert shifted == pytest.approx(base, rel=1e-9)


def test_undefined_and_invalid():
    truth, masked, _ = setup(2, n=5, sizes=(1, 1))
    miss = np.isnan(masked.x)
    with pytest.raises(UndefinedMetricError):
        nrmse(truth, masked, [fill(masked, [0.0, 0.0])])
    with pytest.raises(ValidationError):
        nrmse(masked, masked, [fill(masked, [0.0, 0.0])])
    with pytest.raises(ValidationError):
        nrmse(truth, masked, [])
