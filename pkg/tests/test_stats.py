import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, special
from scipy import stats as sps

from pairedmi.exceptions import DegenerateVarianceError, ParameterError
from pairedmi.stats import (
    TestOutcome,
    betainc,
    one_sided_from_two,
    paired_t,
    t_cdf,
    t_sf_two_sided,
    welch,
)


def t_density(u, df):
    logc = special.gammaln((df + 1) / 2) - special.gammaln(df / 2) - 0.5 * math.log(df * math.pi)
    return math.exp(logc - (df + 1) / 2 * math.log1p(u * u / df))


def quad_cdf(x, df):
    # integrate the density from 0, then use symmetry
    half, _ = integrate.quad(t_density, 0.0, abs(x), args=(df,), epsabs=1e-12, epsrel=1e-12, limit=200)
    return 0.5 + math.copysign(half, x)


def test_cdf_at_zero_is_half():
    for df in (0.5, 1, 3.7, 30, 1e4, math.inf):
        assert t_cdf(0.0, df) == 0.5


def test_cdf_normal_limit():
    phi = 0.5 * math.erfc(-1.0 / math.sqrt(2))
    assert abs(phi - 0.841345) < 1e-6
    assert abs(t_cdf(1.0, 1e6) - phi) < 1e-4


def test_cdf_quantile_example():
    assert abs(t_cdf(2.262, 9) - 0.975) < 5e-4
    assert abs(t_cdf(2.262, 9) - quad_cdf(2.262, 9)) < 1e-9


def test_cdf_against_integration_grid():
    xs = np.linspace(-8, 8, 20)
    dfs = [1, 2.5, 7, 29.3, 200, 5000, 1.2, 4, 12.75, 60]
    worst = 0.0
    for x in xs:
        for df in dfs:
            worst = max(worst, abs(t_cdf(x, df) - quad_cdf(x, df)))
    assert worst < 5e-4
    assert worst < 1e-8  # in practice far tighter


def test_cdf_matches_scipy_on_wide_range():
    rng = np.random.default_rng(0)
    xs = rng.uniform(-50, 50, 400)
    dfs = np.exp(rng.uniform(0, math.log(1e4), 400))
    err = max(abs(t_cdf(x, d) - sps.t.cdf(x, d)) for x, d in zip(xs, dfs))
    assert err < 1e-10


@given(st.floats(-60, 60), st.floats(0.2, 1e5))
def test_cdf_reflection(x, df):
    assert abs(t_cdf(x, df) + t_cdf(-x, df) - 1.0) < 1e-12


@given(st.floats(0.3, 500))
def test_cdf_monotone(df):
    grid = np.linspace(-20, 20, 161)
    vals = np.array([t_cdf(x, df) for x in grid])
    assert np.all(np.diff(vals) >= -1e-15)
    assert vals.min() >= 0 and vals.max() <= 1


def test_cdf_rejects_bad_df():
    for df in (0, -1, math.nan):
        with pytest.raises(ParameterError):
            t_cdf(1.0, df)


def test_betainc_against_scipy():
    rng = np.random.default_rng(1)
    for _ in range(300):
        a, b = rng.uniform(0.05, 300, 2)
        x = rng.uniform()
        assert abs(betainc(a, b, x) - special.betainc(a, b, x)) < 1e-11


def test_betainc_endpoints():
    assert betainc(2.0, 3.0, 0.0) == 0.0
    assert betainc(2.0, 3.0, 1.0) == 1.0


def test_paired_t_symmetric():
    out = paired_t([-1.0, 0.0, 1.0])
    assert out.statistic == 0.0 and out.pvalue == 1.0 and out.df == 2


def test_paired_t_hand_value():
    out = paired_t([1.0, 2.0, 3.0])
    assert out.statistic == pytest.approx(2 * math.sqrt(3), abs=1e-12)
    assert out.df == 2
    assert out.pvalue == pytest.approx(sps.ttest_1samp([1, 2, 3], 0).pvalue, abs=1e-12)


def test_paired_t_constant_raises():
    with pytest.raises(DegenerateVarianceError):
        paired_t([5.0, 5.0, 5.0])


def test_paired_t_too_short():
    with pytest.raises(ParameterError):
        paired_t([1.0])


@given(st.lists(st.floats(-100, 100), min_size=3, max_size=30), st.floats(-50, 50))
def test_paired_t_location_contrast_invariance(x1, c):
    x1 = np.array(x1)
    x2 = np.roll(x1, 1) * 0.5 + 0.25
    d = x1 - x2
    if np.ptp(d) < 1e-6:
        return
    base = paired_t(d)
    shifted = paired_t((x1 + c) - (x2 + c))
    assert shifted.statistic == pytest.approx(base.statistic, rel=1e-9, abs=1e-9)


@given(st.lists(st.floats(-100, 100), min_size=3, max_size=30), st.floats(0.01, 100))
def test_paired_t_scale_invariance(d, c):
    d = np.array(d)
    if np.ptp(d) < 1e-6:
        return
    a, b = paired_t(d), paired_t(c * d)
    assert b.statistic == pytest.approx(a.statistic, rel=1e-9, abs=1e-12)
    assert b.pvalue == pytest.approx(a.pvalue, rel=1e-9, abs=1e-12)


def test_welch_hand_value():
    assert welch([0.0, 2.0], [1.0, 3.0]) == pytest.approx(-1 / math.sqrt(2), abs=1e-15)


def test_welch_identical_groups():
    g = [0.3, 1.7, -2.0]
    assert welch(g, g) == 0.0


def test_welch_monotone_in_shift():
    g1 = np.array([0.1, 0.9, 1.4, 2.2])
    g2 = np.array([1.0, -0.5, 0.7])
    vals = [welch(g1 + c, g2) for c in np.linspace(-5, 5, 41)]
    assert np.all(np.diff(vals) > 0)


def test_welch_matches_scipy():
    rng = np.random.default_rng(3)
    g1, g2 = rng.normal(size=7), rng.normal(1, 2, size=5)
    assert welch(g1, g2) == pytest.approx(sps.ttest_ind(g1, g2, equal_var=False).statistic, rel=1e-12)


def test_welch_degenerate():
    with pytest.raises(DegenerateVarianceError):
        welch([1.0, 1.0], [2.0, 2.0])
    assert math.isfinite(welch([1.0, 1.0], [2.0, 3.0]))
    with pytest.raises(ParameterError):
        welch([1.0], [2.0, 3.0])


def test_one_sided():
    assert one_sided_from_two(0.10, 1, "greater") == pytest.approx(0.05)
    assert one_sided_from_two(0.10, -1, "greater") == pytest.approx(0.95)
    assert one_sided_from_two(0.10, -1, "less") == pytest.approx(0.05)
    assert one_sided_from_two(0.10, 1, "greater", literal=True) == pytest.approx(0.95)
    assert one_sided_from_two(0.10, 0, "greater") == 0.5


def test_one_sided_by_enumeration():
    # 4-pair sign-flip oracle: the one-sided p equals half the two-sided p
    # when the statistic points in the alternative's direction.
    import itertools

    d = np.array([0.8, 1.9, 0.4, 1.1])
    t_obs = paired_t(d).statistic
    stats_ = [paired_t(d * np.array(s)).statistic for s in itertools.product((1, -1), repeat=4)]
    two = np.mean(np.abs(stats_) >= abs(t_obs) - 1e-12)
    one = np.mean(np.array(stats_) >= t_obs - 1e-12)
    assert one_sided_from_two(two, np.sign(t_obs), "greater") == pytest.approx(one)


def test_sf_two_sided_matches_scipy():
    assert t_sf_two_sided(2.0, 7.5) == pytest.approx(2 * sps.t.sf(2.0, 7.5), rel=1e-10)


def test_outcome_fields():
    o = TestOutcome(1.0, "permutation", 0.5, "tml")
    assert o.df == "permutation"
