import math

import numpy as np
import numpy.testing as npt
import pytest
from conftest import load_fixture
from hypothesis import given, settings
from hypothesis import strategies as st

from hdct import nulldist
from hdct.clr import clr_transform
from hdct.core import close
from hdct.datagen import ar1_covariance
from hdct.errors import (
    DomainError,
    NegativeVarianceEstimate,
    NonCenteredMu0,
    NonPositiveDiagonal,
    NonSymmetric,
)
from hdct.estimators import MomentSummary
from hdct.meantests import (
    Family,
    TestOutcome,
    combine,
    combo_test_one,
    combo_test_two,
    max_test_one,
    max_test_two,
    mu0_to_clr,
    one_sample_tests,
    sum_statistic,
    sum_test_one,
    sum_test_two,
    theoretical_power_sum,
    two_sample_tests,
)


@pytest.fixture
def f1():
    return clr_transform(load_fixture("F1.csv"))


@pytest.fixture
def f2():
    return clr_transform(load_fixture("F2a.csv")), clr_transform(load_fixture("F2b.csv"))


def random_clr(rng, n, p, shift=0.0):
    w = np.exp(rng.normal(size=(n, p)) + shift)
    return clr_transform(close(w))


def _outcome(family, pvalue):
    return TestOutcome(0.0, pvalue, 0.0, 0.05, False, family, 10, 3)


def test_f1_one_sample_against_oracle(f1, golden):
    g = golden["F1"]
    res = one_sample_tests(f1, 0.05)
    assert res["sum"].statistic == pytest.approx(g["sum"]["statistic"], rel=1e-12)
    assert res["max"].statistic == pytest.approx(g["max"]["statistic"], rel=1e-12)
    assert res["max"].components["raw"] == pytest.approx(g["max"]["raw"], rel=1e-12)
    assert res["com"].statistic == pytest.approx(g["com"]["statistic"], rel=1e-12)
    for name in ("sum", "max", "com"):
        assert res[name].pvalue == pytest.approx(g[name]["pvalue"], rel=1e-12)


def test_f2_two_sample_against_oracle(f2, golden):
    g = golden["F2"]
    res = two_sample_tests(*f2, 0.05)
    for name in ("sum", "max", "com"):
        assert res[name].statistic == pytest.approx(g[name]["statistic"], rel=1e-12)
        assert res[name].pvalue == pytest.approx(g[name]["pvalue"], rel=1e-12)


def test_individual_wrappers_agree(f1, f2):
    zero = np.zeros(3)
    res = one_sample_tests(f1, 0.05)
    assert sum_test_one(f1, zero, 0.05) == res["sum"]
    assert max_test_one(f1, zero, 0.05) == res["max"]
    assert combo_test_one(f1, zero, 0.05) == res["com"]
    res2 = two_sample_tests(*f2, 0.05)
    assert sum_test_two(*f2, 0.05) == res2["sum"]
    assert max_test_two(*f2, 0.05) == res2["max"]
    assert combo_test_two(*f2, 0.05) == res2["com"]
    assert res["sum"].family is Family.SumOne
    assert res2["com"].family is Family.ComboTwo


def test_f1_row_rescaling_leaves_statistics_unchanged(f1):
    x = load_fixture("F1.csv")
    rescaled = close(x * np.array([2, 3, 1, 5, 7])[:, None])
    a = one_sample_tests(f1, 0.05)
    b = one_sample_tests(clr_transform(rescaled), 0.05)
    for name in ("sum", "max", "com"):
        assert b[name].statistic == pytest.approx(a[name].statistic, rel=1e-10)


def test_column_permutation_leaves_max_unchanged(f1):
    perm = [2, 0, 1]
    a = max_test_one(f1, None, 0.05)
    b = max_test_one(f1.values[:, perm], None, 0.05)
    # reduction order may move the last bit
    assert b.statistic == pytest.approx(a.statistic, rel=1e-14)


def test_combo_takes_minimum():
    c = combine(_outcome(Family.SumOne, 0.3), _outcome(Family.MaxOne, 0.2), 0.05)
    assert c.statistic == 0.2
    assert c.pvalue == pytest.approx(1 - 0.8**2)
    assert c.family is Family.ComboOne
    assert c.components == {"p_sum": 0.3, "p_max": 0.2}


def test_combo_threshold_boundary():
    t = nulldist.combo_threshold(0.05)
    eps = 1e-9
    below = combine(_outcome(Family.SumOne, t - eps), _outcome(Family.MaxOne, 0.9), 0.05)
    above = combine(_outcome(Family.SumOne, t + eps), _outcome(Family.MaxOne, 0.9), 0.05)
    assert below.reject and not above.reject
    assert below.threshold == pytest.approx(0.025321, abs=1e-6)


def test_combo_two_sample_rejects_on_small_sum_pvalue():
    c = combine(_outcome(Family.SumTwo, 0.01), _outcome(Family.MaxTwo, 0.5), 0.05)
    assert c.statistic == 0.01
    assert c.reject
    assert c.family is Family.ComboTwo


def test_identical_groups(rng):
    y = random_clr(rng, 12, 20)
    res = two_sample_tests(y, y, 0.05)
    assert res["sum"].statistic < 0
    for alpha in (0.01, 0.05, 0.25, 0.5):
        assert not sum_test_two(y, y, alpha).reject
    assert res["max"].components["raw"] == 0.0
    assert res["max"].statistic == pytest.approx(-2 * math.log(20) + math.log(math.log(20)))
    assert res["max"].pvalue > 0.99
    assert res["sum"].pvalue > 0.5
    assert not res["com"].reject


def test_nonzero_mu0_equals_shifting_the_data(rng):
    y = random_clr(rng, 15, 6)
    mu0 = mu0_to_clr(rng.normal(size=6))
    a = one_sample_tests(y, 0.05, mu0)
    b = one_sample_tests(y.values - mu0, 0.05)
    for name in ("sum", "max"):
        assert a[name].statistic == pytest.approx(b[name].statistic, rel=1e-9, abs=1e-12)


def test_mu0_must_be_centered(f1):
    with pytest.raises(NonCenteredMu0):
        sum_test_one(f1, np.array([1.0, 0.0, 0.0]), 0.05)
    with pytest.raises(NonCenteredMu0):
        sum_test_one(f1, np.zeros(4), 0.05)


def test_negative_variance_guard():
    mom = MomentSummary(np.zeros(10), np.ones(10), 20.0, 6, 1.0, (6,))
    with pytest.raises(NegativeVarianceEstimate):
        sum_statistic(mom, mom.mean, 6)


@pytest.mark.parametrize("alpha", [0.0, 1.0, -1.0])
def test_alpha_domain(f1, alpha):
    with pytest.raises(DomainError):
        one_sample_tests(f1, alpha)


def test_repeated_calls_are_bit_identical(f1, f2):
    assert one_sample_tests(f1, 0.05) == one_sample_tests(f1, 0.05)
    assert two_sample_tests(*f2, 0.05) == two_sample_tests(*f2, 0.05)


@settings(max_examples=40, deadline=None)
@given(
    seed=st.integers(0, 2**32 - 1),
    n=st.integers(5, 30),
    p=st.integers(3, 40),
    alpha=st.floats(0.001, 0.5),
    shift=st.floats(0, 2),
)
def test_outcome_invariants(seed, n, p, alpha, shift):
    rng = np.random.default_rng(seed)
    y = random_clr(rng, n, p, shift=shift * (np.arange(p) % 2))
    for o in one_sample_tests(y, alpha).values():
        assert 0.0 <= o.pvalue <= 1.0
        if o.family.is_combo:
            assert o.reject == (o.statistic < o.threshold)
            assert o.reject == (o.pvalue < alpha) or abs(o.statistic - o.threshold) < 1e-12
        else:
            assert o.reject == (o.statistic >= o.threshold)


def test_theoretical_power_null_shift():
    sigma = ar1_covariance(30)
    for c in (0.0, 1.7, -4.0):
        assert theoretical_power_sum(sigma, np.full(30, c), 100, 0.05) == pytest.approx(0.05, abs=1e-12)


def test_theoretical_power_monotone_in_n():
    sigma = ar1_covariance(40)
    mu = np.zeros(40)
    mu[:4] = 0.1
    powers = [theoretical_power_sum(sigma, mu, n, 0.05) for n in np.linspace(1, 400, 60)]
    assert all(b >= a for a, b in zip(powers, powers[1:]))
    assert powers[0] > 0.05


def test_theoretical_power_hand_computation():
    # independent evaluation with an explicit centering matrix
    p = 8
    rng = np.random.default_rng(3)
    a = rng.normal(size=(p, p))
    sigma = a @ a.T + np.eye(p)
    mu = rng.normal(size=p) * 0.1
    g = np.eye(p) - np.ones((p, p)) / p
    gamma = g @ sigma @ g
    d = np.diag(gamma)
    t = gamma / np.sqrt(np.outer(d, d))
    gm = g @ mu
    drift = 50 * gm @ (gm / d) / math.sqrt(2 * np.trace(t @ t))
    expected = nulldist.std_normal_cdf(drift - nulldist.std_normal_quantile(0.95))
    assert theoretical_power_sum(sigma, mu, 50, 0.05) == pytest.approx(expected, rel=1e-12)


def test_theoretical_power_errors():
    with pytest.raises(NonSymmetric):
        theoretical_power_sum(np.array([[1.0, 0.5], [0.0, 1.0]]), np.zeros(2), 10, 0.05)
    with pytest.raises(NonPositiveDiagonal):
        # constant covariance is annihilated by centering
        theoretical_power_sum(np.ones((3, 3)), np.zeros(3), 10, 0.05)
    with pytest.raises(DomainError):
        theoretical_power_sum(np.eye(3), np.zeros(3), 0, 0.05)
