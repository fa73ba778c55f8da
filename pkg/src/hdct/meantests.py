"""One- and two-sample mean tests on clr data: sum-type, max-type and the
combined min-p test.

Every public test takes clr matrices and an explicit ``alpha``. The max
statistic is stored already centered by ``2 log p - log log p`` so that it is
compared directly against the Gumbel quantile.
"""

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import nulldist
from .clr import center_rows
from .errors import (
    DomainError,
    NegativeVarianceEstimate,
    NonCenteredMu0,
    NonPositiveDiagonal,
    NonSymmetric,
)
from .estimators import one_sample_moments, two_sample_moments


class Family(enum.Enum):
    SumOne = "sum"
    MaxOne = "max"
    ComboOne = "com"
    SumTwo = "sum2"
    MaxTwo = "max2"
    ComboTwo = "com2"

    @property
    def is_combo(self):
        return self in (Family.ComboOne, Family.ComboTwo)


@dataclass(frozen=True)
class TestOutcome:
    """Result of a single test.

    For the combo families ``statistic`` is the smaller of the two
    sub-test p-values and rejection happens *below* ``threshold``; for the
    others rejection happens at or above it.
    """

    __test__ = False

    statistic: float
    pvalue: float
    threshold: float
    alpha: float
    reject: bool
    family: Family
    n_effective: int
    p: int
    components: dict = field(default_factory=dict, compare=False)


def _check_alpha(alpha):
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")


def _centered_mean(moments, mu0_clr):
    if mu0_clr is None:
        return moments.mean
    mu0 = np.asarray(mu0_clr, dtype=float)
    if mu0.shape != moments.mean.shape:
        raise NonCenteredMu0(f"mu0 has shape {mu0.shape}, expected {moments.mean.shape}")
    if abs(mu0.sum()) > 1e-8:
        raise NonCenteredMu0(f"mu0 must sum to zero, sums to {mu0.sum()!r}")
    return moments.mean - mu0


def mu0_to_clr(mu0):
    """Project a log-basis mean onto clr space (apply the centering matrix)."""
    return center_rows(np.asarray(mu0, dtype=float))


# statistics from precomputed moments; shared with the simulation engine


def sum_statistic(moments, diff, scale):
    """Standardized sum-type statistic.

    ``scale`` is ``n`` for one sample and ``n1 n2 / N`` for two samples; the
    centering and variance corrections follow from ``moments.sizes``.
    """
    p = moments.p
    big_n = moments.n_effective
    quad = scale * float(np.sum(diff * diff / moments.var_diag))
    if len(moments.sizes) == 1:
        centre = (big_n - 1) * p / (big_n - 3)
        bracket = moments.corr_trace_sq - p * p / (big_n - 1)
        cpn = 1.0
    else:
        centre = (big_n - 2) * p / (big_n - 4)
        bracket = moments.corr_trace_sq - p * p / (big_n - 2)
        cpn = moments.cpn
    if not bracket > 0.0:
        raise NegativeVarianceEstimate(
            f"variance estimate tr(R^2) - p^2/(N-k) = {bracket!r} is not positive "
            f"(n={big_n}, p={p})"
        )
    return (quad - centre) / math.sqrt(2.0 * bracket * cpn)


def max_statistic(moments, diff, scale):
    """Raw max-type statistic ``scale * max_i diff_i^2 / var_i`` (uncentered)."""
    return scale * float(np.max(diff * diff / moments.var_diag))


def _sum_outcome(stat, alpha, family, moments):
    threshold = nulldist.std_normal_quantile(1.0 - alpha)
    return TestOutcome(
        stat,
        nulldist.std_normal_sf(stat),
        threshold,
        alpha,
        bool(stat >= threshold),
        family,
        moments.n_effective,
        moments.p,
    )


def _max_outcome(raw, alpha, family, moments):
    stat = raw - nulldist.max_centering(moments.p)
    threshold = nulldist.gumbel_quantile(alpha)
    return TestOutcome(
        stat,
        nulldist.gumbel_pvalue(stat),
        threshold,
        alpha,
        bool(stat >= threshold),
        family,
        moments.n_effective,
        moments.p,
        {"raw": raw},
    )


def combine(sum_outcome, max_outcome, alpha, family=None):
    """Min-p combination of a sum and a max outcome."""
    _check_alpha(alpha)
    if family is None:
        two = sum_outcome.family is Family.SumTwo
        family = Family.ComboTwo if two else Family.ComboOne
    stat = min(sum_outcome.pvalue, max_outcome.pvalue)
    threshold = nulldist.combo_threshold(alpha)
    return TestOutcome(
        stat,
        nulldist.combo_cdf(stat),
        threshold,
        alpha,
        bool(stat < threshold),
        family,
        sum_outcome.n_effective,
        sum_outcome.p,
        {"p_sum": sum_outcome.pvalue, "p_max": max_outcome.pvalue},
    )


def one_sample_from_moments(moments, alpha, mu0_clr=None):
    """All three one-sample outcomes, keyed ``sum``, ``max``, ``com``."""
    _check_alpha(alpha)
    diff = _centered_mean(moments, mu0_clr)
    n = moments.n_effective
    s = _sum_outcome(sum_statistic(moments, diff, n), alpha, Family.SumOne, moments)
    m = _max_outcome(max_statistic(moments, diff, n), alpha, Family.MaxOne, moments)
    return {"sum": s, "max": m, "com": combine(s, m, alpha, Family.ComboOne)}


def two_sample_from_moments(moments, alpha):
    """All three two-sample outcomes, keyed ``sum``, ``max``, ``com``."""
    _check_alpha(alpha)
    n1, n2 = moments.sizes
    scale = n1 * n2 / (n1 + n2)
    diff = moments.mean
    s = _sum_outcome(sum_statistic(moments, diff, scale), alpha, Family.SumTwo, moments)
    m = _max_outcome(max_statistic(moments, diff, scale), alpha, Family.MaxTwo, moments)
    return {"sum": s, "max": m, "com": combine(s, m, alpha, Family.ComboTwo)}


def one_sample_tests(y, alpha, mu0_clr=None, unbiased=False):
    return one_sample_from_moments(one_sample_moments(y, unbiased), alpha, mu0_clr)


def two_sample_tests(y1, y2, alpha, unbiased=False):
    return two_sample_from_moments(two_sample_moments(y1, y2, unbiased), alpha)


def sum_test_one(y, mu0_clr, alpha, unbiased=False):
    """Sum-type one-sample test; standard normal under the null."""
    return one_sample_tests(y, alpha, mu0_clr, unbiased)["sum"]


def max_test_one(y, mu0_clr, alpha, unbiased=False):
    """Max-type one-sample test; centered statistic is Gumbel under the null."""
    return one_sample_tests(y, alpha, mu0_clr, unbiased)["max"]


def combo_test_one(y, mu0_clr, alpha, unbiased=False):
    return one_sample_tests(y, alpha, mu0_clr, unbiased)["com"]


def sum_test_two(y1, y2, alpha, unbiased=False):
    return two_sample_tests(y1, y2, alpha, unbiased)["sum"]


def max_test_two(y1, y2, alpha, unbiased=False):
    return two_sample_tests(y1, y2, alpha, unbiased)["max"]


def combo_test_two(y1, y2, alpha, unbiased=False):
    return two_sample_tests(y1, y2, alpha, unbiased)["com"]


def theoretical_power_sum(sigma, mu_w_diff, n_eff, alpha):
    """Asymptotic power of the sum-type test at a fixed log-basis mean shift.

    ``Phi(-z_{1-alpha} + n_eff * m' D^{-1} m / sqrt(2 tr(T^2)))`` where
    ``m = G mu``, ``Gamma = G Sigma G``, ``D = diag(Gamma)`` and ``T`` is the
    correlation matrix of ``Gamma``. Use ``n_eff = n1 n2 / (n1 + n2)`` for two
    samples.
    """
    _check_alpha(alpha)
    sigma = np.asarray(sigma, dtype=float)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
        raise NonSymmetric(f"sigma must be square, got shape {sigma.shape}")
    scale = max(1.0, float(np.max(np.abs(sigma))))
    if not np.allclose(sigma, sigma.T, rtol=0.0, atol=1e-10 * scale):
        raise NonSymmetric("sigma is not symmetric")
    if not n_eff > 0:
        raise DomainError(f"n_eff must be positive, got {n_eff!r}")
    gamma = center_rows(center_rows(sigma).T)
    d = np.diag(gamma).copy()
    if np.any(d <= 0):
        raise NonPositiveDiagonal("centered covariance has a non-positive diagonal")
    m = mu0_to_clr(mu_w_diff)
    t = gamma / np.sqrt(np.outer(d, d))
    drift = n_eff * float(np.sum(m * m / d)) / math.sqrt(2.0 * float(np.sum(t * t)))
    return nulldist.std_normal_cdf(-nulldist.std_normal_quantile(1.0 - alpha) + drift)
