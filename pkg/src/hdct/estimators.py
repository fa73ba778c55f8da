"""Sample moments feeding the test statistics.

Only the diagonal of the sample covariance and the squared Frobenius norm of
the sample correlation matrix are needed, so the p x p covariance is never
kept. Divisors default to n (one sample) and n1 + n2 (pooled); pass
``unbiased=True`` for n - 1 and n1 + n2 - 2.
"""

from dataclasses import dataclass

import numpy as np

from .core import ClrMatrix
from .errors import DegenerateVariance, DimensionMismatch, TooFewSamples

DEGENERATE_VAR = 1e-14
MIN_SAMPLES = 5


@dataclass(frozen=True)
class MomentSummary:
    """Everything the sum and max statistics need from the data.

    Attributes
    ----------
    mean : ndarray
        Column means (one sample) or difference of group means (two sample).
    var_diag : ndarray
        Diagonal of the (pooled) sample covariance.
    corr_trace_sq : float
        ``tr(R^2)`` for the sample correlation matrix ``R``.
    n_effective : int
        ``n`` or ``n1 + n2``.
    cpn : float
        Two-sample correction ``1 + tr(R^2) / p**1.5``; 1 for one sample.
    sizes : tuple
        ``(n,)`` or ``(n1, n2)``.
    """

    mean: np.ndarray
    var_diag: np.ndarray
    corr_trace_sq: float
    n_effective: int
    cpn: float = 1.0
    sizes: tuple = ()

    @property
    def p(self):
        return self.mean.shape[0]


def _values(y):
    if isinstance(y, ClrMatrix):
        return y.values
    return ClrMatrix(y).values


def _check_variance(var_diag):
    bad = var_diag <= DEGENERATE_VAR
    if np.any(bad):
        j = int(np.argmax(bad))
        raise DegenerateVariance(j, var_diag[j])


def corr_trace_sq_naive(y_centered, var_diag, divisor):
    """``sum_ij gamma_ij^2 / (gamma_ii gamma_jj)`` through the p x p covariance."""
    z = np.asarray(y_centered) / np.sqrt(var_diag)
    c = (z.T @ z) / divisor
    return float(np.sum(c * c))


def corr_trace_sq_gram(y_centered, var_diag, divisor):
    """Same quantity as :func:`corr_trace_sq_naive` via the n x n Gram matrix.

    ``tr(R^2) = ||Z'Z||_F^2 / d^2 = ||ZZ'||_F^2 / d^2`` with ``Z`` the deviation
    rows scaled by ``D^{-1/2}``; cheaper whenever n < p.
    """
    z = np.atleast_2d(np.asarray(y_centered)) / np.sqrt(var_diag)
    k = z @ z.T
    return float(np.sum(k * k)) / float(divisor) ** 2


def cpn_factor(corr_trace_sq, p):
    """Two-sample denominator correction ``1 + tr(R^2) / p^{3/2}``."""
    return 1.0 + corr_trace_sq / p**1.5


def _corr_trace_sq(dev, var_diag, divisor, method):
    if method == "auto":
        method = "gram" if dev.shape[0] < dev.shape[1] else "naive"
    if method == "gram":
        return corr_trace_sq_gram(dev, var_diag, divisor)
    if method == "naive":
        return corr_trace_sq_naive(dev, var_diag, divisor)
    raise ValueError(f"unknown trace method {method!r}")


def one_sample_moments(y, unbiased=False, trace_method="auto"):
    """Column means, variances and ``tr(R^2)`` of one clr sample."""
    y = _values(y)
    n, p = y.shape
    if n < MIN_SAMPLES:
        raise TooFewSamples(f"one-sample statistics need n >= {MIN_SAMPLES}, got {n}")
    mean = y.mean(axis=0)
    dev = y - mean
    divisor = n - 1 if unbiased else n
    var_diag = np.einsum("ij,ij->j", dev, dev) / divisor
    _check_variance(var_diag)
    tr = _corr_trace_sq(dev, var_diag, divisor, trace_method)
    return MomentSummary(mean, var_diag, tr, n, 1.0, (n,))


def two_sample_moments(y1, y2, unbiased=False, trace_method="auto"):
    """Mean difference and pooled moments of two clr samples."""
    y1 = _values(y1)
    y2 = _values(y2)
    if y1.shape[1] != y2.shape[1]:
        raise DimensionMismatch(
            f"samples have {y1.shape[1]} and {y2.shape[1]} components"
        )
    n1, n2 = y1.shape[0], y2.shape[0]
    big_n = n1 + n2
    if n1 < 2 or n2 < 2 or big_n < MIN_SAMPLES:
        raise TooFewSamples(
            f"two-sample statistics need n1, n2 >= 2 and n1 + n2 >= {MIN_SAMPLES}, "
            f"got {n1} and {n2}"
        )
    m1 = y1.mean(axis=0)
    m2 = y2.mean(axis=0)
    dev = np.vstack([y1 - m1, y2 - m2])
    divisor = big_n - 2 if unbiased else big_n
    var_diag = np.einsum("ij,ij->j", dev, dev) / divisor
    _check_variance(var_diag)
    p = y1.shape[1]
    tr = _corr_trace_sq(dev, var_diag, divisor, trace_method)
    cpn = cpn_factor(tr, p)
    return MomentSummary(m1 - m2, var_diag, tr, big_n, cpn, (n1, n2))
