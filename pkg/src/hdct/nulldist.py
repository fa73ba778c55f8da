"""Null distributions: standard normal, the max-statistic Gumbel law, and the
law of the minimum of two independent uniform p-values."""

import math
from statistics import NormalDist

from .errors import DomainError

_SQRT_PI = math.sqrt(math.pi)
_STD_NORMAL = NormalDist()


def _check_prob(q, name):
    if not (0.0 < q < 1.0):
        raise DomainError(f"{name} must lie in (0, 1), got {q!r}")


def std_normal_cdf(x):
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def std_normal_sf(x):
    """Upper tail ``1 - Phi(x)`` without cancellation for large ``x``."""
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def std_normal_quantile(q):
    """Inverse of :func:`std_normal_cdf` on (0, 1).

    Starts from Wichura's AS241 approximation and takes one Newton step
    against the erfc-based cdf so the two functions agree to round-off.
    """
    _check_prob(q, "q")
    x = _STD_NORMAL.inv_cdf(q)
    pdf = math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
    if pdf > 0.0:
        x -= (std_normal_cdf(x) - q) / pdf
    return x


def gumbel_cdf(x):
    """``exp(-exp(-x/2) / sqrt(pi))``, the limit law of the centered max."""
    e = -x / 2.0
    if e > 709.0:
        return 0.0
    return math.exp(-math.exp(e) / _SQRT_PI)


def gumbel_quantile(alpha):
    """Upper ``alpha`` point: ``-log(pi) - 2 log log(1/(1 - alpha))``."""
    _check_prob(alpha, "alpha")
    return -math.log(math.pi) - 2.0 * math.log(-math.log1p(-alpha))


def gumbel_pvalue(x):
    """``1 - gumbel_cdf(x)`` evaluated through ``expm1``."""
    e = -x / 2.0
    if e > 709.0:
        return 1.0
    return -math.expm1(-math.exp(e) / _SQRT_PI)


def max_centering(p):
    """Shift ``2 log p - log log p`` subtracted from the raw max statistic."""
    return 2.0 * math.log(p) - math.log(math.log(p))


def combo_threshold(alpha):
    """Rejection boundary ``1 - sqrt(1 - alpha)`` for the min-p statistic."""
    _check_prob(alpha, "alpha")
    return 1.0 - math.sqrt(1.0 - alpha)


def combo_cdf(w):
    """Null cdf of the minimum of two independent uniforms, ``1 - (1 - w)^2``."""
    if w <= 0.0:
        return 0.0
    if w >= 1.0:
        return 1.0
    return w * (2.0 - w)
