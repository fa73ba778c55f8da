"""Centered log-ratio transform.

The centering matrix ``G = I - 11'/p`` is never formed; applying it to a row
is the same as subtracting that row's mean.
"""

import numpy as np

from .core import ClrMatrix, CompositionMatrix, LogBasisMatrix


def center_rows(m):
    """Subtract each row's arithmetic mean from the row."""
    m = np.asarray(m, dtype=float)
    return m - m.mean(axis=-1, keepdims=True)


def clr_transform(x):
    """Centered log-ratio coordinates of a composition matrix."""
    if not isinstance(x, CompositionMatrix):
        x = CompositionMatrix(x)
    return ClrMatrix(center_rows(np.log(x.values)))


def clr_from_log_basis(w):
    """Clr coordinates straight from log-basis rows.

    Identical to ``clr_transform(close(exp(w)))`` because the closure only
    adds a per-row constant on the log scale, which centering removes.
    """
    if not isinstance(w, LogBasisMatrix):
        w = LogBasisMatrix(w)
    return ClrMatrix(center_rows(w.values))
