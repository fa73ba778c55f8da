"""Domain types for compositional data, log bases and clr coordinates."""

from dataclasses import dataclass

import numpy as np

from .errors import (
    NonFiniteEntry,
    NonPositiveEntry,
    RowSumNonZero,
    RowSumViolation,
    ShapeError,
)

ROW_SUM_TOL = 1e-9
CLR_ROW_SUM_TOL = 1e-8


def _as_matrix(raw, min_p=2):
    arr = np.array(raw, dtype=float)
    if arr.ndim == 1:
        arr = arr[np.newaxis, :]
    if arr.ndim != 2:
        raise ShapeError(f"expected a 2-d array, got {arr.ndim} dimensions")
    n, p = arr.shape
    if n < 1 or p < min_p:
        raise ShapeError(f"need n >= 1 and p >= {min_p}, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


def _first_bad(mask):
    r, c = np.argwhere(mask)[0]
    return int(r), int(c)


@dataclass(frozen=True)
class _Matrix:
    values: np.ndarray

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def p(self):
        return self.values.shape[1]

    @property
    def shape(self):
        return self.values.shape

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.values
        return self.values.astype(dtype)


@dataclass(frozen=True)
class CompositionMatrix(_Matrix):
    """Rows are strictly positive points on the unit simplex.

    ``pseudocount`` is set when zeros were replaced before closure, which is
    a departure from the strict-positivity model and is echoed in reports.
    """

    pseudocount: float = 0.0

    def __post_init__(self):
        arr = _as_matrix(self.values)
        if not np.all(np.isfinite(arr)):
            raise NonFiniteEntry(*_first_bad(~np.isfinite(arr)))
        if np.any(arr <= 0):
            r, c = _first_bad(arr <= 0)
            raise NonPositiveEntry(r, c, arr[r, c])
        sums = arr.sum(axis=1)
        bad = np.abs(sums - 1.0) > ROW_SUM_TOL
        if np.any(bad):
            r = int(np.argmax(bad))
            raise RowSumViolation(r, sums[r])
        object.__setattr__(self, "values", arr)


@dataclass(frozen=True)
class LogBasisMatrix(_Matrix):
    """Logarithms of latent positive abundances, one observation per row."""

    def __post_init__(self):
        arr = _as_matrix(self.values)
        if not np.all(np.isfinite(arr)):
            raise NonFiniteEntry(*_first_bad(~np.isfinite(arr)))
        object.__setattr__(self, "values", arr)


@dataclass(frozen=True)
class ClrMatrix(_Matrix):
    """Centered log-ratio coordinates; every row sums to zero."""

    def __post_init__(self):
        arr = _as_matrix(self.values)
        if not np.all(np.isfinite(arr)):
            raise NonFiniteEntry(*_first_bad(~np.isfinite(arr)))
        sums = arr.sum(axis=1)
        tol = CLR_ROW_SUM_TOL * arr.shape[1]
        bad = np.abs(sums) > tol
        if np.any(bad):
            r = int(np.argmax(bad))
            raise RowSumNonZero(r, sums[r])
        object.__setattr__(self, "values", arr)


def validate_composition(raw):
    """Wrap ``raw`` as a :class:`CompositionMatrix` or raise.

    Raises
    ------
    NonPositiveEntry
        Some entry is zero or negative (first offender reported).
    RowSumViolation
        Some row does not sum to one within ``1e-9``.
    """
    return CompositionMatrix(raw)


def close(raw):
    """Divide every row of a strictly positive array by its sum."""
    arr = _as_matrix(raw)
    if np.any(arr <= 0):
        r, c = _first_bad(arr <= 0)
        raise NonPositiveEntry(r, c, arr[r, c])
    return CompositionMatrix(arr / arr.sum(axis=1, keepdims=True))


def replace_zeros(raw, pseudocount):
    """Replace exact zeros by ``pseudocount`` and close the rows.

    This is an opt-in escape hatch for count tables with structural zeros;
    the returned matrix records the pseudocount used.
    """
    if not pseudocount > 0:
        raise ValueError("pseudocount must be positive")
    arr = np.array(_as_matrix(raw))
    arr[arr == 0] = pseudocount
    closed = close(arr)
    return CompositionMatrix(closed.values, pseudocount=float(pseudocount))
