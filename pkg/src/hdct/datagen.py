"""Data-generating processes for the simulation study.

Log bases follow ``log W_i = mu + Sigma^{1/2} U_i`` with i.i.d. innovations
from one of three laws (A1 normal, A2 scaled t(3), A3 normal scale mixture)
and one of three covariance families (B1 AR(1)-type, B2 spiked correlation,
B3 factor plus spatial rook structure).
"""

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .core import CompositionMatrix, LogBasisMatrix
from .errors import DomainError, NonSymmetric, NotPSD, ShapeError, SingularSystem


class Dist(enum.Enum):
    A1 = "A1"
    A2 = "A2"
    A3 = "A3"


class Cov(enum.Enum):
    B1 = "B1"
    B2 = "B2"
    B3 = "B3"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class DistributionSpec:
    kind: Dist = Dist.A1

    def __post_init__(self):
        object.__setattr__(self, "kind", Dist(self.kind))


@dataclass(frozen=True)
class CovarianceSpec:
    """Recipe for a p x p covariance.

    ``build_seed`` drives the random parameters of B2 and B3. ``rho`` and
    ``delta`` are the B3 spatial coefficient and factor-loading exponent.
    """

    kind: Cov
    p: int
    build_seed: int | None = None
    matrix: np.ndarray | None = field(default=None, compare=False)
    rho: float = 0.5
    delta: float = 0.3

    def __post_init__(self):
        object.__setattr__(self, "kind", Cov(self.kind))
        if self.p < 2:
            raise DomainError(f"p must be at least 2, got {self.p}")
        if self.kind is Cov.EXPLICIT:
            m = np.asarray(self.matrix, dtype=float)
            if m.shape != (self.p, self.p):
                raise ShapeError(f"explicit covariance has shape {m.shape}")
            if not np.allclose(m, m.T, rtol=0, atol=1e-12 * max(1.0, np.abs(m).max())):
                raise NonSymmetric("explicit covariance is not symmetric")
            if np.any(np.diag(m) <= 0):
                raise DomainError("explicit covariance needs a positive diagonal")
            object.__setattr__(self, "matrix", m)
        elif self.kind in (Cov.B2, Cov.B3) and self.build_seed is None:
            raise DomainError(f"{self.kind.value} needs a build_seed")


@dataclass(frozen=True)
class SignalSpec:
    m: int
    energy: float = 0.5


def _build_rng(seed, tag):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(tag,))))


def _int_part(p, power):
    # floor of p**power, guarding against 7.999999 style round-off
    k = math.floor(p**power + 1e-9)
    return max(0, min(p, k))


def ar1_covariance(p, rho=0.5):
    idx = np.arange(p)
    return rho ** np.abs(idx[:, None] - idx[None, :]).astype(float)


def spiked_correlation(b):
    """``I + bb' - diag(b^2)``: unit diagonal, ``b_i b_j`` off the diagonal."""
    r = np.outer(b, b)
    np.fill_diagonal(r, 1.0)
    return r


def spiked_covariance(p, rng):
    sigma2 = rng.uniform(1.0, 2.0, size=p)
    b = np.zeros(p)
    k = _int_part(p, 0.3)
    b[:k] = rng.uniform(0.7, 0.9, size=k)
    s = np.sqrt(sigma2)
    return spiked_correlation(b) * np.outer(s, s)


def rook_matrix(p):
    """Spatial weights: 0.5 to both neighbours, 1 at the two ends."""
    w = np.zeros((p, p))
    i = np.arange(p - 1)
    w[i + 1, i] = 0.5
    w[i, i + 1] = 0.5
    w[0, 1] = 1.0
    w[p - 1, p - 2] = 1.0
    return w


def spatial_factor_covariance(p, rng, rho=0.5, delta=0.3):
    gamma = np.zeros(p)
    k = _int_part(p, delta)
    gamma[:k] = rng.uniform(0.7, 0.9, size=k)
    a = np.eye(p) - rho * rook_matrix(p)
    try:
        a_inv = np.linalg.solve(a, np.eye(p))
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(f"I - rho W is singular for p={p}, rho={rho}") from exc
    if not np.all(np.isfinite(a_inv)):
        raise SingularSystem(f"I - rho W is singular for p={p}, rho={rho}")
    # (I - rho W^T)^{-1} is the transpose of (I - rho W)^{-1}
    sigma = np.outer(gamma, gamma) + a_inv @ a_inv.T
    return 0.5 * (sigma + sigma.T)


def build_covariance(spec):
    """Materialize the covariance described by ``spec``."""
    if spec.kind is Cov.B1:
        return ar1_covariance(spec.p)
    if spec.kind is Cov.B2:
        return spiked_covariance(spec.p, _build_rng(spec.build_seed, 2))
    if spec.kind is Cov.B3:
        return spatial_factor_covariance(
            spec.p, _build_rng(spec.build_seed, 3), spec.rho, spec.delta
        )
    return np.array(spec.matrix)


def matrix_sqrt_sym(sigma):
    """Symmetric PSD square root by eigendecomposition.

    Eigenvalues slightly below zero (relative ``1e-10``) are clamped; anything
    more negative raises :class:`NotPSD`.
    """
    sigma = np.asarray(sigma, dtype=float)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {sigma.shape}")
    norm = float(np.linalg.norm(sigma, 2)) if sigma.size else 0.0
    if not np.allclose(sigma, sigma.T, rtol=0, atol=1e-12 * max(norm, 1.0)):
        raise NonSymmetric("matrix is not symmetric")
    evals, evecs = np.linalg.eigh(0.5 * (sigma + sigma.T))
    if evals.size and evals[0] < -1e-10 * norm:
        raise NotPSD(f"smallest eigenvalue {evals[0]!r} is negative")
    root = (evecs * np.sqrt(np.clip(evals, 0.0, None))) @ evecs.T
    return 0.5 * (root + root.T)


def sample_innovations(dist, n, p, rng):
    """An n x p array of i.i.d. innovations.

    A1 is N(0, 1); A2 is t(3)/sqrt(3), unit variance; A3 draws N(0, 9) with
    probability 0.1 and N(0, 1) otherwise, so its variance is 1.8.
    """
    kind = dist.kind if isinstance(dist, DistributionSpec) else Dist(dist)
    if kind is Dist.A1:
        return rng.standard_normal((n, p))
    if kind is Dist.A2:
        return rng.standard_t(3, size=(n, p)) / math.sqrt(3.0)
    wide = rng.random((n, p)) < 0.1
    z = rng.standard_normal((n, p))
    return np.where(wide, 3.0 * z, z)


def generate_log_basis(mu, sigma_sqrt, dist, n, rng):
    """Rows ``mu + sigma_sqrt @ U_i`` for innovation rows ``U_i``."""
    sigma_sqrt = np.asarray(sigma_sqrt, dtype=float)
    p = sigma_sqrt.shape[0]
    mu = np.zeros(p) if mu is None else np.asarray(mu, dtype=float)
    if sigma_sqrt.shape != (p, p) or mu.shape != (p,):
        raise ShapeError(
            f"mu has shape {mu.shape} and sigma_sqrt {sigma_sqrt.shape}; expected ({p},) and ({p}, {p})"
        )
    u = sample_innovations(dist, n, p, rng)
    return LogBasisMatrix(u @ sigma_sqrt.T + mu)


def to_composition(w):
    """Close ``exp(w)`` row-wise; the row max is removed first to avoid overflow."""
    w = w.values if isinstance(w, LogBasisMatrix) else LogBasisMatrix(w).values
    e = np.exp(w - w.max(axis=1, keepdims=True))
    return CompositionMatrix(e / e.sum(axis=1, keepdims=True))


def signal_vector(spec, p):
    """``sqrt(energy/m)`` in the first ``m`` coordinates, zero elsewhere."""
    if not 1 <= spec.m <= p:
        raise DomainError(f"m must satisfy 1 <= m <= p={p}, got {spec.m}")
    if spec.energy < 0:
        raise DomainError(f"energy must be non-negative, got {spec.energy}")
    mu = np.zeros(p)
    mu[: spec.m] = math.sqrt(spec.energy / spec.m)
    return mu
