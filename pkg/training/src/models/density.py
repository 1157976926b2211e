"""
Multivariate generalized Gaussian (GG) and Gaussian densities

Everything is evaluated in the log domain with Cholesky factors; raw densities
of 64-dimensional patches underflow double precision.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Tuple, Union

import numpy as np
from loguru import logger
from scipy import linalg
from scipy.special import gammaln
from src.exceptions import DimensionError, InsufficientDataError, ParameterError

SCATTER_EPS = 1e-6

SeedLike = Union[int, np.random.Generator, None]


def cholesky_factor(matrix: np.ndarray) -> Tuple[np.ndarray, float]:
    """
    Lower Cholesky factor and log-determinant of an SPD matrix

    Raises:
        ParameterError: matrix is not positive definite
    """
    try:
        chol = linalg.cholesky(matrix, lower=True, check_finite=True)
    except (linalg.LinAlgError, ValueError) as e:
        raise ParameterError(f"matrix is not positive definite: {e}") from e
    diag = np.diag(chol)
    if np.any(diag <= 0):
        raise ParameterError("matrix is not positive definite")
    return chol, 2.0 * float(np.sum(np.log(diag)))


def _as_rows(x: np.ndarray, p: int) -> Tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    rows = x[np.newaxis, :] if single else x
    if rows.ndim != 2 or rows.shape[1] != p:
        raise DimensionError(f"expected vectors of length {p}, got shape {x.shape}")
    return rows, single


def mahalanobis_sq(x: np.ndarray, mean: np.ndarray, chol: np.ndarray) -> np.ndarray:
    """(x - mean)^T (L L^T)^{-1} (x - mean) for each row of x"""
    solved = linalg.solve_triangular(chol, (x - mean).T, lower=True, check_finite=False)
    return np.einsum("ij,ij->j", solved, solved)


@dataclass(frozen=True, eq=False)
class GGParams:
    """Parameters (mu, sigma, beta) of one multivariate generalized Gaussian"""

    mu: np.ndarray
    sigma: np.ndarray
    beta: float

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=np.float64).reshape(-1)
        sigma = np.asarray(self.sigma, dtype=np.float64)
        p = mu.shape[0]
        if sigma.shape != (p, p):
            raise DimensionError(f"sigma must be {p}x{p}, got {sigma.shape}")
        if not self.beta > 0:
            raise ParameterError(f"beta must be positive, got {self.beta}")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", 0.5 * (sigma + sigma.T))
        object.__setattr__(self, "beta", float(self.beta))
        _ = self._factor

    @property
    def p(self) -> int:
        return self.mu.shape[0]

    @cached_property
    def _factor(self) -> Tuple[np.ndarray, float]:
        return cholesky_factor(self.sigma)

    @property
    def chol(self) -> np.ndarray:
        return self._factor[0]

    @property
    def logdet(self) -> float:
        return self._factor[1]

    @cached_property
    def log_normalizer(self) -> float:
        p, beta = self.p, self.beta
        return (
            np.log(beta)
            + gammaln(p / 2.0)
            - (p / 2.0) * np.log(np.pi)
            - gammaln(p / (2.0 * beta))
            - (p / (2.0 * beta)) * np.log(2.0)
            - 0.5 * self.logdet
        )


@dataclass(frozen=True, eq=False)
class GaussianParams:
    """Mean and covariance of a Gaussian cluster approximation"""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64).reshape(-1)
        cov = np.asarray(self.cov, dtype=np.float64)
        p = mean.shape[0]
        if cov.shape != (p, p):
            raise DimensionError(f"cov must be {p}x{p}, got {cov.shape}")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", 0.5 * (cov + cov.T))

    @property
    def p(self) -> int:
        return self.mean.shape[0]

    def factor(self, ridge: float = 0.0) -> Tuple[np.ndarray, float]:
        """Cholesky factor and log-determinant of cov + ridge * I"""
        if ridge < 0:
            raise ParameterError(f"ridge must be non-negative, got {ridge}")
        return cholesky_factor(self.cov + ridge * np.eye(self.p))


def gg_log_density(x: np.ndarray, params: GGParams) -> Union[float, np.ndarray]:
    """
    Natural-log GG density

    Args:
        x: One vector of length p or an (N, p) matrix of vectors
        params: GG parameters

    Returns:
        Scalar for a single vector, array of N values otherwise
    """
    rows, single = _as_rows(x, params.p)
    q = mahalanobis_sq(rows, params.mu, params.chol)
    out = params.log_normalizer - 0.5 * np.power(q, params.beta)
    return float(out[0]) if single else out


def gaussian_log_density(x: np.ndarray, params: GaussianParams, ridge: float = 0.0) -> Union[float, np.ndarray]:
    """Log density of N(mean, cov + ridge * I) at x (one vector or rows)"""
    rows, single = _as_rows(x, params.p)
    chol, logdet = params.factor(ridge)
    q = mahalanobis_sq(rows, params.mean, chol)
    out = -0.5 * (params.p * np.log(2.0 * np.pi) + logdet + q)
    return float(out[0]) if single else out


def regularize_scatter(sigma: np.ndarray, eps: float = SCATTER_EPS) -> np.ndarray:
    """Symmetrize and add eps * (trace / p) * I"""
    p = sigma.shape[0]
    sigma = 0.5 * (sigma + sigma.T)
    return sigma + eps * (np.trace(sigma) / p) * np.eye(p)


def fit_gaussian(samples: np.ndarray) -> GaussianParams:
    """Sample mean and maximum-likelihood (divide-by-N) covariance"""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 2 or samples.shape[0] == 0:
        raise InsufficientDataError("at least one sample is required")
    mean = samples.mean(axis=0)
    centered = samples - mean
    cov = centered.T @ centered / samples.shape[0]
    return GaussianParams(mean=mean, cov=cov)


def fit_gg_fixed_point(
    samples: np.ndarray,
    beta: float,
    max_iters: int = 100,
    tol: float = 1e-6,
    eps: float = SCATTER_EPS,
) -> GGParams:
    """
    Fit a GG with fixed shape by the scatter-matrix fixed point

    mu is the sample mean; sigma iterates
    Sigma <- (beta / N) * sum_i u_i^(beta - 1) (x_i - mu)(x_i - mu)^T,
    u_i = (x_i - mu)^T Sigma^{-1} (x_i - mu), starting from the sample covariance,
    until the relative Frobenius change drops below tol.

    Args:
        samples: (N, p) matrix with N >= p + 1
        beta: Shape parameter, held fixed
        max_iters: Iteration cap
        tol: Relative Frobenius tolerance
        eps: Scatter regularization weight

    Returns:
        Fitted GGParams
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 2:
        raise DimensionError(f"samples must be an (N, p) matrix, got shape {samples.shape}")
    n, p = samples.shape
    if n < p + 1:
        raise InsufficientDataError(f"need at least {p + 1} samples for p={p}, got {n}")
    if not beta > 0:
        raise ParameterError(f"beta must be positive, got {beta}")

    mu = samples.mean(axis=0)
    centered = samples - mu
    sigma = regularize_scatter(centered.T @ centered / n, eps)
    if np.trace(sigma) <= 0:
        raise ParameterError("degenerate scatter: samples have zero variance")

    tiny = np.finfo(np.float64).tiny
    iteration = 0
    for iteration in range(1, max_iters + 1):
        chol, _ = cholesky_factor(sigma)
        u = np.maximum(mahalanobis_sq(samples, mu, chol), tiny)
        weights = np.power(u, beta - 1.0)
        updated = regularize_scatter((beta / n) * (centered * weights[:, np.newaxis]).T @ centered, eps)
        change = np.linalg.norm(updated - sigma) / np.linalg.norm(sigma)
        sigma = updated
        if change < tol:
            break

    logger.debug(f"GG fixed point: p={p}, N={n}, beta={beta}, iterations={iteration}")
    return GGParams(mu=mu, sigma=sigma, beta=beta)


def gg_sample(params: GGParams, count: int, rng_seed: SeedLike = None) -> np.ndarray:
    """
    Draw i.i.d. samples with the stochastic representation of the GG

    q^beta ~ Gamma(p / (2 beta), scale 2), radius sqrt(q), uniform direction,
    shaped by the Cholesky factor of sigma.

    Returns:
        (count, p) matrix
    """
    rng = np.random.default_rng(rng_seed)
    p, beta = params.p, params.beta
    if count <= 0:
        return np.empty((0, p))
    radius = rng.gamma(shape=p / (2.0 * beta), scale=2.0, size=count) ** (1.0 / (2.0 * beta))
    directions = rng.standard_normal((count, p))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    return params.mu + radius[:, np.newaxis] * (directions @ params.chol.T)


__all__ = [
    "GGParams",
    "GaussianParams",
    "cholesky_factor",
    "mahalanobis_sq",
    "gg_log_density",
    "gaussian_log_density",
    "regularize_scatter",
    "fit_gaussian",
    "fit_gg_fixed_point",
    "gg_sample",
]
