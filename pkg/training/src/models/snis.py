"""
Self-normalized importance sampling (SNIS) estimator of the MMSE patch

Clean samples z_j drawn from the prior are weighted by the Gaussian likelihood
w_j = exp(-||y - z_j||^2 / (2 sigma^2)) of the noisy patch. Weights below the
hard threshold tau are dropped before the self-normalized average.
"""

from dataclasses import dataclass
from typing import Literal, Optional, Tuple, Union

import numpy as np
from scipy.special import softmax
from src.config.settings import DEFAULT_LOG_TAU
from src.exceptions import DimensionError, EmptySampleError, ParameterError
from src.models.density import mahalanobis_sq
from src.models.prior import ClusterModel

EstimateMode = Literal["full", "central"]


@dataclass(frozen=True)
class NoiseModel:
    """Additive white Gaussian noise level on the 0-255 scale"""

    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ParameterError(f"sigma must be positive, got {self.sigma}")

    @property
    def variance(self) -> float:
        return self.sigma * self.sigma


@dataclass(frozen=True, eq=False)
class WeightSet:
    """Log importance weights after hard thresholding"""

    log_weights: np.ndarray
    kept_mask: np.ndarray
    ess: float
    fallback: bool

    @property
    def kept_count(self) -> int:
        return int(np.count_nonzero(self.kept_mask))

    def normalized(self) -> np.ndarray:
        """Self-normalized weights of the kept samples"""
        return softmax(self.log_weights[self.kept_mask])


def _check_sigma(sigma: float):
    if not sigma > 0:
        raise ParameterError(f"sigma must be positive, got {sigma}")


def log_weight(y: np.ndarray, z: np.ndarray, sigma: float) -> float:
    """-||y - z||^2 / (2 sigma^2)"""
    y = np.asarray(y, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if y.shape != z.shape:
        raise DimensionError(f"patch shapes differ: {y.shape} vs {z.shape}")
    _check_sigma(sigma)
    d = y - z
    return float(-np.dot(d, d) / (2.0 * sigma * sigma))


def log_weights(y: np.ndarray, samples: np.ndarray, sigma: float) -> np.ndarray:
    """Log weights of every sample row against the noisy patch y"""
    y = np.asarray(y, dtype=np.float64)
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 2 or samples.shape[1] != y.shape[0]:
        raise DimensionError(f"samples of shape {samples.shape} do not match patch length {y.shape[0]}")
    _check_sigma(sigma)
    d = samples - y
    return -np.einsum("ij,ij->i", d, d) / (2.0 * sigma * sigma)


def threshold_weights(log_weights: np.ndarray, log_tau: float = DEFAULT_LOG_TAU) -> WeightSet:
    """
    Hard-threshold raw importance weights

    A weight is kept when log w >= log tau. When nothing survives, only the
    largest weight is kept and the fallback flag is set.
    """
    lw = np.asarray(log_weights, dtype=np.float64).reshape(-1)
    if lw.size == 0:
        raise EmptySampleError("no importance weights to threshold")

    kept = lw >= log_tau
    fallback = not kept.any()
    if fallback:
        kept = np.zeros_like(kept)
        kept[int(np.argmax(lw))] = True

    w = softmax(lw[kept])
    ess = float(1.0 / np.sum(w * w))
    return WeightSet(log_weights=lw, kept_mask=kept, ess=ess, fallback=fallback)


def self_normalized_mean(log_weights: np.ndarray, samples: np.ndarray) -> np.ndarray:
    """sum_j w_j z_j / sum_j w_j computed with max-shifted exponentials"""
    w = softmax(np.asarray(log_weights, dtype=np.float64))
    return w @ np.asarray(samples, dtype=np.float64)


def central_index(p: int) -> int:
    """Index of the central pixel of a vectorized square patch"""
    side = int(round(np.sqrt(p)))
    if side * side != p:
        raise DimensionError(f"patch length {p} is not a square")
    c = side // 2
    return c * side + c


def snis_estimate(
    y: np.ndarray,
    samples: np.ndarray,
    sigma: float,
    log_tau: float = DEFAULT_LOG_TAU,
    mode: EstimateMode = "full",
) -> Tuple[Union[np.ndarray, float], WeightSet]:
    """
    SNIS approximation of E[x | y]

    Args:
        y: Noisy patch (length p)
        samples: (n, p) clean samples from the prior
        sigma: Noise standard deviation
        log_tau: Log of the raw-weight threshold (applied before normalization)
        mode: 'full' returns the whole patch, 'central' the central pixel only

    Returns:
        Tuple of (estimate, WeightSet)
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 2 or samples.shape[0] == 0:
        raise EmptySampleError("snis_estimate needs at least one clean sample")

    weights = threshold_weights(log_weights(y, samples, sigma), log_tau)
    kept = samples[weights.kept_mask]
    if mode == "central":
        c = central_index(samples.shape[1])
        return float(self_normalized_mean(weights.log_weights[weights.kept_mask], kept[:, c])), weights
    if mode != "full":
        raise ParameterError(f"unknown estimate mode: {mode}")
    return self_normalized_mean(weights.log_weights[weights.kept_mask], kept), weights


def assign_patches(patches: np.ndarray, model: ClusterModel, sigma: float) -> np.ndarray:
    """
    Maximum-likelihood cluster of every noisy patch under N(mean_m, cov_m + sigma^2 I)

    Ties go to the lowest cluster index.
    """
    _check_sigma(sigma)
    patches = np.atleast_2d(np.asarray(patches, dtype=np.float64))
    if patches.shape[1] != model.p:
        raise DimensionError(f"patches have length {patches.shape[1]}, model expects {model.p}")

    ll = np.empty((patches.shape[0], model.M))
    for m, cluster in enumerate(model.clusters):
        chol, logdet = cluster.gauss.factor(sigma * sigma)
        ll[:, m] = -0.5 * (logdet + mahalanobis_sq(patches, cluster.gauss.mean, chol))
    return np.argmax(ll, axis=1)


def assign_patch(y: np.ndarray, model: ClusterModel, sigma: float) -> int:
    """Cluster index of one noisy patch"""
    return int(assign_patches(np.asarray(y)[np.newaxis, :], model, sigma)[0])


def draw_samples(
    model: ClusterModel,
    cluster_index: Optional[int],
    n: int,
    rng_seed: Union[int, np.random.Generator, None] = None,
) -> np.ndarray:
    """
    Uniform draw without replacement of clean patches

    Args:
        model: Learned prior
        cluster_index: Cluster to draw from, or None for the whole patch store
        n: Requested sample count; all members are returned when there are at most n
        rng_seed: Seed or generator

    Returns:
        (min(n, members), p) matrix
    """
    if cluster_index is None:
        members = np.arange(model.num_patches)
    else:
        if not 0 <= cluster_index < model.M:
            raise IndexError(f"cluster {cluster_index} does not exist (M={model.M})")
        members = model.clusters[cluster_index].member_indices

    if n <= 0:
        return np.empty((0, model.p))
    if members.shape[0] <= n:
        return model.patch_store[members]
    rng = np.random.default_rng(rng_seed)
    return model.patch_store[members[rng.choice(members.shape[0], size=n, replace=False)]]


def patch_seed(base_seed: int, patch_index: int) -> int:
    """Per-patch RNG seed, independent of how patches are split across workers"""
    return int(base_seed) ^ int(patch_index)


__all__ = [
    "NoiseModel",
    "WeightSet",
    "log_weight",
    "log_weights",
    "threshold_weights",
    "self_normalized_mean",
    "central_index",
    "snis_estimate",
    "assign_patches",
    "assign_patch",
    "draw_samples",
    "patch_seed",
]
