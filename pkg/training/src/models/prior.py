"""
Class-specific patch prior: k-means initialization and hard-ML clustering
with generalized Gaussian clusters
"""

import math
import os
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed
from loguru import logger
from sklearn.cluster import KMeans
from src.exceptions import InsufficientDataError, ParameterError
from src.models.density import GaussianParams, GGParams, fit_gaussian, fit_gg_fixed_point, gg_log_density
from src.utils.helpers import array_digest

# variance of uniform rounding to integer intensities
QUANTIZATION_VARIANCE = 1.0 / 12.0


@dataclass(frozen=True, eq=False)
class Cluster:
    """One learned cluster: GG fit, Gaussian approximation and its member patches"""

    gg: GGParams
    gauss: GaussianParams
    member_indices: np.ndarray

    @property
    def size(self) -> int:
        return int(self.member_indices.shape[0])


@dataclass
class TrainingMeta:
    """Provenance of a learned prior"""

    dataset_hash: bytes
    iterations: int
    created_at: float
    loglik_history: List[float] = field(default_factory=list)
    change_history: List[float] = field(default_factory=list)

    @property
    def final_loglik(self) -> float:
        return self.loglik_history[-1] if self.loglik_history else math.nan


@dataclass(frozen=True, eq=False)
class ClusterModel:
    """M learned clusters plus the raw training patches they index"""

    clusters: List[Cluster]
    patch_store: np.ndarray
    patch_side: int
    beta: float
    training_meta: TrainingMeta

    @property
    def M(self) -> int:
        return len(self.clusters)

    @property
    def p(self) -> int:
        return self.patch_store.shape[1]

    @property
    def num_patches(self) -> int:
        return self.patch_store.shape[0]

    def members(self, m: int) -> np.ndarray:
        """Clean patches of cluster m"""
        return self.patch_store[self.clusters[m].member_indices]

    def labels(self) -> np.ndarray:
        """Cluster index of every stored patch"""
        labels = np.full(self.num_patches, -1, dtype=np.int64)
        for m, cluster in enumerate(self.clusters):
            labels[cluster.member_indices] = m
        return labels

    def cluster_sizes(self) -> List[int]:
        return [c.size for c in self.clusters]


def _labels_to_members(labels: np.ndarray, M: int) -> List[np.ndarray]:
    return [np.flatnonzero(labels == m) for m in range(M)]


def init_kmeans(patches: np.ndarray, M: int, rng_seed: int = 0, max_iters: int = 100) -> List[np.ndarray]:
    """
    Lloyd k-means under Euclidean distance

    Empty clusters are relocated to far-away points during the iterations.

    Returns:
        M arrays of member indices
    """
    patches = np.asarray(patches, dtype=np.float64)
    n, p = patches.shape
    if n < M * (p + 1):
        raise InsufficientDataError(f"need at least {M * (p + 1)} patches for M={M}, p={p}; got {n}")

    if M == 1:
        return [np.arange(n)]

    kmeans = KMeans(n_clusters=M, n_init=1, max_iter=max_iters, algorithm="lloyd", random_state=rng_seed)
    labels = kmeans.fit_predict(patches)
    logger.info(f"k-means init: M={M}, inertia={kmeans.inertia_:.4g}, iterations={kmeans.n_iter_}")
    return _labels_to_members(labels, M)


def _reseed_starved(
    labels: np.ndarray,
    patches: np.ndarray,
    M: int,
    params: Optional[Sequence[GGParams]] = None,
) -> set:
    """
    Refill clusters below p + 1 members from the worst-fitting patches of the largest cluster

    Mutates labels in place.

    Returns:
        Indices of clusters whose membership changed
    """
    p = patches.shape[1]
    floor = p + 1
    touched = set()
    while True:
        counts = np.bincount(labels, minlength=M)
        starved = int(np.argmin(counts))
        if counts[starved] >= floor:
            return touched
        donor = int(np.argmax(counts))
        take = min(floor, int(counts[donor]) - floor)

        donor_idx = np.flatnonzero(labels == donor)
        donor_patches = patches[donor_idx]
        if params is not None:
            fit = gg_log_density(donor_patches, params[donor])
        else:
            centroid = donor_patches.mean(axis=0)
            fit = -np.sum((donor_patches - centroid) ** 2, axis=1)
        worst = donor_idx[np.argsort(fit, kind="stable")[:take]]
        labels[worst] = starved
        touched.update((starved, donor))
        logger.warning(f"Cluster {starved} had {counts[starved]} members; moved {take} patches from cluster {donor}")


def _fit_cluster(samples: np.ndarray, beta: float, max_iters: int, tol: float) -> GGParams:
    """GG fit of one cluster; identical members get an isotropic quantization-level scatter"""
    try:
        return fit_gg_fixed_point(samples, beta, max_iters, tol)
    except ParameterError as e:
        logger.warning(f"Degenerate cluster of {samples.shape[0]} patches ({e}); using isotropic scatter")
        p = samples.shape[1]
        return GGParams(mu=samples.mean(axis=0), sigma=QUANTIZATION_VARIANCE * np.eye(p), beta=beta)


def _fit_clusters(
    patches: np.ndarray,
    labels: np.ndarray,
    which: Sequence[int],
    beta: float,
    max_iters: int,
    tol: float,
    workers: int,
) -> List[GGParams]:
    return Parallel(n_jobs=workers, prefer="threads")(
        delayed(_fit_cluster)(patches[labels == m], beta, max_iters, tol) for m in which
    )


def loglik_matrix(patches: np.ndarray, params: Sequence[GGParams]) -> np.ndarray:
    """(N, M) matrix of GG log-densities of every patch under every cluster"""
    return np.column_stack([gg_log_density(patches, theta) for theta in params])


def learn_prior(
    patches: np.ndarray,
    M: int = 20,
    beta: float = 0.9,
    rng_seed: int = 0,
    max_outer_iters: int = 30,
    stop_frac: float = 0.001,
    patch_side: Optional[int] = None,
    kmeans_max_iters: int = 100,
    fit_max_iters: int = 100,
    fit_tol: float = 1e-6,
    workers: int = 1,
    created_at: Optional[float] = None,
) -> ClusterModel:
    """
    Learn the GG mixture prior by hard maximum-likelihood clustering

    Alternates (1) assigning every patch to the cluster of highest GG log-density
    and (2) refitting each cluster's GG by the fixed point, until the fraction of
    patches changing cluster falls below stop_frac or max_outer_iters is reached.
    The stored GG parameters are fitted to the final memberships. When the last
    round had to reseed starved clusters, those clusters were refitted after the
    final assignment, so a stored patch may score higher under another cluster.

    Args:
        patches: (N, p) clean training patches
        M: Number of clusters
        beta: Fixed GG shape
        rng_seed: Seed of the k-means initialization
        max_outer_iters: Cap on assignment/refit rounds
        stop_frac: Label-change fraction that stops the loop
        patch_side: Patch side length (defaults to sqrt(p))
        kmeans_max_iters: Lloyd iteration cap
        fit_max_iters: Fixed-point iteration cap
        fit_tol: Fixed-point relative tolerance
        workers: Threads used for the per-cluster refits
        created_at: Timestamp stored in the metadata (default: SOURCE_DATE_EPOCH, else 0)

    Returns:
        Immutable ClusterModel
    """
    logger.info("=" * 80)
    logger.info("LEARNING PATCH PRIOR")
    logger.info("=" * 80)

    patches = np.ascontiguousarray(patches, dtype=np.float64)
    n, p = patches.shape
    if patch_side is None:
        patch_side = int(round(math.sqrt(p)))
    if n < M * (p + 1):
        raise InsufficientDataError(f"need at least {M * (p + 1)} patches for M={M}, p={p}; got {n}")
    logger.info(f"Patches: {n:,} x p={p}, M={M}, beta={beta}")

    labels = np.empty(n, dtype=np.int64)
    for m, idx in enumerate(init_kmeans(patches, M, rng_seed, kmeans_max_iters)):
        labels[idx] = m
    _reseed_starved(labels, patches, M)

    params = _fit_clusters(patches, labels, range(M), beta, fit_max_iters, fit_tol, workers)
    loglik_history: List[float] = []
    change_history: List[float] = []

    iteration = 0
    for iteration in range(1, max_outer_iters + 1):
        ll = loglik_matrix(patches, params)
        new_labels = np.argmax(ll, axis=1)
        changes = int(np.count_nonzero(new_labels != labels))
        frac = changes / n
        total = float(ll[np.arange(n), new_labels].sum())
        loglik_history.append(total)
        change_history.append(frac)
        logger.info(f"Iteration {iteration}: log-likelihood={total:.6g}, changed={changes:,} ({frac:.4%})")

        moved = new_labels != labels
        changed_clusters = set(labels[moved].tolist()) | set(new_labels[moved].tolist())
        labels = new_labels
        reseeded = _reseed_starved(labels, patches, M, params)

        last = changes == 0 or frac < stop_frac or iteration == max_outer_iters
        if last and not reseeded:
            break

        # refit only clusters whose membership changed
        which = sorted(changed_clusters | reseeded)
        refit = _fit_clusters(patches, labels, which, beta, fit_max_iters, fit_tol, workers)
        for m, theta in zip(which, refit):
            params[m] = theta
        if last:
            break

    members = _labels_to_members(labels, M)
    clusters = [
        Cluster(gg=params[m], gauss=fit_gaussian(patches[idx]), member_indices=idx) for m, idx in enumerate(members)
    ]

    if created_at is None:
        created_at = float(os.environ.get("SOURCE_DATE_EPOCH", 0))
    meta = TrainingMeta(
        dataset_hash=array_digest(patches),
        iterations=iteration,
        created_at=created_at,
        loglik_history=loglik_history,
        change_history=change_history,
    )

    sizes = [len(idx) for idx in members]
    logger.info(f"Cluster sizes: min={min(sizes):,}, max={max(sizes):,}")
    logger.info(f"✓ Prior learned in {iteration} iterations")

    return ClusterModel(clusters=clusters, patch_store=patches, patch_side=patch_side, beta=beta, training_meta=meta)


__all__ = ["Cluster", "ClusterModel", "TrainingMeta", "init_kmeans", "learn_prior", "loglik_matrix"]
