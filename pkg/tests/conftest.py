"""
Pytest configuration and fixtures for the class-adapted denoiser tests.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add training/ to path so tests import src.*
project_root = Path(__file__).parent.parent
training_path = project_root / "training"
if str(training_path) not in sys.path:
    sys.path.insert(0, str(training_path))

from src.data.image_io import ImageBuffer  # noqa: E402
from src.features.patches import PatchGrid, extract_patches  # noqa: E402
from src.models.density import GGParams, fit_gaussian, fit_gg_fixed_point  # noqa: E402
from src.models.prior import Cluster, ClusterModel, TrainingMeta  # noqa: E402
from src.utils.helpers import array_digest  # noqa: E402


def build_model(patch_store: np.ndarray, labels: np.ndarray, patch_side: int, beta: float = 0.9) -> ClusterModel:
    """ClusterModel from a patch store and fixed labels, without the learning loop"""
    patch_store = np.asarray(patch_store, dtype=np.float64)
    clusters = []
    for m in range(int(labels.max()) + 1):
        idx = np.flatnonzero(labels == m)
        members = patch_store[idx]
        clusters.append(
            Cluster(gg=fit_gg_fixed_point(members, beta), gauss=fit_gaussian(members), member_indices=idx)
        )
    meta = TrainingMeta(dataset_hash=array_digest(patch_store), iterations=0, created_at=0.0)
    return ClusterModel(
        clusters=clusters, patch_store=patch_store, patch_side=patch_side, beta=beta, training_meta=meta
    )


@pytest.fixture
def rng():
    """Seeded generator."""
    return np.random.default_rng(12345)


@pytest.fixture
def random_spd(rng):
    """Factory of random SPD matrices."""

    def make(p: int, scale: float = 1.0) -> np.ndarray:
        a = rng.standard_normal((p, p))
        return scale * (a @ a.T / p + 0.5 * np.eye(p))

    return make


@pytest.fixture
def clean_image():
    """16x16 integer-valued test image with varied texture."""
    values = np.random.default_rng(7).integers(0, 256, size=(16, 16))
    return ImageBuffer(values.astype(np.float64))


@pytest.fixture
def store_model(clean_image):
    """Single-cluster model whose patch store holds every 4x4 patch of clean_image."""
    grid = PatchGrid.for_image(clean_image, 4, 1)
    patches = extract_patches(clean_image, grid)
    return build_model(patches, np.zeros(patches.shape[0], dtype=np.int64), patch_side=4)


@pytest.fixture
def two_cluster_model():
    """Two well separated 2x2-patch clusters around intensities 60 and 190."""
    gen = np.random.default_rng(3)
    dark = 60.0 + 5.0 * gen.standard_normal((200, 4))
    light = 190.0 + 5.0 * gen.standard_normal((200, 4))
    labels = np.repeat([0, 1], 200)
    return build_model(np.vstack([dark, light]), labels, patch_side=2)


@pytest.fixture
def constant_model():
    """M=1 model whose member patches are all equal to 100."""
    p = 4
    store = np.full((50, p), 100.0)
    cluster = Cluster(
        gg=GGParams(mu=np.full(p, 100.0), sigma=np.eye(p), beta=0.9),
        gauss=fit_gaussian(store),
        member_indices=np.arange(50),
    )
    meta = TrainingMeta(dataset_hash=array_digest(store), iterations=0, created_at=0.0)
    return ClusterModel(clusters=[cluster], patch_store=store, patch_side=2, beta=0.9, training_meta=meta)


@pytest.fixture
def text_dataset(tmp_path):
    """Small synthetic text-like dataset with train/ and test/ splits."""
    from src.data.synthetic import generate_text_dataset

    root = tmp_path / "text"
    generate_text_dataset(root, n_train=4, n_test=2, size=32, seed=1)
    return root
