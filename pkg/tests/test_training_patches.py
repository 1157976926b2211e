"""
Unit tests for training/src/features/patches.py module.
"""

import numpy as np
import pytest
from src.data.image_io import ImageBuffer
from src.exceptions import ImageSizeError, ParameterError
from src.features.patches import PatchGrid, collect_patches, extract_patches, reassemble, reassemble_centers


class TestPatchGrid:
    """Tests for PatchGrid geometry."""

    def test_clamped_offsets(self):
        """Test the last offset is clamped to the image edge."""
        grid = PatchGrid(patch_side=8, stride=4, width=18, height=8)
        assert grid.col_offsets.tolist() == [0, 4, 8, 10]
        assert grid.row_offsets.tolist() == [0]
        assert grid.count == 4

    def test_count_formula(self):
        """Test count = ceil((W - s) / stride + 1) x ceil((H - s) / stride + 1)."""
        grid = PatchGrid(patch_side=8, stride=4, width=37, height=29)
        expected = int(np.ceil((37 - 8) / 4 + 1)) * int(np.ceil((29 - 8) / 4 + 1))
        assert grid.count == expected

    def test_every_pixel_covered(self):
        """Test every pixel belongs to at least one patch."""
        grid = PatchGrid(patch_side=5, stride=3, width=23, height=17)
        hits = np.zeros((17, 23))
        for row, col in grid.offsets:
            hits[row : row + 5, col : col + 5] += 1
        assert hits.min() >= 1

    def test_image_too_small(self):
        """Test an image smaller than the patch raises ImageSizeError."""
        with pytest.raises(ImageSizeError):
            PatchGrid(patch_side=8, stride=4, width=7, height=20)

    def test_invalid_stride(self):
        """Test a zero stride is rejected."""
        with pytest.raises(ParameterError):
            PatchGrid(patch_side=8, stride=0, width=16, height=16)


class TestExtractReassemble:
    """Tests for extract_patches / reassemble."""

    def test_single_patch(self, rng):
        """Test an 8x8 image with patch_side=8 gives its flattened self."""
        img = ImageBuffer(rng.uniform(0, 255, (8, 8)))
        patches = extract_patches(img, PatchGrid.for_image(img, 8, 4))
        assert patches.shape == (1, 64)
        assert np.array_equal(patches[0], img.data)

    def test_second_patch_is_shifted(self):
        """Test a 9-wide, 8-high image with stride 1 gives patches at columns 0 and 1."""
        img = ImageBuffer(np.arange(72, dtype=np.float64).reshape(8, 9))
        patches = extract_patches(img, PatchGrid.for_image(img, 8, 1))
        assert patches.shape == (2, 64)
        assert np.array_equal(patches[1], img.pixels[:, 1:9].ravel())

    @pytest.mark.parametrize("stride", [1, 2, 3, 4, 8])
    def test_round_trip_identity(self, rng, stride):
        """Test extract then reassemble reproduces the image for any stride."""
        img = ImageBuffer(rng.uniform(0, 255, (21, 19)))
        grid = PatchGrid.for_image(img, 8, stride)
        restored = reassemble(extract_patches(img, grid), grid)
        assert np.max(np.abs(restored.pixels - img.pixels)) < 1e-12

    def test_constant_patches(self):
        """Test constant patches reassemble to a constant image."""
        grid = PatchGrid(patch_side=4, stride=2, width=10, height=10)
        restored = reassemble(np.full((grid.count, grid.p), 42.0), grid)
        assert np.allclose(restored.pixels, 42.0)

    def test_overlap_is_averaged(self):
        """Test a pixel shared by two disagreeing patches gets their mean."""
        grid = PatchGrid(patch_side=2, stride=1, width=3, height=2)
        patches = np.vstack([np.full(4, 10.0), np.full(4, 20.0)])
        restored = reassemble(patches, grid)
        assert restored.pixels[0, 1] == 15.0
        assert restored.pixels[0, 0] == 10.0
        assert restored.pixels[1, 2] == 20.0

    def test_output_within_patch_range(self, rng):
        """Test reassembled values stay within the patch value range."""
        grid = PatchGrid(patch_side=4, stride=2, width=12, height=12)
        patches = rng.uniform(-50, 300, (grid.count, grid.p))
        restored = reassemble(patches, grid)
        assert restored.pixels.min() >= patches.min() - 1e-12
        assert restored.pixels.max() <= patches.max() + 1e-12

    def test_count_mismatch(self):
        """Test a wrong patch count raises ImageSizeError."""
        grid = PatchGrid(patch_side=4, stride=2, width=10, height=10)
        with pytest.raises(ImageSizeError):
            reassemble(np.zeros((grid.count - 1, grid.p)), grid)


class TestReassembleCenters:
    """Tests for central-pixel reconstruction."""

    def test_centres_overwrite_average(self):
        """Test each centre pixel takes its patch's centre value."""
        grid = PatchGrid(patch_side=3, stride=1, width=5, height=5)
        patches = np.zeros((grid.count, grid.p))
        centers = np.arange(grid.count, dtype=np.float64)
        restored = reassemble_centers(patches, centers, grid)
        assert np.array_equal(restored.pixels[1:4, 1:4].ravel(), centers)
        assert restored.pixels[0, 0] == 0.0


class TestCollectPatches:
    """Tests for collect_patches."""

    def test_stacks_images(self, rng):
        """Test patches of several images are concatenated."""
        images = [ImageBuffer(rng.uniform(0, 255, (8, 8))), ImageBuffer(rng.uniform(0, 255, (12, 8)))]
        patches = collect_patches(images, 4, 4)
        assert patches.shape == (4 + 6, 16)

    def test_no_images(self):
        """Test no images give an empty matrix of the right width."""
        assert collect_patches([], 4, 4).shape == (0, 16)
