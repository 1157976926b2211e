"""
Patch geometry: extraction of overlapping patches and overlap-averaged reassembly
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from src.data.image_io import ImageBuffer
from src.exceptions import ImageSizeError, ParameterError


def _axis_offsets(length: int, side: int, stride: int) -> np.ndarray:
    """Offsets 0, stride, ... with the last one clamped to length - side"""
    offsets = list(range(0, length - side + 1, stride))
    if offsets[-1] != length - side:
        offsets.append(length - side)
    return np.asarray(offsets, dtype=np.int64)


@dataclass(frozen=True)
class PatchGrid:
    """Square patches of patch_side pixels on a stride grid covering a width x height image"""

    patch_side: int
    stride: int
    width: int
    height: int

    def __post_init__(self):
        if self.patch_side < 1 or self.stride < 1:
            raise ParameterError("patch_side and stride must be positive")
        if self.width < self.patch_side or self.height < self.patch_side:
            raise ImageSizeError(
                f"image {self.width}x{self.height} is smaller than patch side {self.patch_side}"
            )

    @classmethod
    def for_image(cls, img: ImageBuffer, patch_side: int, stride: int) -> "PatchGrid":
        return cls(patch_side=patch_side, stride=stride, width=img.width, height=img.height)

    @property
    def p(self) -> int:
        return self.patch_side * self.patch_side

    @cached_property
    def col_offsets(self) -> np.ndarray:
        return _axis_offsets(self.width, self.patch_side, self.stride)

    @cached_property
    def row_offsets(self) -> np.ndarray:
        return _axis_offsets(self.height, self.patch_side, self.stride)

    @property
    def count(self) -> int:
        return len(self.row_offsets) * len(self.col_offsets)

    @cached_property
    def offsets(self) -> np.ndarray:
        """(count, 2) array of (row, col) origins, row-major"""
        rows, cols = np.meshgrid(self.row_offsets, self.col_offsets, indexing="ij")
        return np.stack([rows.ravel(), cols.ravel()], axis=1)

    @property
    def center_index(self) -> int:
        """Index of the central pixel inside a vectorized patch"""
        c = self.patch_side // 2
        return c * self.patch_side + c


def extract_patches(img: ImageBuffer, grid: PatchGrid) -> np.ndarray:
    """
    Vectorize all grid patches

    Returns:
        (count, p) matrix, one row per grid offset, row-major pixel order, raw intensities
    """
    if (img.width, img.height) != (grid.width, grid.height):
        raise ImageSizeError(f"grid is for {grid.width}x{grid.height}, image is {img.width}x{img.height}")
    s = grid.patch_side
    windows = sliding_window_view(img.pixels, (s, s))
    selected = windows[np.ix_(grid.row_offsets, grid.col_offsets)]
    return selected.reshape(grid.count, grid.p).copy()


def reassemble(patches: np.ndarray, grid: PatchGrid) -> ImageBuffer:
    """
    Put patches back at their origins and average overlapping pixels

    Raises:
        ImageSizeError: patch matrix does not match the grid
    """
    patches = np.asarray(patches, dtype=np.float64)
    if patches.shape != (grid.count, grid.p):
        raise ImageSizeError(f"expected {grid.count} patches of {grid.p} pixels, got {patches.shape}")

    s = grid.patch_side
    acc = np.zeros((grid.height, grid.width))
    hits = np.zeros((grid.height, grid.width))
    for patch, (row, col) in zip(patches.reshape(-1, s, s), grid.offsets):
        acc[row : row + s, col : col + s] += patch
        hits[row : row + s, col : col + s] += 1.0
    return ImageBuffer(acc / hits)


def reassemble_centers(patches: np.ndarray, centers: np.ndarray, grid: PatchGrid) -> ImageBuffer:
    """
    Central-pixel reconstruction

    Each patch writes its centre estimate to its centre pixel; pixels that are
    no patch's centre keep the overlap average of the full-patch estimates.
    """
    centers = np.asarray(centers, dtype=np.float64).reshape(-1)
    if centers.shape[0] != grid.count:
        raise ImageSizeError(f"expected {grid.count} centre values, got {centers.shape[0]}")
    pixels = np.array(reassemble(patches, grid).pixels)
    c = grid.patch_side // 2
    pixels[grid.offsets[:, 0] + c, grid.offsets[:, 1] + c] = centers
    return ImageBuffer(pixels)


def collect_patches(images: Iterable[ImageBuffer], patch_side: int, stride: int) -> np.ndarray:
    """Stack the grid patches of several images into one (N, p) training matrix"""
    blocks = [extract_patches(img, PatchGrid.for_image(img, patch_side, stride)) for img in images]
    if not blocks:
        return np.empty((0, patch_side * patch_side))
    return np.concatenate(blocks, axis=0)


__all__ = ["PatchGrid", "extract_patches", "reassemble", "reassemble_centers", "collect_patches"]
