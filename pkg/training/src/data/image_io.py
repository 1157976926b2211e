"""
Grayscale image buffers, PGM/PNG file I/O, noise injection and dataset loading
"""

from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
from loguru import logger
from PIL import Image, UnidentifiedImageError
from src.exceptions import ImageFormatError, ParameterError, UnsupportedDepthError

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"
IMAGE_SUFFIXES = (".pgm", ".png")

_DEEP_MODES = ("I", "I;16", "I;16B", "I;16L", "F")


@dataclass(frozen=True, eq=False)
class ImageBuffer:
    """Row-major grayscale intensities on the 0-255 scale, floating point"""

    pixels: np.ndarray

    def __post_init__(self):
        pixels = np.array(self.pixels, dtype=np.float64)
        if pixels.ndim != 2:
            raise ImageFormatError(f"expected a 2-D grayscale image, got shape {pixels.shape}")
        if not np.all(np.isfinite(pixels)):
            raise ImageFormatError("image contains non-finite values")
        pixels.setflags(write=False)
        object.__setattr__(self, "pixels", pixels)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def data(self) -> np.ndarray:
        """Flattened row-major intensities"""
        return self.pixels.reshape(-1)

    @property
    def num_pixels(self) -> int:
        return self.pixels.size

    def quantized(self) -> np.ndarray:
        """uint8 export: clamp to [0, 255] and round half away from zero"""
        return np.floor(np.clip(self.pixels, 0.0, 255.0) + 0.5).astype(np.uint8)


def _read_gray(path: str, kind: str) -> ImageBuffer:
    try:
        img = Image.open(path)
    except (UnidentifiedImageError, ValueError) as e:
        raise ImageFormatError(f"malformed {kind} header in {path}: {e}") from e

    with img:
        if img.mode in _DEEP_MODES:
            raise UnsupportedDepthError(f"{path}: {kind} mode {img.mode} is not 8-bit")
        if img.mode != "L":
            raise ImageFormatError(f"{path}: {kind} mode {img.mode} is not 8-bit grayscale")
        try:
            img.load()
        except (OSError, ValueError) as e:
            raise ImageFormatError(f"{path}: {kind} data unreadable: {e}") from e
        values = np.asarray(img, dtype=np.uint8)
    return ImageBuffer(values.astype(np.float64))


def load_image(path: Union[str, Path]) -> ImageBuffer:
    """
    Load an 8-bit grayscale image (binary PGM, or PNG read-only)

    Raises:
        ImageFormatError: unknown format or malformed header
        UnsupportedDepthError: bit depth other than 8
    """
    path = str(path)
    with open(path, "rb") as f:
        raw = f.read(len(PNG_SIGNATURE))

    if raw.startswith(b"P5"):
        img = _read_gray(path, "PGM")
    elif raw.startswith(PNG_SIGNATURE):
        img = _read_gray(path, "PNG")
    else:
        raise ImageFormatError(f"{path}: unsupported image format")

    logger.debug(f"Loaded {path}: {img.width}x{img.height}")
    return img


def save_image(img: ImageBuffer, path: Union[str, Path]):
    """Write a binary PGM (P5, maxval 255) after clamping and rounding"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    with open(path, "wb") as f:
        f.write(header)
        f.write(img.quantized().tobytes())
    logger.debug(f"Saved {path}")


def add_noise(
    img: ImageBuffer, sigma: float, rng_seed: Union[int, np.random.SeedSequence, None] = None
) -> ImageBuffer:
    """y = x + n with n ~ N(0, sigma^2) i.i.d.; not clipped"""
    if sigma < 0:
        raise ParameterError(f"sigma must be non-negative, got {sigma}")
    rng = np.random.default_rng(rng_seed)
    noise = rng.normal(0.0, 1.0, size=img.pixels.shape) * sigma
    return ImageBuffer(img.pixels + noise)


class ImageDataset:
    """Class-specific image dataset: <root>/train and <root>/test, or a flat directory"""

    def __init__(self, root: Union[str, Path]):
        """
        Initialize ImageDataset

        Args:
            root: Dataset directory
        """
        self.root = Path(root)

    def list_images(self, subdir: Optional[str] = None) -> List[Path]:
        """Sorted image files of a subdirectory (or of the root); other files are skipped with a warning"""
        directory = self.root / subdir if subdir else self.root
        if not directory.is_dir():
            return []

        files = []
        for entry in sorted(directory.iterdir()):
            if entry.is_dir():
                continue
            if entry.suffix.lower() in IMAGE_SUFFIXES:
                files.append(entry)
            else:
                logger.warning(f"Ignoring non-image file: {entry}")
        return files

    def has_split(self) -> bool:
        return (self.root / "train").is_dir()

    def split_files(self, n_test: int = 5, seed: int = 0) -> Tuple[List[Path], List[Path]]:
        """
        Train/test file lists

        Uses train/ and test/ when present; otherwise picks n_test random
        images of the flat directory for test and keeps the rest for training.
        """
        if self.has_split():
            return self.list_images("train"), self.list_images("test")

        files = self.list_images()
        rng = np.random.default_rng(seed)
        test_idx = set(rng.permutation(len(files))[: min(n_test, len(files))].tolist())
        train = [f for i, f in enumerate(files) if i not in test_idx]
        test = [f for i, f in enumerate(files) if i in test_idx]
        logger.info(f"Random split of {self.root}: {len(train)} train / {len(test)} test")
        return train, test

    def load(self, files: List[Path]) -> List[Tuple[str, ImageBuffer]]:
        """Load images as (stem, ImageBuffer) pairs"""
        images = [(f.stem, load_image(f)) for f in files]
        logger.info(f"Loaded {len(images)} images from {self.root}")
        return images


def split_dataset(root: Union[str, Path], n_test: int = 5, seed: int = 0) -> Tuple[List[Path], List[Path]]:
    """Train/test image files of a dataset directory"""
    return ImageDataset(root).split_files(n_test=n_test, seed=seed)


__all__ = ["ImageBuffer", "ImageDataset", "load_image", "save_image", "add_noise", "split_dataset"]
