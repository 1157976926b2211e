"""
Synthetic text-like image class

Pages of procedurally drawn stroke glyphs: one fixed alphabet per class,
dark ink on light paper, glyph scale varying from page to page.
"""

from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger
from PIL import Image, ImageDraw, ImageFilter
from src.data.image_io import ImageBuffer, save_image

Stroke = List[Tuple[float, float]]
Glyph = List[Stroke]

ALPHABET_SIZE = 26
ALPHABET_SEED = 1234
PAPER = 235
INK = 30

# glyph lattice in unit coordinates, x across and y down
_LATTICE_X = (0.0, 0.5, 1.0)
_LATTICE_Y = (0.0, 0.25, 0.5, 0.75, 1.0)


def make_alphabet(size: int = ALPHABET_SIZE, seed: int = ALPHABET_SEED) -> List[Glyph]:
    """Random stroke glyphs on a 3 x 5 lattice; the same seed gives the same alphabet"""
    rng = np.random.default_rng(seed)
    alphabet = []
    for _ in range(size):
        glyph = []
        for _ in range(int(rng.integers(2, 5))):
            points = int(rng.integers(2, 4))
            xs = rng.choice(_LATTICE_X, size=points)
            ys = rng.choice(_LATTICE_Y, size=points)
            glyph.append([(float(x), float(y)) for x, y in zip(xs, ys)])
        alphabet.append(glyph)
    return alphabet


def render_text_page(
    size: int = 128,
    seed: int = 0,
    alphabet: Optional[Sequence[Glyph]] = None,
    glyph_height: Optional[int] = None,
) -> ImageBuffer:
    """
    Render one page of pseudo-text

    Args:
        size: Page width and height in pixels
        seed: Page seed (words, glyph scale, margins)
        alphabet: Glyph set (defaults to the class alphabet)
        glyph_height: Glyph height in pixels (random in [9, 15] when omitted)

    Returns:
        ImageBuffer with intensities in [0, 255]
    """
    rng = np.random.default_rng(seed)
    alphabet = alphabet if alphabet is not None else make_alphabet()
    height = int(glyph_height) if glyph_height else int(rng.integers(9, 16))
    width = max(3, int(round(0.6 * height)))
    advance = width + max(2, height // 5)
    line_gap = int(round(1.6 * height))
    stroke = max(1, height // 7)

    page = Image.new("L", (size, size), color=PAPER)
    draw = ImageDraw.Draw(page)

    margin = int(rng.integers(3, 8))
    y = margin
    while y + height <= size - margin:
        x = margin + int(rng.integers(0, advance))
        while x + width <= size - margin:
            for _ in range(int(rng.integers(2, 8))):
                if x + width > size - margin:
                    break
                glyph = alphabet[int(rng.integers(len(alphabet)))]
                for line in glyph:
                    points = [(x + px * width, y + py * height) for px, py in line]
                    draw.line(points, fill=INK, width=stroke)
                x += advance
            x += advance
        y += line_gap

    page = page.filter(ImageFilter.GaussianBlur(radius=0.6))
    return ImageBuffer(np.asarray(page, dtype=np.float64))


def generate_text_dataset(
    root: Union[str, Path],
    n_train: int = 20,
    n_test: int = 5,
    size: int = 128,
    seed: int = 0,
) -> Tuple[List[Path], List[Path]]:
    """
    Write a train/test dataset of text-like pages as PGM files

    Returns:
        Tuple of (train files, test files)
    """
    root = Path(root)
    alphabet = make_alphabet()
    files = {"train": [], "test": []}
    for index in range(n_train + n_test):
        split = "train" if index < n_train else "test"
        path = root / split / f"page_{index:03d}.pgm"
        save_image(render_text_page(size, seed=seed * 100003 + index, alphabet=alphabet), path)
        files[split].append(path)

    logger.info(f"✓ Text dataset written to {root}: {n_train} train / {n_test} test pages of {size}x{size}")
    return files["train"], files["test"]


__all__ = ["make_alphabet", "render_text_page", "generate_text_dataset"]
