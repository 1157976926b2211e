"""
Image quality metrics
"""

import math
from typing import Dict

import numpy as np
from src.data.image_io import ImageBuffer
from src.exceptions import DimensionError

PEAK = 255.0


def mse(clean: ImageBuffer, estimate: ImageBuffer) -> float:
    """Mean squared error between two images of equal size"""
    if clean.pixels.shape != estimate.pixels.shape:
        raise DimensionError(f"image sizes differ: {clean.pixels.shape} vs {estimate.pixels.shape}")
    diff = clean.pixels - estimate.pixels
    return float(np.mean(diff * diff))


def psnr(clean: ImageBuffer, estimate: ImageBuffer, peak: float = PEAK) -> float:
    """
    Peak signal-to-noise ratio in dB, 10 log10(peak^2 / MSE)

    Returns:
        +inf when the images are identical
    """
    error = mse(clean, estimate)
    if error == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / error)


def calculate_metrics(clean: ImageBuffer, noisy: ImageBuffer, estimate: ImageBuffer) -> Dict[str, float]:
    """PSNR of the noisy input and of the estimate, and the gain between them"""
    noisy_psnr = psnr(clean, noisy)
    out_psnr = psnr(clean, estimate)
    return {"noisy_psnr": noisy_psnr, "psnr": out_psnr, "gain_db": out_psnr - noisy_psnr}


__all__ = ["PEAK", "mse", "psnr", "calculate_metrics"]
