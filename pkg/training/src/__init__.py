"""
Class-Adapted Patch Denoiser Package
"""

__version__ = "0.1.0"
