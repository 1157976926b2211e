"""
Utility functions for the class-adapted denoiser
"""
import hashlib
from pathlib import Path

import numpy as np
import yaml


def load_config(config_path: str) -> dict:
    """Load YAML configuration file"""
    with open(config_path, "r", encoding="utf-8") as f:
        return yaml.safe_load(f) or {}


def default_config_path() -> Path:
    """Path of the bundled config.yaml"""
    return Path(__file__).parent.parent / "config" / "config.yaml"


def array_digest(array: np.ndarray) -> bytes:
    """SHA-256 of an array's little-endian float64 bytes"""
    data = np.ascontiguousarray(array, dtype="<f8")
    return hashlib.sha256(data.tobytes()).digest()


def file_digest(path: str) -> str:
    """Hex SHA-256 of a file"""
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()
