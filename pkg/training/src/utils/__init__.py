"""Utilities package

Note: plotting and MLflow tracking are not imported here to avoid loading
matplotlib and mlflow at module level. Import them directly when needed:
    from src.utils.plotting import plot_psnr_vs_sigma
    from src.utils.mlflow_tracking import ExperimentTracker
"""

from src.utils.helpers import array_digest, default_config_path, file_digest, load_config
from src.utils.logger import configure_logging, logger, setup_file_logging
from src.utils.metrics import calculate_metrics, mse, psnr

__all__ = [
    # Logger
    "logger",
    "configure_logging",
    "setup_file_logging",
    # Metrics
    "calculate_metrics",
    "mse",
    "psnr",
    # Helpers
    "load_config",
    "default_config_path",
    "array_digest",
    "file_digest",
]
