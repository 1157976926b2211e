"""
Optional MLflow run tracking for prior learning and evaluation runs
"""

import math
from contextlib import contextmanager
from typing import Dict, Iterator, Optional, Sequence

import mlflow
from loguru import logger


class ExperimentTracker:
    """Log params, metrics and artifacts to MLflow; every call is a no-op when disabled"""

    def __init__(self, tracking_uri: Optional[str] = None, experiment_name: str = "class_adapted_denoising"):
        """
        Initialize ExperimentTracker

        Args:
            tracking_uri: MLflow tracking URI (None or empty disables tracking)
            experiment_name: MLflow experiment name
        """
        self.tracking_uri = tracking_uri or ""
        self.experiment_name = experiment_name
        self.enabled = bool(self.tracking_uri)

        if self.enabled:
            try:
                mlflow.set_tracking_uri(self.tracking_uri)
                mlflow.set_experiment(experiment_name)
                logger.info(f"MLflow tracking URI: {self.tracking_uri}")
                logger.info(f"Experiment: {experiment_name}")
            except Exception as e:
                logger.warning(f"⚠️  MLflow unavailable, tracking disabled: {e}")
                self.enabled = False

    @contextmanager
    def run(self, run_name: str) -> Iterator[None]:
        """Open an MLflow run for the duration of the block"""
        if not self.enabled:
            yield
            return

        try:
            active = mlflow.start_run(run_name=run_name)
        except Exception as e:
            logger.warning(f"⚠️  Could not start MLflow run {run_name}: {e}")
            yield
            return

        try:
            yield
        finally:
            try:
                mlflow.end_run()
            except Exception as e:
                logger.warning(f"⚠️  Could not close MLflow run {active.info.run_id}: {e}")

    def log_params(self, params: Dict):
        if not self.enabled:
            return
        try:
            mlflow.log_params(params)
        except Exception as e:
            logger.warning(f"⚠️  Failed to log params: {e}")

    def log_metrics(self, metrics: Dict, step: Optional[int] = None):
        """Log the finite numeric entries of a dict"""
        if not self.enabled:
            return
        numeric = {
            k: float(v)
            for k, v in metrics.items()
            if isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)
        }
        try:
            mlflow.log_metrics(numeric, step=step)
        except Exception as e:
            logger.warning(f"⚠️  Failed to log metrics: {e}")

    def log_series(self, name: str, values: Sequence[float]):
        """Log a metric history, one step per value"""
        for step, value in enumerate(values, start=1):
            self.log_metrics({name: value}, step=step)

    def log_artifact(self, path: str, artifact_path: Optional[str] = None):
        if not self.enabled:
            return
        try:
            mlflow.log_artifact(str(path), artifact_path)
            logger.info(f"✓ Logged {path} to MLflow")
        except Exception as e:
            logger.warning(f"⚠️  Failed to log artifact {path}: {e}")


__all__ = ["ExperimentTracker"]
