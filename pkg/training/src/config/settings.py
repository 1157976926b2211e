"""Configuration models: hyperparameters, experiment protocol and environment settings."""
import math
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, Field, field_validator, model_validator
from pydantic_settings import BaseSettings

DEFAULT_TAU = 5e-60
DEFAULT_LOG_TAU = math.log(DEFAULT_TAU)


class PriorConfig(BaseModel):
    """Hyperparameters of the GG mixture prior"""

    M: int = Field(20, ge=1, description="Number of clusters")
    beta: float = Field(0.9, gt=0, description="GG shape parameter (fixed)")
    patch_side: int = Field(8, ge=1, description="Patch side length in pixels")
    train_stride: int = Field(4, ge=1, description="Stride of training patch extraction")
    max_outer_iters: int = Field(30, ge=1)
    stop_frac: float = Field(0.001, ge=0, le=1, description="Label-change fraction that stops learning")
    kmeans_max_iters: int = Field(100, ge=1)
    fit_max_iters: int = Field(100, ge=1)
    fit_tol: float = Field(1e-6, gt=0)
    seed: int = 42


class DenoiseConfig(BaseModel):
    """Settings of one denoising run"""

    M: int = Field(20, ge=1)
    beta: float = Field(0.9, gt=0)
    n_samples: int = Field(500, ge=1, description="Clean samples per noisy patch")
    log_tau: float = Field(DEFAULT_LOG_TAU, description="Natural log of the raw-weight threshold")
    patch_side: int = Field(8, ge=1)
    stride: int = Field(1, ge=1)
    r: float = Field(0.7, ge=0, lt=1, description="Boosting constant")
    passes: int = Field(2, ge=1, le=2)
    base_seed: int = Field(0, ge=0, description="Base of the per-patch RNG seeds")
    mode: Literal["full", "central"] = "full"
    workers: int = Field(1, ge=1)
    sigma2_floor: float = Field(0.05, gt=0, le=1, description="sigma2 is clamped at sigma2_floor * sigma")
    cluster_assignment: bool = Field(True, description="False samples the whole patch store (external NLM)")

    @model_validator(mode="before")
    @classmethod
    def _tau_to_log(cls, data: Any) -> Any:
        """Accept a raw threshold `tau` and store its logarithm"""
        if isinstance(data, dict) and data.get("tau") is not None:
            data = dict(data)
            tau = float(data.pop("tau"))
            if tau <= 0:
                raise ValueError("tau must be positive")
            data["log_tau"] = math.log(tau)
        elif isinstance(data, dict):
            data = {k: v for k, v in data.items() if k != "tau"}
        return data

    @property
    def tau(self) -> float:
        return math.exp(self.log_tau)


class ExperimentSpec(BaseModel):
    """One evaluation protocol: test images x sigmas x seeds"""

    dataset: Optional[Path] = None
    test_images: List[Path] = Field(default_factory=list)
    sigmas: List[float]
    seeds: List[int] = Field(default_factory=lambda: [0])
    overrides: Dict[str, Any] = Field(default_factory=dict)
    output_dir: Path = Path("outputs/reports")

    @field_validator("sigmas")
    @classmethod
    def _sigmas_positive(cls, v: List[float]) -> List[float]:
        if not v:
            raise ValueError("sigma list must not be empty")
        if any(s <= 0 for s in v):
            raise ValueError("every sigma must be positive")
        return v

    @field_validator("seeds")
    @classmethod
    def _seeds_nonempty(cls, v: List[int]) -> List[int]:
        if not v:
            raise ValueError("seed list must not be empty")
        return v

    @model_validator(mode="after")
    def _paths_exist(self) -> "ExperimentSpec":
        if self.dataset is not None and not self.dataset.exists():
            raise ValueError(f"dataset path does not exist: {self.dataset}")
        missing = [str(p) for p in self.test_images if not p.exists()]
        if missing:
            raise ValueError(f"test images do not exist: {', '.join(missing)}")
        if self.dataset is None and not self.test_images:
            raise ValueError("either a dataset or explicit test images are required")
        return self


class Settings(BaseSettings):
    """Runtime settings from environment variables"""

    LOG_LEVEL: str = "INFO"
    LOG_FILE: str = ""
    LOG_FORMAT: str = "text"

    MLFLOW_TRACKING_URI: str = ""
    MLFLOW_EXPERIMENT: str = "class_adapted_denoising"

    class Config:
        env_file = ".env"
        case_sensitive = True
        extra = "ignore"


@lru_cache()
def get_settings() -> Settings:
    """Cached settings instance"""
    return Settings()


def build_configs(config: Dict[str, Any], overrides: Optional[Dict[str, Any]] = None) -> Tuple[PriorConfig, DenoiseConfig]:
    """
    Flatten the YAML sections into validated config models

    Args:
        config: Parsed config.yaml content
        overrides: Flat key/value overrides (None values are ignored)

    Returns:
        Tuple of (PriorConfig, DenoiseConfig)
    """
    patches = config.get("patches", {}) or {}
    prior = config.get("prior", {}) or {}
    denoise = config.get("denoise", {}) or {}
    seed = config.get("seed", 42)

    prior_values = {**prior, "seed": seed}
    for key in ("patch_side", "train_stride"):
        if key in patches:
            prior_values[key] = patches[key]

    denoise_values = {**denoise, "M": prior.get("M", 20), "beta": prior.get("beta", 0.9)}
    for key in ("patch_side", "stride"):
        if key in patches:
            denoise_values[key] = patches[key]

    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    if "tau" in overrides:
        denoise_values.pop("log_tau", None)
    if "log_tau" in overrides:
        denoise_values.pop("tau", None)

    prior_fields = set(PriorConfig.model_fields)
    denoise_fields = set(DenoiseConfig.model_fields) | {"tau"}
    prior_values.update({k: v for k, v in overrides.items() if k in prior_fields})
    denoise_values.update({k: v for k, v in overrides.items() if k in denoise_fields})

    return PriorConfig(**prior_values), DenoiseConfig(**denoise_values)


__all__ = [
    "DEFAULT_TAU",
    "DEFAULT_LOG_TAU",
    "PriorConfig",
    "DenoiseConfig",
    "ExperimentSpec",
    "Settings",
    "get_settings",
    "build_configs",
]
