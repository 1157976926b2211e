"""
Command-line interface: train, denoise and evaluate
"""

import argparse
import sys
import time
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd
from loguru import logger
from pydantic import ValidationError
from src.config.settings import ExperimentSpec, build_configs, get_settings
from src.data.image_io import ImageDataset, load_image, save_image
from src.exceptions import (
    DimensionError,
    EmptySampleError,
    ImageFormatError,
    ImageSizeError,
    InsufficientDataError,
    ModelFileError,
    ParameterError,
)
from src.features.patches import collect_patches
from src.models.evaluate import FLOAT_FORMAT, RESULT_COLUMNS, DenoiseEvaluator
from src.models.model_io import load_model, save_model
from src.models.pipeline import denoise
from src.models.prior import learn_prior
from src.utils.helpers import default_config_path, file_digest, load_config
from src.utils.logger import configure_logging, setup_file_logging
from src.utils.mlflow_tracking import ExperimentTracker

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_USAGE = 2
EXIT_INSUFFICIENT_DATA = 3
EXIT_MODEL_FILE = 4
EXIT_IMAGE = 5
EXIT_PARAMETER = 6


def exit_code_for(error: BaseException) -> int:
    """Map an exception to the process exit code"""
    if isinstance(error, (InsufficientDataError, EmptySampleError)):
        return EXIT_INSUFFICIENT_DATA
    if isinstance(error, ModelFileError):
        return EXIT_MODEL_FILE
    if isinstance(error, (ImageFormatError, ImageSizeError)):
        return EXIT_IMAGE
    if isinstance(error, (ParameterError, DimensionError, ValidationError)):
        return EXIT_PARAMETER
    if isinstance(error, (FileNotFoundError, NotADirectoryError, IsADirectoryError)):
        return EXIT_USAGE
    return EXIT_UNEXPECTED


def _require_path(path: Optional[str], what: str, directory: bool = False) -> Path:
    if not path:
        raise FileNotFoundError(f"{what} is required")
    resolved = Path(path)
    if directory and not resolved.is_dir():
        raise FileNotFoundError(f"{what} is not a directory: {resolved}")
    if not directory and not resolved.is_file():
        raise FileNotFoundError(f"{what} does not exist: {resolved}")
    return resolved


def _load_config(args: argparse.Namespace) -> Dict[str, Any]:
    path = _require_path(args.config, "config file") if args.config else default_config_path()
    return load_config(str(path))


def _tracker(args: argparse.Namespace, config: Dict[str, Any]) -> ExperimentTracker:
    settings = get_settings()
    mlflow_cfg = config.get("mlflow", {}) or {}
    uri = args.mlflow_uri or settings.MLFLOW_TRACKING_URI
    if not uri and mlflow_cfg.get("enabled"):
        uri = mlflow_cfg.get("tracking_uri", "")
    experiment = mlflow_cfg.get("experiment_name") or settings.MLFLOW_EXPERIMENT
    return ExperimentTracker(tracking_uri=uri, experiment_name=experiment)


def _denoise_overrides(args: argparse.Namespace, model) -> Dict[str, Any]:
    return {
        "M": model.M,
        "beta": model.beta,
        "patch_side": args.patch_side or model.patch_side,
        "stride": args.stride,
        "n_samples": args.samples,
        "tau": args.tau,
        "r": args.r,
        "passes": args.passes,
        "mode": args.mode,
        "workers": args.workers,
        "base_seed": args.seed,
        "cluster_assignment": False if args.no_clusters else None,
    }


def cmd_train(args: argparse.Namespace) -> int:
    """Learn the class prior from the training images and write the model file"""
    config = _load_config(args)
    overrides = {
        "M": args.M,
        "beta": args.beta,
        "patch_side": args.patch_side,
        "train_stride": args.stride,
        "seed": args.seed,
    }
    prior_cfg, _ = build_configs(config, overrides)

    logger.info("=" * 80)
    logger.info("PRIOR TRAINING PIPELINE")
    logger.info("=" * 80)

    dataset = ImageDataset(_require_path(args.dataset, "dataset", directory=True))
    n_test = (config.get("evaluation", {}) or {}).get("n_test", 5)
    train_files, _ = dataset.split_files(n_test=n_test, seed=prior_cfg.seed)
    if not train_files:
        raise InsufficientDataError(f"no training images found in {dataset.root}")

    images = [img for _, img in dataset.load(train_files)]
    patches = collect_patches(images, prior_cfg.patch_side, prior_cfg.train_stride)
    logger.info(f"✓ {patches.shape[0]:,} training patches from {len(images)} images")

    model = learn_prior(
        patches,
        M=prior_cfg.M,
        beta=prior_cfg.beta,
        rng_seed=prior_cfg.seed,
        max_outer_iters=prior_cfg.max_outer_iters,
        stop_frac=prior_cfg.stop_frac,
        patch_side=prior_cfg.patch_side,
        kmeans_max_iters=prior_cfg.kmeans_max_iters,
        fit_max_iters=prior_cfg.fit_max_iters,
        fit_tol=prior_cfg.fit_tol,
        workers=args.workers or 1,
        created_at=time.time() if args.record_time else None,
    )

    model_path = Path(args.model or (config.get("output", {}) or {}).get("model_path", "models/prior.cdm"))
    save_model(model, model_path)

    sizes = model.cluster_sizes()
    print("cluster,size")
    for m, size in enumerate(sizes):
        print(f"{m},{size}")
    print(f"final_loglik,{model.training_meta.final_loglik:.6f}")

    tracker = _tracker(args, config)
    with tracker.run("prior_training"):
        tracker.log_params(prior_cfg.model_dump())
        tracker.log_series("loglik", model.training_meta.loglik_history)
        tracker.log_series("label_change_frac", model.training_meta.change_history)
        tracker.log_metrics({f"cluster_{m}_size": s for m, s in enumerate(sizes)})
        tracker.log_artifact(str(model_path))

    if args.plot:
        from src.utils.plotting import plot_cluster_sizes

        figures_dir = Path(args.output or (config.get("output", {}) or {}).get("figures_dir", "outputs/"))
        figures_dir.mkdir(parents=True, exist_ok=True)
        plot_cluster_sizes(sizes, save_path=str(figures_dir / "cluster_sizes.png"))

    logger.info(f"✓ Model file {model_path} (sha256 {file_digest(str(model_path))[:16]})")
    logger.info("=" * 80)
    logger.info("  TRAINING COMPLETED SUCCESSFULLY")
    logger.info("=" * 80)
    return EXIT_OK


def cmd_denoise(args: argparse.Namespace) -> int:
    """Denoise one image and write the estimate plus a one-row CSV report"""
    config = _load_config(args)
    model = load_model(_require_path(args.model, "model file"))
    _, denoise_cfg = build_configs(config, _denoise_overrides(args, model))

    logger.info("=" * 80)
    logger.info("DENOISING")
    logger.info("=" * 80)

    input_path = _require_path(args.input, "input image")
    noisy = load_image(input_path)
    clean = load_image(_require_path(args.clean, "clean image")) if args.clean else None
    sigma = args.sigma[0]

    estimate, report = denoise(noisy, model, sigma, denoise_cfg, clean_img=clean)

    output_path = Path(args.output or input_path.with_name(f"{input_path.stem}_denoised.pgm"))
    save_image(estimate, output_path)
    logger.info(f"✓ Denoised image saved to {output_path}")

    report_path = Path(args.report or output_path.with_suffix(".csv"))
    report_path.parent.mkdir(parents=True, exist_ok=True)
    row = report.to_row(input_path.stem, denoise_cfg.base_seed, include_timing=not args.no_timings)
    pd.DataFrame([row], columns=RESULT_COLUMNS).to_csv(report_path, index=False, float_format=FLOAT_FORMAT)
    logger.info(f"✓ Report saved to {report_path}")
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    """Run the test images x sigmas x seeds protocol and write the results tables"""
    config = _load_config(args)
    model = load_model(_require_path(args.model, "model file"))
    _, denoise_cfg = build_configs(config, _denoise_overrides(args, model))
    eval_cfg = config.get("evaluation", {}) or {}

    dataset = _require_path(args.dataset, "dataset", directory=True) if args.dataset else None
    test_images = [_require_path(p, "test image") for p in (args.images or [])]
    spec = ExperimentSpec(
        dataset=dataset,
        test_images=test_images,
        sigmas=args.sigma or eval_cfg.get("sigmas", [20, 30, 40, 50]),
        seeds=args.seed_list or eval_cfg.get("seeds", [0]),
        overrides={k: v for k, v in _denoise_overrides(args, model).items() if v is not None},
        output_dir=Path(args.output or (config.get("output", {}) or {}).get("reports_dir", "outputs/reports/")),
    )

    if spec.test_images:
        images = [(path.stem, load_image(path)) for path in spec.test_images]
    else:
        loader = ImageDataset(spec.dataset)
        _, test_files = loader.split_files(n_test=eval_cfg.get("n_test", 5), seed=config.get("seed", 42))
        images = loader.load(test_files)
    if not images:
        raise InsufficientDataError("no test images to evaluate")

    evaluator = DenoiseEvaluator(
        model, denoise_cfg, tracker=_tracker(args, config), include_timing=not args.no_timings
    )
    evaluator.evaluate(
        images,
        spec.sigmas,
        spec.seeds,
        output_dir=str(spec.output_dir),
        save_images=not args.no_images,
        plot=args.plot,
    )
    return EXIT_OK


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="YAML config file (default: bundled config.yaml)")
    parser.add_argument("--model", help="Model file path")
    parser.add_argument("--patch-side", type=int, help="Patch side length in pixels")
    parser.add_argument("--stride", type=int, help="Patch stride in pixels")
    parser.add_argument("--workers", type=int, help="Parallel workers")
    parser.add_argument("--output", help="Output path")
    parser.add_argument("--plot", action="store_true", help="Write figures")
    parser.add_argument("--mlflow-uri", help="MLflow tracking URI (enables tracking)")
    parser.add_argument("--log-level", help="Console log level (default: LOG_LEVEL or INFO)")


def _add_denoise_knobs(parser: argparse.ArgumentParser):
    parser.add_argument("--samples", type=int, help="Clean samples per patch (n)")
    parser.add_argument("--tau", type=float, help="Raw importance-weight threshold")
    parser.add_argument("--r", type=float, help="Boosting constant, 0 <= r < 1")
    parser.add_argument("--passes", type=int, choices=[1, 2], help="Number of passes")
    parser.add_argument("--mode", choices=["full", "central"], help="Full-patch or central-pixel estimates")
    parser.add_argument("--no-clusters", action="store_true", help="Sample the whole patch store (external NLM)")
    parser.add_argument("--no-timings", action="store_true", help="Leave wall_ms empty for reproducible reports")


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with train, denoise and evaluate subcommands"""
    parser = argparse.ArgumentParser(prog="denoiser", description="Class-adapted SNIS patch denoiser")
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="Learn a class prior from clean images")
    _add_common(train)
    train.add_argument("--dataset", required=True, help="Dataset directory (train/ and test/, or flat)")
    train.add_argument("--M", type=int, help="Number of clusters")
    train.add_argument("--beta", type=float, help="GG shape parameter (1.0 gives the Gaussian variant)")
    train.add_argument("--seed", type=int, help="Seed of the k-means initialization and dataset split")
    train.add_argument(
        "--record-time", action="store_true", help="Store the wall-clock time in the model file (breaks reproducibility)"
    )
    train.set_defaults(handler=cmd_train)

    den = sub.add_parser("denoise", help="Denoise one image")
    _add_common(den)
    _add_denoise_knobs(den)
    den.add_argument("--input", required=True, help="Noisy image (PGM or PNG)")
    den.add_argument("--sigma", type=float, nargs=1, required=True, help="Noise standard deviation")
    den.add_argument("--clean", help="Ground truth image for PSNR")
    den.add_argument("--report", help="CSV report path (default: next to the output)")
    den.add_argument("--seed", type=int, help="Base seed of the per-patch sampling")
    den.set_defaults(handler=cmd_denoise)

    ev = sub.add_parser("evaluate", help="PSNR table over test images, sigmas and seeds")
    _add_common(ev)
    _add_denoise_knobs(ev)
    ev.add_argument("--dataset", help="Dataset directory (test/ or random split)")
    ev.add_argument("--images", nargs="+", help="Explicit clean test images")
    ev.add_argument("--sigma", type=float, nargs="+", help="Noise levels (default: config)")
    ev.add_argument("--seed", dest="seed_list", type=int, nargs="+", help="Run seeds (default: config)")
    ev.add_argument("--no-images", action="store_true", help="Do not write denoised images")
    ev.set_defaults(handler=cmd_evaluate, seed=None)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, configure logging and run a subcommand"""
    args = build_parser().parse_args(argv)

    settings = get_settings()
    configure_logging(args.log_level or settings.LOG_LEVEL, settings.LOG_FORMAT)
    if settings.LOG_FILE:
        setup_file_logging(settings.LOG_FILE)

    try:
        return args.handler(args)
    except Exception as e:
        code = exit_code_for(e)
        if code == EXIT_UNEXPECTED:
            logger.opt(exception=e).error(f"{args.command} failed: {e}")
        else:
            logger.error(f"{args.command} failed: {e}")
        return code


if __name__ == "__main__":
    sys.exit(main())
