"""Compressed-sensing reconstruction with Nesterov-II and analytic geometric incremental learning."""

from .bench import LassoInstance, loglog_slope, make_lasso, run_rate_bench
from .config import ConfigError, RunConfig
from .estimator import NestDGIL
from .gil import GilConfig, gil_restore, spectral_series
from .image import Image, PatchGrid, assemble_weighted, extract_patches
from .metrics import MetricReport, l1_loss, psnr, rmse_hu, ssim
from .operators import (MeasurementOperator, gaussian_orthonormal, gradient_extractor,
                        laplacian_extractor, measurement_count, radon_parallel)
from .prox import ProxWeights, prox_l0, prox_l1, prox_l2, prox_l32, theta
from .reconstruct import PRESETS, ct_reconstruct, nest_dgil_reconstruct
from .solvers import (DivergenceError, ScheduleParams, fista_solve, ista_solve, nesterov2_solve,
                      schedule_gamma, schedule_mu, schedule_tau)

__version__ = "0.1.0"

__all__ = [
    "LassoInstance", "loglog_slope", "make_lasso", "run_rate_bench", "ConfigError", "RunConfig",
    "NestDGIL", "GilConfig", "gil_restore", "spectral_series", "Image", "PatchGrid",
    "assemble_weighted", "extract_patches", "MetricReport", "l1_loss", "psnr", "rmse_hu", "ssim",
    "MeasurementOperator", "gaussian_orthonormal", "gradient_extractor", "laplacian_extractor",
    "measurement_count", "radon_parallel", "ProxWeights", "prox_l0", "prox_l1", "prox_l2",
    "prox_l32", "theta", "PRESETS", "ct_reconstruct", "nest_dgil_reconstruct", "DivergenceError",
    "ScheduleParams", "fista_solve", "ista_solve", "nesterov2_solve", "schedule_gamma",
    "schedule_mu", "schedule_tau",
]
