"""Additive kernel ridge regression with elementary-symmetric-polynomial kernels."""

from .estimator import (
    FittedSalsa,
    SalsaConfig,
    compute_bandwidths,
    evaluate_component,
    fit,
    load_model,
    mse,
    predict,
    save_model,
)
from .kernels import EspKernelSpec, KernelVariant, esp_kernel, girard_newton_esp, kernel_matrix

__version__ = "0.1.0"
