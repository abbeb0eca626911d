"""Single-image brightening via virtual exposures and multi-scale fusion."""

from .crf import Crf, Imf, apply_imf, compute_imf, estimate_crf, load_crf, save_crf
from .edgefilter import BaseDetail, box_mean, wgif_decompose
from .imgcore import (
    ExposureStack,
    Pyramid,
    build_gaussian,
    build_laplacian,
    collapse,
    load_image,
    load_stack,
    luminance,
    save_png,
    save_stack,
    to_float,
    to_u8,
)
from .meffuse import FusionConfig, WeightMaps, build_weights, fuse, psi1, psi2
from .mefssim import MefSsimConfig, mef_ssim
from .residnet import NetWeights, ResidualOutput, enhance, forward, load_weights
from .virtgen import VirtGenConfig, case2_mask, generate_virtual, reliability_weight, solve_gamma

__version__ = "0.1.0"

__all__ = [
    "Crf",
    "Imf",
    "apply_imf",
    "compute_imf",
    "estimate_crf",
    "load_crf",
    "save_crf",
    "BaseDetail",
    "box_mean",
    "wgif_decompose",
    "ExposureStack",
    "Pyramid",
    "build_gaussian",
    "build_laplacian",
    "collapse",
    "load_image",
    "load_stack",
    "luminance",
    "save_png",
    "save_stack",
    "to_float",
    "to_u8",
    "FusionConfig",
    "WeightMaps",
    "build_weights",
    "fuse",
    "psi1",
    "psi2",
    "MefSsimConfig",
    "mef_ssim",
    "NetWeights",
    "ResidualOutput",
    "enhance",
    "forward",
    "load_weights",
    "VirtGenConfig",
    "case2_mask",
    "generate_virtual",
    "reliability_weight",
    "solve_gamma",
]
