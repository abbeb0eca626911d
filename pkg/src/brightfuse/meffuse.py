"""Fusion weights and multi-scale exposure fusion.

Each input gets a per-pixel quality weight (contrast x saturation x
well-exposedness).  The dark input additionally gets a highlight boost
so its brightest regions dominate the blend and are not washed out by
the saturated virtual exposures.  Blending happens per pyramid level:
laplacian pyramids of the images weighted by gaussian pyramids of the
normalized maps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, UsageError
from .imgcore import Pyramid, build_gaussian, build_laplacian, collapse, luminance


@dataclass(frozen=True)
class FusionConfig:
    psi1_enabled: bool = True
    sigma_e: float = 0.2
    eps_norm: float = 1e-12
    levels: int | None = None  # None = auto from image size

    def __post_init__(self):
        if self.sigma_e <= 0:
            raise UsageError(f"sigma_e must be positive, got {self.sigma_e}")
        if self.levels is not None and self.levels < 1:
            raise UsageError(f"levels must be >= 1, got {self.levels}")


@dataclass
class WeightMaps:
    maps: list  # one float32 (H, W) array per input image
    normalized: bool = False


def psi1(y):
    """Highlight boost for the dark input, as a function of luma code 0-255.

    1 below code 128, a smooth cubic ramp on (128, 160], and 2 above.
    """
    y = np.asarray(y, dtype=np.float64)
    h = (y - 128.0) / 32.0
    ramp = 1.0 + h * h * (3.0 - 2.0 * h)
    out = np.where(y > 160.0, 2.0, np.where(y > 128.0, ramp, 1.0))
    return out if out.shape else float(out)


def contrast_measure(img: np.ndarray) -> np.ndarray:
    """|4-neighbor laplacian| of the luminance, reflect-101 borders."""
    luma = luminance(img).astype(np.float64)
    padded = np.pad(luma, 1, mode="reflect")
    lap = (
        padded[:-2, 1:-1]
        + padded[2:, 1:-1]
        + padded[1:-1, :-2]
        + padded[1:-1, 2:]
        - 4.0 * luma
    )
    return np.abs(lap)


def saturation_measure(img: np.ndarray) -> np.ndarray:
    """Population standard deviation of (R, G, B) at each pixel."""
    src = img.astype(np.float64)
    mean_c = src.mean(axis=2)
    return np.sqrt(np.maximum((src * src).mean(axis=2) - mean_c * mean_c, 0.0))


def exposedness_measure(img: np.ndarray, sigma_e: float = 0.2) -> np.ndarray:
    """Per-channel Gaussian affinity to mid-gray, multiplied over channels."""
    src = img.astype(np.float64)
    return np.exp(-((src - 0.5) ** 2) / (2.0 * sigma_e**2)).prod(axis=2)


def psi2(img: np.ndarray, cfg: FusionConfig = FusionConfig()) -> np.ndarray:
    """Pixel quality: contrast x color saturation x well-exposedness."""
    if img.ndim != 3 or img.shape[2] != 3:
        raise DimensionMismatchError("psi2 expects a 3-channel image")
    q = (
        contrast_measure(img)
        * saturation_measure(img)
        * exposedness_measure(img, cfg.sigma_e)
    )
    return (q + cfg.eps_norm).astype(np.float32)


def build_weights(
    z1: np.ndarray,
    z2: np.ndarray,
    z3: np.ndarray,
    cfg: FusionConfig = FusionConfig(),
) -> WeightMaps:
    """Per-pixel fusion weights for (input, virtual, virtual), normalized."""
    if z1.shape != z2.shape or z1.shape != z3.shape:
        raise DimensionMismatchError(
            f"stack images differ in size: {z1.shape}, {z2.shape}, {z3.shape}"
        )
    w1 = psi2(z1, cfg).astype(np.float64)
    if cfg.psi1_enabled:
        w1 = w1 * psi1(luminance(z1).astype(np.float64) * 255.0)
    maps = [w1, psi2(z2, cfg).astype(np.float64), psi2(z3, cfg).astype(np.float64)]
    return normalize_weights(WeightMaps(maps=maps), cfg)


def normalize_weights(weights: WeightMaps, cfg: FusionConfig = FusionConfig()) -> WeightMaps:
    total = np.maximum(np.sum(weights.maps, axis=0), cfg.eps_norm)
    return WeightMaps(
        maps=[(m / total).astype(np.float32) for m in weights.maps],
        normalized=True,
    )


def default_levels(height: int, width: int) -> int:
    return max(1, int(math.floor(math.log2(min(height, width)))) - 2)


def fuse(
    stack: list,
    weights: WeightMaps,
    cfg: FusionConfig = FusionConfig(),
) -> np.ndarray:
    """Blend the stack under the weight maps, one pyramid level at a time."""
    if len(stack) != len(weights.maps):
        raise DimensionMismatchError(
            f"{len(stack)} images but {len(weights.maps)} weight maps"
        )
    shape = stack[0].shape
    for img, wmap in zip(stack, weights.maps):
        if img.shape != shape or wmap.shape != shape[:2]:
            raise DimensionMismatchError("stack/weight sizes do not match")
    if not weights.normalized:
        weights = normalize_weights(weights, cfg)

    levels = cfg.levels or default_levels(shape[0], shape[1])
    blended: list = []
    for img, wmap in zip(stack, weights.maps):
        lap = build_laplacian(np.asarray(img, dtype=np.float32), levels)
        gw = build_gaussian(np.asarray(wmap, dtype=np.float32), levels)
        for k in range(levels):
            contrib = gw.levels[k][:, :, None] * lap.levels[k]
            if k == len(blended):
                blended.append(contrib)
            else:
                blended[k] = blended[k] + contrib
    fusedpyr = Pyramid(kind="laplacian", levels=blended)
    return np.clip(collapse(fusedpyr), 0.0, 1.0).astype(np.float32)
