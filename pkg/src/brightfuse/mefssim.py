"""Structural fidelity of a fused image against its exposure stack.

For every patch location the stack defines a desired signal: the
strongest mean-removed patch magnitude across exposures sets the target
strength, and the strength-weighted average of the patch directions sets
the target structure.  The fused patch is scored against that desired
patch with an SSIM-style stabilized ratio, and scores are averaged over
all locations.  Everything runs on luminance in 0-255 code units.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import DegenerateInputError, DimensionMismatchError, UsageError

ZERO_NORM_TOL = 1e-9

_LUMA = np.array([0.299, 0.587, 0.114], dtype=np.float64)


@dataclass(frozen=True)
class MefSsimConfig:
    patch_size: int = 8
    stride: int = 1
    stabilizer: float = (0.03 * 255.0) ** 2  # code-unit spread constant

    def __post_init__(self):
        if self.patch_size < 2:
            raise UsageError(f"patch_size must be >= 2, got {self.patch_size}")
        if self.stride < 1:
            raise UsageError(f"stride must be >= 1, got {self.stride}")


def _as_luma_codes(img: np.ndarray) -> np.ndarray:
    # float64 throughout: the score must be invariant to joint rescaling
    # of all inputs, which float32 luma rounding would break.
    if img.ndim == 3:
        img = img.astype(np.float64) @ _LUMA
    return img.astype(np.float64) * 255.0


def _patches(plane: np.ndarray, size: int, stride: int) -> np.ndarray:
    win = sliding_window_view(plane, (size, size))[::stride, ::stride]
    ph, pw = win.shape[:2]
    return win.reshape(ph * pw, size * size)


def mef_ssim(stack: list, fused: np.ndarray, cfg: MefSsimConfig = MefSsimConfig()) -> float:
    """Score in (0, 1]; higher means the fusion kept more stack structure."""
    if len(stack) < 2:
        raise DegenerateInputError(f"need >= 2 stack images, got {len(stack)}")
    fused_l = _as_luma_codes(fused)
    stack_l = []
    for img in stack:
        plane = _as_luma_codes(img)
        if plane.shape != fused_l.shape:
            raise DimensionMismatchError(
                f"stack image {plane.shape} does not match fused {fused_l.shape}"
            )
        stack_l.append(plane)
    if min(fused_l.shape) < cfg.patch_size:
        raise DimensionMismatchError(
            f"images smaller than patch size {cfg.patch_size}"
        )

    y = _patches(fused_l, cfg.patch_size, cfg.stride)
    y_t = y - y.mean(axis=1, keepdims=True)
    y_norm2 = np.sum(y_t * y_t, axis=1)

    sum_t = None
    max_norm = None
    for plane in stack_l:
        x = _patches(plane, cfg.patch_size, cfg.stride)
        x_t = x - x.mean(axis=1, keepdims=True)
        norm = np.sqrt(np.sum(x_t * x_t, axis=1))
        sum_t = x_t if sum_t is None else sum_t + x_t
        max_norm = norm if max_norm is None else np.maximum(max_norm, norm)

    # Desired patch: strongest magnitude along the strength-weighted mean
    # direction.  Weighting each unit direction by its own norm collapses
    # to the plain sum of mean-removed patches.
    sum_norm = np.sqrt(np.sum(sum_t * sum_t, axis=1))
    safe = np.maximum(sum_norm, ZERO_NORM_TOL)
    scale = np.where(sum_norm > ZERO_NORM_TOL, max_norm / safe, 0.0)
    xhat = sum_t * scale[:, None]
    xhat_norm2 = np.sum(xhat * xhat, axis=1)

    c = cfg.stabilizer
    score = (2.0 * np.sum(xhat * y_t, axis=1) + c) / (xhat_norm2 + y_norm2 + c)

    # All-flat source patches: perfect when the fused patch is flat too.
    flat_src = max_norm <= ZERO_NORM_TOL
    flat_fused = y_norm2 <= ZERO_NORM_TOL**2
    score = np.where(flat_src & flat_fused, 1.0, score)
    return float(score.mean())
