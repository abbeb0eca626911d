"""Synthesis of brighter virtual exposures from a single dark image.

Pixels whose channels are all above a low-code threshold are mapped
through the IMF channel by channel (reliable one-to-one regime).  Pixels
with any under-exposed channel instead get their base layer amplified by
a single scalar gain shared across channels, which keeps hue stable and
leaves the noise-bearing detail layer untouched.  The gain is fitted by
weighted least squares against the IMF output of the usable channels so
no seam appears along the regime boundary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .crf import Crf, Imf, apply_imf, compute_imf, map_codes
from .edgefilter import DEFAULT_LAMBDA, DEFAULT_RADIUS, BaseDetail, wgif_decompose
from .errors import DimensionMismatchError, EmptyCaseSetError, UsageError

GAMMA_MIN = 1.0
GAMMA_MAX = 255.0


@dataclass(frozen=True)
class VirtGenConfig:
    xi_low: float = 5.0
    xi_high: float = 60.0
    ratios: tuple = (4.0, 16.0)

    def __post_init__(self):
        if not (0 <= self.xi_low < self.xi_high <= 255):
            raise UsageError(
                f"need 0 <= xi_low < xi_high <= 255, got {self.xi_low}, {self.xi_high}"
            )
        if any(r <= 1 for r in self.ratios) or list(self.ratios) != sorted(self.ratios):
            raise UsageError(f"ratios must be increasing and > 1, got {self.ratios}")


def case2_mask(img: np.ndarray, cfg: VirtGenConfig) -> np.ndarray:
    """True where some channel's code falls below the reliability threshold."""
    codes = img.astype(np.float64) * 255.0
    return codes.min(axis=2) < cfg.xi_low


def reliability_weight(z, cfg: VirtGenConfig = VirtGenConfig()):
    """Confidence in the IMF at code z: zero when under-exposed, ramping
    to full weight (128) above the upper threshold."""
    z = np.asarray(z, dtype=np.float64)
    h = (cfg.xi_high - z) / (cfg.xi_high - cfg.xi_low)
    mid = 128.0 - 3.0 * h**2 + 2.0 * h**3
    out = np.where(z < cfg.xi_low, 0.0, np.where(z < cfg.xi_high, mid, 128.0))
    return out if out.shape else float(out)


def solve_gamma(
    z1: np.ndarray,
    bd: BaseDetail,
    imf: Imf,
    mask: np.ndarray,
    cfg: VirtGenConfig = VirtGenConfig(),
) -> float:
    """Base-layer gain minimizing the weighted gap to the IMF output.

    Over masked pixels and all channels, minimizes
    sum w(z) * (imf(z) - detail - gain * base)^2 in code units, which has
    the closed form gain = sum(w*b*(m-e)) / sum(w*b^2).  The result is
    clamped to [1, 255].
    """
    if not mask.any():
        raise EmptyCaseSetError("no under-exposed pixels to fit the gain on")
    codes = z1.astype(np.float64) * 255.0
    base = bd.base.astype(np.float64) * 255.0
    detail = bd.detail.astype(np.float64) * 255.0

    num = 0.0
    den = 0.0
    for ch in range(3):
        z = codes[:, :, ch][mask]
        w = reliability_weight(z, cfg)
        b = base[:, :, ch][mask]
        e = detail[:, :, ch][mask]
        m = map_codes(imf, z, ch)
        num += float(np.sum(w * b * (m - e)))
        den += float(np.sum(w * b * b))
    if den <= 0.0:
        raise EmptyCaseSetError("gain fit degenerate: zero weighted base energy")
    return float(np.clip(num / den, GAMMA_MIN, GAMMA_MAX))


def generate_virtual(
    z1: np.ndarray,
    crf: Crf,
    ratio: float,
    cfg: VirtGenConfig = VirtGenConfig(),
    wgif_radius: int = DEFAULT_RADIUS,
    wgif_lambda: float = DEFAULT_LAMBDA,
    bd: BaseDetail | None = None,
) -> np.ndarray:
    """Produce the virtual longer exposure at the given time ratio.

    A precomputed base/detail decomposition can be passed in when
    generating several ratios from the same input.
    """
    if z1.ndim != 3 or z1.shape[2] != 3:
        raise DimensionMismatchError("generate_virtual expects a 3-channel image")
    imf = compute_imf(crf, ratio)
    mask = case2_mask(z1, cfg)
    mapped = apply_imf(imf, z1)
    if not mask.any():
        return mapped

    if bd is None:
        bd = wgif_decompose(z1, radius=wgif_radius, lambda_reg=wgif_lambda)
    try:
        gain = solve_gamma(z1, bd, imf, mask, cfg)
    except EmptyCaseSetError:
        gain = float(np.clip(ratio, GAMMA_MIN, GAMMA_MAX))
    amplified = np.clip(gain * bd.base + bd.detail, 0.0, 1.0).astype(np.float32)
    return np.where(mask[:, :, None], amplified, mapped)
