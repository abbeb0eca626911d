"""Synthetic exposure-stack rendering from float radiance maps.

Substitutes for a physical multi-exposure capture rig: a relative
radiance map is pushed through a response curve at several exposure
times, optionally with shot/read noise in the shortest exposure, which
is the one a camera would keep to avoid motion blur.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .crf import N_CODES, Crf
from .errors import InputOutputError, SchemaError
from .imgcore import ExposureStack, _blur5

RADIANCE_FLOOR = 1e-12


def render_codes(radiance: np.ndarray, crf: Crf, time: float) -> np.ndarray:
    """Continuous sensor codes for a radiance map at one exposure time."""
    log_e = np.log(np.maximum(radiance * time, RADIANCE_FLOOR))
    grid = np.arange(N_CODES, dtype=np.float64)
    out = np.empty(radiance.shape, dtype=np.float64)
    for ch in range(3):
        out[:, :, ch] = np.interp(log_e[:, :, ch], crf.tables[ch], grid)
    return out


def render_stack(
    radiance: np.ndarray,
    crf: Crf,
    times=(1.0, 4.0, 16.0),
    noise_read: float = 0.0,
    noise_shot: float = 0.0,
    seed: int = 0,
) -> ExposureStack:
    """Quantized exposure stack; noise goes only into the shortest exposure.

    Noise is Gaussian in code units with per-pixel standard deviation
    sqrt(noise_read^2 + noise_shot^2 * code), added before quantization.
    """
    if radiance.ndim != 3 or radiance.shape[2] != 3:
        raise SchemaError("radiance map must be (H, W, 3)")
    times = [float(t) for t in times]
    shortest = int(np.argmin(times))
    rng = np.random.default_rng(seed)
    images = []
    for i, t in enumerate(times):
        codes = render_codes(radiance, crf, t)
        if i == shortest and (noise_read > 0 or noise_shot > 0):
            sigma = np.sqrt(noise_read**2 + noise_shot**2 * np.maximum(codes, 0.0))
            codes = codes + rng.standard_normal(codes.shape) * sigma
        images.append(np.clip(np.floor(codes + 0.5), 0, 255).astype(np.uint8))
    return ExposureStack(images=images, times=times)


def load_radiance(path) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise InputOutputError(f"no such file: {path}")
    try:
        arr = np.load(path)
    except (OSError, ValueError) as exc:
        raise InputOutputError(f"cannot read radiance map {path}: {exc}") from exc
    if arr.ndim == 2:
        arr = np.repeat(arr[:, :, None], 3, axis=2)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise SchemaError(f"{path}: radiance map must be (H, W) or (H, W, 3)")
    return arr.astype(np.float64)


def save_radiance(radiance: np.ndarray, path) -> None:
    np.save(Path(path), radiance.astype(np.float32))


def random_radiance(seed: int, height: int = 96, width: int = 96) -> np.ndarray:
    """Smooth random test scene: dark texture, a shadow pocket, a highlight.

    Tuned so the shortest exposure of a 1:4:16 render lands mostly in the
    low codes, with a patch below the IMF-reliability threshold and a
    bright region that saturates the longer exposures.
    """
    rng = np.random.default_rng(seed)
    low = rng.standard_normal((height // 8 + 2, width // 8 + 2, 3))
    field = np.repeat(np.repeat(low, 8, axis=0), 8, axis=1)[:height, :width]
    for _ in range(3):
        field = _blur5(field)
    field = (field - field.min()) / max(np.ptp(field), 1e-9)

    yy, xx = np.mgrid[0:height, 0:width]
    # Log-domain mix keeps the scene mostly dark with smooth variation.
    log_rad = -7.5 + 3.2 * field + 1.2 * (xx / width)[..., None]

    cy, cx = rng.integers(height // 4, 3 * height // 4), rng.integers(
        width // 4, 3 * width // 4
    )
    r_hi = min(height, width) // 6
    disk = (yy - cy) ** 2 + (xx - cx) ** 2 <= r_hi**2
    log_rad[disk] = np.log(0.35 + 0.3 * field[disk])

    cy2 = int(rng.integers(height // 5, 4 * height // 5))
    cx2 = int(rng.integers(width // 5, 4 * width // 5))
    r_lo = min(height, width) // 7
    pocket = (yy - cy2) ** 2 + (xx - cx2) ** 2 <= r_lo**2
    log_rad[pocket] = np.minimum(log_rad[pocket], -9.8 + 1.5 * field[pocket])

    return np.exp(log_rad)
