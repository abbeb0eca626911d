"""Camera response functions and intensity mapping functions.

The response of each color channel is stored as a 256-entry table
``t[z] = ln(E)`` giving the relative log-irradiance that produces code
``z``.  Stored this way a single table serves both directions: the
inverse response is a lookup, and the forward response is a monotone
search with linear interpolation.

An intensity mapping function (IMF) is the code-to-code map between two
exposures of the same scene: scale the irradiance of a code by the
exposure-time ratio and push it back through the response.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DimensionMismatchError,
    InputOutputError,
    InsufficientImagesError,
    MonotonicityError,
    SchemaError,
    SingularSystemError,
    UsageError,
)
from .imgcore import ExposureStack

N_CODES = 256


@dataclass(frozen=True)
class Crf:
    """Per-channel log-irradiance tables, strictly increasing in code."""

    tables: np.ndarray  # float64, shape (3, 256)

    def __post_init__(self):
        t = np.asarray(self.tables, dtype=np.float64)
        if t.shape != (3, N_CODES):
            raise SchemaError(f"CRF tables must be 3x{N_CODES}, got {t.shape}")
        if not np.all(np.isfinite(t)):
            raise SchemaError("CRF tables contain non-finite entries")
        if np.any(np.diff(t, axis=1) <= 0):
            raise MonotonicityError("CRF tables must be strictly increasing")
        object.__setattr__(self, "tables", t)


@dataclass(frozen=True)
class Imf:
    """Code-to-code lookup tables for one exposure-time ratio."""

    lut: np.ndarray  # float64, shape (3, 256), values in [0, 255]
    ratio: float


def make_linear_crf() -> Crf:
    """Response of an ideal sensor, code-center convention (z+0.5)/256."""
    z = np.arange(N_CODES, dtype=np.float64)
    t = np.log((z + 0.5) / N_CODES)
    return Crf(tables=np.tile(t, (3, 1)))


def make_gamma_crf(gamma: float = 2.2) -> Crf:
    """Gamma-curve response f(E) = 255 * E^(1/gamma), code-center convention."""
    z = np.arange(N_CODES, dtype=np.float64)
    t = gamma * np.log((z + 0.5) / N_CODES)
    return Crf(tables=np.tile(t, (3, 1)))


def load_crf(path) -> Crf:
    """Read and validate a CRF JSON file."""
    path = Path(path)
    if not path.exists():
        raise InputOutputError(f"no such file: {path}")
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot parse CRF file {path}: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("version") != 1:
        raise SchemaError(f"{path}: expected a version-1 CRF object")
    channels = doc.get("channels")
    if (
        not isinstance(channels, list)
        or len(channels) != 3
        or any(not isinstance(c, list) or len(c) != N_CODES for c in channels)
    ):
        raise SchemaError(f"{path}: 'channels' must be 3 lists of {N_CODES} numbers")
    return Crf(tables=np.array(channels, dtype=np.float64))


def save_crf(crf: Crf, path) -> None:
    """Write a CRF JSON file; floats keep full round-trip precision."""
    doc = {"version": 1, "channels": [list(map(float, row)) for row in crf.tables]}
    Path(path).write_text(json.dumps(doc) + "\n")


def _hat_weights() -> np.ndarray:
    z = np.arange(N_CODES, dtype=np.float64)
    return np.minimum(z, 255.0 - z)


def estimate_crf(
    stack: ExposureStack,
    lambda_smooth: float = 50.0,
    samples: int = 200,
    seed: int = 0,
) -> Crf:
    """Recover log-irradiance tables from a multi-exposure stack.

    Solves, per channel, the least-squares system over the unknown table
    g(z) and per-pixel log irradiances: data terms tie g(code) to
    ln(E) + ln(dt), a second-difference penalty (weight lambda_smooth)
    keeps g smooth, and g(128) = 0 anchors the relative scale.  Codes are
    hat-weighted by min(z, 255-z) so clipped shadows/highlights count
    less.  Locally non-monotone solutions are projected to monotone.
    """
    stack.validate()
    if len(stack.images) < 2:
        raise InsufficientImagesError(
            f"CRF estimation needs >= 2 exposures, got {len(stack.images)}"
        )
    if samples < 50:
        raise UsageError(f"need >= 50 sample pixels per channel, got {samples}")
    times = np.asarray(stack.times, dtype=np.float64)
    if np.unique(times).size < 2:
        raise SingularSystemError("exposure times are all identical")

    h, w = stack.images[0].shape[:2]
    rng = np.random.default_rng(seed)
    idx = rng.choice(h * w, size=min(samples, h * w), replace=False)
    ys, xs = np.unravel_index(idx, (h, w))
    log_dt = np.log(times)
    weights = _hat_weights()

    tables = np.empty((3, N_CODES), dtype=np.float64)
    for ch in range(3):
        codes = np.stack(
            [img[ys, xs, ch].astype(np.intp) for img in stack.images], axis=1
        )  # (samples, n_exposures)
        if np.unique(codes).size < 2:
            raise SingularSystemError(
                f"channel {ch}: sampled codes show no variation; retry with more samples"
            )
        n_px, n_exp = codes.shape
        n_rows = n_px * n_exp + 1 + (N_CODES - 2)
        n_cols = N_CODES + n_px
        a = np.zeros((n_rows, n_cols), dtype=np.float64)
        b = np.zeros(n_rows, dtype=np.float64)

        # Data terms: sqrt(w) * (g(code) - lnE_p) = sqrt(w) * ln(dt_j)
        row = np.arange(n_px * n_exp)
        flat_codes = codes.reshape(-1)
        sw = np.sqrt(weights[flat_codes])
        a[row, flat_codes] = sw
        a[row, N_CODES + np.repeat(np.arange(n_px), n_exp)] = -sw
        b[row] = sw * np.tile(log_dt, n_px)

        # Anchor the relative scale.
        a[n_px * n_exp, 128] = 1.0

        # Smoothness: sqrt(lambda * w(z)) * (g(z-1) - 2 g(z) + g(z+1)) = 0
        base = n_px * n_exp + 1
        for i in range(N_CODES - 2):
            s = np.sqrt(lambda_smooth * weights[i + 1])
            a[base + i, i] = s
            a[base + i, i + 1] = -2.0 * s
            a[base + i, i + 2] = s

        sol, *_ = np.linalg.lstsq(a, b, rcond=None)
        g = sol[:N_CODES]
        if not np.all(np.isfinite(g)):
            raise SingularSystemError(f"channel {ch}: solve produced non-finite values")
        tables[ch] = _strictly_increasing(g)
    return Crf(tables=tables)


def _strictly_increasing(g: np.ndarray) -> np.ndarray:
    """Isotonic (pool-adjacent-violators) projection, then break ties."""
    if np.all(np.diff(g) > 0):
        return g
    sums: list[float] = []
    counts: list[int] = []
    for v in g:
        sums.append(float(v))
        counts.append(1)
        while len(sums) > 1 and sums[-1] / counts[-1] <= sums[-2] / counts[-2]:
            sums[-2] += sums.pop()
            counts[-2] += counts.pop()
    out = np.repeat([s / c for s, c in zip(sums, counts)], counts)
    # Equal runs from pooling become strictly increasing by an epsilon ramp.
    eps = max(1e-9, 1e-12 * (out[-1] - out[0]))
    return out + eps * np.arange(len(out))


def compute_imf(crf: Crf, ratio: float) -> Imf:
    """Intensity mapping between exposures differing by ``ratio``.

    For every code: take its irradiance from the table, scale by the
    ratio, and locate the resulting log-irradiance back in the table by
    binary search with linear interpolation.  Irradiances beyond the
    table range clamp to the end codes, matching sensor clipping.
    """
    if ratio <= 0:
        raise UsageError(f"exposure ratio must be positive, got {ratio}")
    log_ratio = np.log(ratio)
    codes = np.arange(N_CODES, dtype=np.float64)
    lut = np.empty((3, N_CODES), dtype=np.float64)
    for ch in range(3):
        t = crf.tables[ch]
        lut[ch] = np.interp(t + log_ratio, t, codes)
    return Imf(lut=lut, ratio=float(ratio))


def map_codes(imf: Imf, codes: np.ndarray, channel: int) -> np.ndarray:
    """Apply one channel's lut to (possibly fractional) code values."""
    grid = np.arange(N_CODES, dtype=np.float64)
    return np.interp(np.clip(codes, 0.0, 255.0), grid, imf.lut[channel])


def apply_imf(imf: Imf, img: np.ndarray) -> np.ndarray:
    """Map a 3-channel float image through the IMF, channel by channel."""
    if img.ndim != 3 or img.shape[2] != 3:
        raise DimensionMismatchError("apply_imf expects a 3-channel image")
    codes = img.astype(np.float64) * 255.0
    out = np.empty_like(codes)
    for ch in range(3):
        out[:, :, ch] = map_codes(imf, codes[:, :, ch], ch)
    return (out / 255.0).astype(np.float32)
