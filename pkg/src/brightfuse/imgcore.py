"""Image containers, 8-bit I/O, color conversion, and pyramid primitives.

Conventions used across the package:

* 8-bit images are ``uint8`` arrays of shape (H, W, 3), sRGB code values.
* Float images are ``float32`` arrays, shape (H, W, 3) or (H, W) for a
  single channel, values nominally in [0, 1].
* All filters use reflect-101 borders (numpy ``mode="reflect"``), and
  accumulate in float64 before narrowing back to float32.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import (
    DimensionMismatchError,
    FormatError,
    InputOutputError,
    SchemaError,
)

# BT.601 full-range luma coefficients.
_LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114], dtype=np.float64)

# 5-tap binomial kernel used for every pyramid blur.
_BINOMIAL5 = np.array([1.0, 4.0, 6.0, 4.0, 1.0], dtype=np.float64) / 16.0

_EIGHT_BIT_MODES = {"1", "L", "LA", "P", "RGB", "RGBA", "CMYK"}


def load_image(path) -> np.ndarray:
    """Decode an 8-bit PNG or JPEG into a (H, W, 3) uint8 array.

    Grayscale inputs are replicated to three channels; images with more
    than 8 bits per sample are rejected.
    """
    path = Path(path)
    if not path.exists():
        raise InputOutputError(f"no such file: {path}")
    try:
        with Image.open(path) as im:
            if im.mode not in _EIGHT_BIT_MODES:
                raise FormatError(
                    f"unsupported bit depth or mode {im.mode!r} in {path}; "
                    "only 8-bit images are accepted"
                )
            rgb = im.convert("RGB")
            arr = np.asarray(rgb, dtype=np.uint8)
    except UnidentifiedImageError as exc:
        raise InputOutputError(f"cannot decode {path}: {exc}") from exc
    except OSError as exc:
        raise InputOutputError(f"cannot read {path}: {exc}") from exc
    return arr


def save_png(img: np.ndarray, path) -> None:
    """Write a (H, W, 3) uint8 array as an 8-bit RGB PNG."""
    if img.dtype != np.uint8:
        raise FormatError("save_png expects uint8 data; convert with to_u8 first")
    if img.ndim == 2:
        img = np.repeat(img[:, :, None], 3, axis=2)
    try:
        Image.fromarray(img, mode="RGB").save(Path(path), format="PNG")
    except OSError as exc:
        raise InputOutputError(f"cannot write {path}: {exc}") from exc


def to_float(img: np.ndarray) -> np.ndarray:
    """Map uint8 codes to float32 codes/255."""
    return (img.astype(np.float64) / 255.0).astype(np.float32)


def to_u8(img: np.ndarray) -> np.ndarray:
    """Clamp to [0, 1] and quantize, rounding half away from zero."""
    v = np.clip(img.astype(np.float64), 0.0, 1.0) * 255.0
    return np.floor(v + 0.5).astype(np.uint8)


def luminance(img: np.ndarray) -> np.ndarray:
    """BT.601 luma of a 3-channel float image, as a (H, W) float32 array."""
    if img.ndim != 3 or img.shape[2] != 3:
        raise DimensionMismatchError("luminance expects a 3-channel image")
    return (img.astype(np.float64) @ _LUMA_WEIGHTS).astype(np.float32)


@dataclass
class Pyramid:
    """Ordered multi-resolution stack; level 0 is full resolution."""

    kind: str  # "gaussian" | "laplacian"
    levels: list = field(default_factory=list)

    def __len__(self):
        return len(self.levels)


def _blur5(img: np.ndarray) -> np.ndarray:
    """Separable 5-tap binomial blur with reflect-101 borders (float64)."""
    out = img.astype(np.float64)
    for axis in (0, 1):
        pad = [(0, 0)] * out.ndim
        pad[axis] = (2, 2)
        padded = np.pad(out, pad, mode="reflect")
        acc = np.zeros_like(out)
        for k in range(5):
            sl = [slice(None)] * out.ndim
            sl[axis] = slice(k, k + out.shape[axis])
            acc += _BINOMIAL5[k] * padded[tuple(sl)]
        out = acc
    return out


def _downsample(img: np.ndarray) -> np.ndarray:
    """Blur then decimate by 2 along both spatial axes (size -> ceil(n/2))."""
    return _blur5(img)[::2, ::2].astype(np.float32)


def _upsample(img: np.ndarray, target_hw) -> np.ndarray:
    """Zero-insert to the recorded finer size, then blur scaled by 4."""
    th, tw = target_hw
    shape = (th, tw) + img.shape[2:]
    up = np.zeros(shape, dtype=np.float64)
    up[::2, ::2] = img
    return (4.0 * _blur5(up)).astype(np.float32)


class DegenerateLevelCount(DimensionMismatchError):
    pass


def _check_levels(img: np.ndarray, levels: int) -> None:
    if levels < 1:
        raise DegenerateLevelCount(f"levels must be >= 1, got {levels}")
    if 2 ** (levels - 1) > min(img.shape[0], img.shape[1]):
        raise DegenerateLevelCount(
            f"{levels} levels need min dimension >= {2 ** (levels - 1)}, "
            f"image is {img.shape[1]}x{img.shape[0]}"
        )


def build_gaussian(img: np.ndarray, levels: int) -> Pyramid:
    """Repeated blur-and-halve pyramid; level 0 is the source image."""
    _check_levels(img, levels)
    out = [np.asarray(img, dtype=np.float32)]
    for _ in range(levels - 1):
        out.append(_downsample(out[-1]))
    return Pyramid(kind="gaussian", levels=out)


def build_laplacian(img: np.ndarray, levels: int) -> Pyramid:
    """Band-pass pyramid whose collapse reproduces the source image."""
    gauss = build_gaussian(img, levels).levels
    out = []
    for k in range(levels - 1):
        up = _upsample(gauss[k + 1], gauss[k].shape[:2])
        out.append(gauss[k] - up)
    out.append(gauss[-1])
    return Pyramid(kind="laplacian", levels=out)


def collapse(pyr: Pyramid) -> np.ndarray:
    """Rebuild the full-resolution image from a laplacian pyramid."""
    if pyr.kind != "laplacian":
        raise DimensionMismatchError(f"collapse needs a laplacian pyramid, got {pyr.kind!r}")
    acc = pyr.levels[-1]
    for level in reversed(pyr.levels[:-1]):
        acc = _upsample(acc, level.shape[:2]) + level
    return acc.astype(np.float32)


@dataclass
class ExposureStack:
    """Ordered 8-bit images of one scene plus their exposure times."""

    images: list  # uint8 (H, W, 3) arrays, all the same size
    times: list  # exposure times, same order as images

    def __post_init__(self):
        if len(self.images) != len(self.times):
            raise SchemaError(
                f"{len(self.images)} images but {len(self.times)} exposure times"
            )

    def validate(self) -> None:
        if not self.images:
            raise SchemaError("empty exposure stack")
        shape = self.images[0].shape
        for i, im in enumerate(self.images):
            if im.shape != shape:
                raise SchemaError(
                    f"image {i} has shape {im.shape}, expected {shape}"
                )
        if any(t <= 0 for t in self.times):
            raise SchemaError("exposure times must be positive")


SIDECAR_NAME = "exposures.json"


def save_stack(stack: ExposureStack, directory, prefix: str = "exp") -> list:
    """Write stack images as PNGs plus the exposure-time sidecar JSON."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, img in enumerate(stack.images):
        p = directory / f"{prefix}_{i + 1}.png"
        save_png(img, p)
        paths.append(p)
    sidecar = {"exposure_times": [float(t) for t in stack.times]}
    (directory / SIDECAR_NAME).write_text(json.dumps(sidecar, indent=2) + "\n")
    return paths


def load_stack(directory) -> ExposureStack:
    """Load the PNGs in a directory (sorted by name) and their sidecar."""
    directory = Path(directory)
    sidecar_path = directory / SIDECAR_NAME
    if not sidecar_path.exists():
        raise InputOutputError(f"missing exposure sidecar {sidecar_path}")
    try:
        sidecar = json.loads(sidecar_path.read_text())
        times = list(sidecar["exposure_times"])
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise SchemaError(f"bad sidecar {sidecar_path}: {exc}") from exc
    image_paths = sorted(directory.glob("*.png"))
    if len(image_paths) != len(times):
        raise SchemaError(
            f"{len(image_paths)} PNGs in {directory} but sidecar lists "
            f"{len(times)} exposure times"
        )
    return ExposureStack(images=[load_image(p) for p in image_paths], times=times)
