"""Inference for the residual enhancement network.

Weights come from a small binary file (see ``WEIGHT_MAGIC`` format
below) produced by the training side.  The network is a plain stack of
3x3 convolutions with per-channel PReLU between them; it maps the dark
input image to a residual that is added to a virtual exposure.
Inference is 32-bit with reflect-101 padding, both part of the weight
file contract.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionMismatchError, InputOutputError, WeightFileError

WEIGHT_MAGIC = b"LFW1"
WEIGHT_VERSION = 1
KERNEL_SIZE = 3


@dataclass(frozen=True)
class ConvLayer:
    kernel: np.ndarray  # float32 [out_ch, in_ch, kH, kW]
    bias: np.ndarray  # float32 [out_ch]
    prelu: np.ndarray | None  # float32 [out_ch]; None on the final layer


@dataclass(frozen=True)
class NetWeights:
    layers: tuple
    exposure_tag: str
    version: int = WEIGHT_VERSION


def _validate(layers, tag, path="<memory>") -> None:
    if not layers:
        raise WeightFileError(f"{path}: no layers")
    if layers[0].kernel.shape[1] != 3:
        raise WeightFileError(
            f"{path}: first layer must take 3 input channels, "
            f"got {layers[0].kernel.shape[1]}"
        )
    prev_out = 3
    for i, layer in enumerate(layers):
        out_ch, in_ch, kh, kw = layer.kernel.shape
        if in_ch != prev_out:
            raise WeightFileError(
                f"{path}: layer {i} expects {in_ch} input channels, "
                f"previous layer produces {prev_out}"
            )
        if (kh, kw) != (KERNEL_SIZE, KERNEL_SIZE):
            raise WeightFileError(f"{path}: layer {i} kernel must be 3x3, got {kh}x{kw}")
        if layer.bias.shape != (out_ch,):
            raise WeightFileError(f"{path}: layer {i} bias shape mismatch")
        last = i == len(layers) - 1
        if last and layer.prelu is not None:
            raise WeightFileError(f"{path}: final layer must not carry an activation")
        if not last and layer.prelu is None:
            raise WeightFileError(f"{path}: non-final layer {i} is missing PReLU slopes")
        if layer.prelu is not None and layer.prelu.shape != (out_ch,):
            raise WeightFileError(f"{path}: layer {i} PReLU shape mismatch")
        prev_out = out_ch
    if prev_out != 3:
        raise WeightFileError(f"{path}: final layer must produce 3 channels, got {prev_out}")
    if not tag:
        raise WeightFileError(f"{path}: empty exposure tag")


def load_weights(path) -> NetWeights:
    """Read and validate a weight file."""
    path = Path(path)
    if not path.exists():
        raise InputOutputError(f"no such file: {path}")
    data = path.read_bytes()
    off = 0

    def take(n):
        nonlocal off
        if off + n > len(data):
            raise InputOutputError(f"{path}: truncated weight file")
        chunk = data[off : off + n]
        off += n
        return chunk

    if take(4) != WEIGHT_MAGIC:
        raise WeightFileError(f"{path}: bad magic bytes")
    (version,) = struct.unpack("<I", take(4))
    if version != WEIGHT_VERSION:
        raise WeightFileError(f"{path}: unsupported version {version}")
    (tag_len,) = struct.unpack("<B", take(1))
    tag = take(tag_len).decode("utf-8")
    (layer_count,) = struct.unpack("<I", take(4))
    layers = []
    for _ in range(layer_count):
        out_ch, in_ch, kh, kw = struct.unpack("<IIII", take(16))
        (has_prelu,) = struct.unpack("<B", take(1))
        kernel = np.frombuffer(take(4 * out_ch * in_ch * kh * kw), dtype="<f4")
        kernel = kernel.reshape(out_ch, in_ch, kh, kw).copy()
        bias = np.frombuffer(take(4 * out_ch), dtype="<f4").copy()
        prelu = None
        if has_prelu:
            prelu = np.frombuffer(take(4 * out_ch), dtype="<f4").copy()
        layers.append(ConvLayer(kernel=kernel, bias=bias, prelu=prelu))
    if off != len(data):
        raise WeightFileError(f"{path}: {len(data) - off} trailing bytes")
    _validate(layers, tag, path)
    return NetWeights(layers=tuple(layers), exposure_tag=tag, version=version)


def _conv3x3(x: np.ndarray, kernel: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """Same-size 3x3 correlation with reflect-101 padding, float32."""
    h, w, _ = x.shape
    out_ch = kernel.shape[0]
    padded = np.pad(x, ((1, 1), (1, 1), (0, 0)), mode="reflect")
    acc = np.broadcast_to(bias, (h, w, out_ch)).astype(np.float32).copy()
    for dy in range(KERNEL_SIZE):
        for dx in range(KERNEL_SIZE):
            window = padded[dy : dy + h, dx : dx + w]
            acc += window @ kernel[:, :, dy, dx].T
    return acc


def forward(weights: NetWeights, z1: np.ndarray) -> np.ndarray:
    """Raw residual prediction for the dark input; not clamped."""
    if z1.ndim != 3 or z1.shape[2] != 3:
        raise DimensionMismatchError("forward expects a 3-channel image")
    x = np.ascontiguousarray(z1, dtype=np.float32)
    for layer in weights.layers:
        x = _conv3x3(x, layer.kernel, layer.bias)
        if layer.prelu is not None:
            x = np.where(x >= 0, x, layer.prelu * x).astype(np.float32)
    return x


@dataclass(frozen=True)
class ResidualOutput:
    residual: np.ndarray
    enhanced: np.ndarray


def enhance(weights: NetWeights, z1: np.ndarray, z_i: np.ndarray) -> ResidualOutput:
    """Add the predicted residual to a virtual exposure and clamp to [0, 1]."""
    if z1.shape != z_i.shape:
        raise DimensionMismatchError(
            f"input {z1.shape} and virtual image {z_i.shape} differ in size"
        )
    residual = forward(weights, z1)
    enhanced = np.clip(z_i + residual, 0.0, 1.0).astype(np.float32)
    return ResidualOutput(residual=residual, enhanced=enhanced)
