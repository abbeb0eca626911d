"""Weight export: fold batch norms, serialize, verify by re-reading.

Binary layout (little-endian), shared contract with the inference side:
magic "LFW1", u32 version=1, u8 tag length + UTF-8 exposure tag, u32
layer count; per layer u32 out/in/kH/kW, u8 has_prelu, then kernel f32s
row-major [out][in][kH][kW], bias f32s, PReLU slope f32s iff has_prelu.

Fixture dumps ("LFX1") carry raw float images: magic, u32 H, u32 W,
u32 C, then f32 data.
"""

from __future__ import annotations

import os
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch.nn as nn

WEIGHT_MAGIC = b"LFW1"
WEIGHT_VERSION = 1
FIXTURE_MAGIC = b"LFX1"


@dataclass
class FlatLayer:
    kernel: np.ndarray  # [out, in, kH, kW] float32
    bias: np.ndarray  # [out]
    prelu: np.ndarray | None  # [out] or None on the final layer


def _fold(conv: nn.Conv2d, bn: nn.BatchNorm2d | None) -> tuple:
    kernel = conv.weight.detach().cpu().numpy().astype(np.float32)
    bias = (
        conv.bias.detach().cpu().numpy().astype(np.float32)
        if conv.bias is not None
        else np.zeros(kernel.shape[0], dtype=np.float32)
    )
    if bn is None:
        return kernel, bias
    gamma = bn.weight.detach().cpu().numpy().astype(np.float64)
    beta = bn.bias.detach().cpu().numpy().astype(np.float64)
    mean = bn.running_mean.detach().cpu().numpy().astype(np.float64)
    var = bn.running_var.detach().cpu().numpy().astype(np.float64)
    scale = gamma / np.sqrt(var + bn.eps)
    kernel = (kernel.astype(np.float64) * scale[:, None, None, None]).astype(np.float32)
    bias = ((bias.astype(np.float64) - mean) * scale + beta).astype(np.float32)
    return kernel, bias


def flatten_model(model: nn.Module) -> list:
    """Walk conv(+bn)(+prelu) groups into flat layers, folding the norms."""
    mods = [m for m in model.modules() if isinstance(m, (nn.Conv2d, nn.BatchNorm2d, nn.PReLU))]
    layers: list[FlatLayer] = []
    i = 0
    while i < len(mods):
        conv = mods[i]
        if not isinstance(conv, nn.Conv2d):
            raise ValueError(f"expected a conv at position {i}, got {type(conv).__name__}")
        i += 1
        bn = None
        if i < len(mods) and isinstance(mods[i], nn.BatchNorm2d):
            bn = mods[i]
            i += 1
        prelu = None
        if i < len(mods) and isinstance(mods[i], nn.PReLU):
            slopes = mods[i].weight.detach().cpu().numpy().astype(np.float32)
            out_ch = conv.weight.shape[0]
            prelu = np.broadcast_to(slopes, (out_ch,)).astype(np.float32)
            i += 1
        kernel, bias = _fold(conv, bn)
        layers.append(FlatLayer(kernel=kernel, bias=bias, prelu=prelu))
    if not layers:
        raise ValueError("model contains no convolutions")
    if layers[-1].prelu is not None:
        raise ValueError("final layer must not carry an activation")
    return layers


def serialize(layers: list, exposure_tag: str) -> bytes:
    tag = exposure_tag.encode("utf-8")
    buf = bytearray()
    buf += WEIGHT_MAGIC
    buf += struct.pack("<I", WEIGHT_VERSION)
    buf += struct.pack("<B", len(tag)) + tag
    buf += struct.pack("<I", len(layers))
    for layer in layers:
        out_ch, in_ch, kh, kw = layer.kernel.shape
        buf += struct.pack("<IIIIB", out_ch, in_ch, kh, kw, 0 if layer.prelu is None else 1)
        buf += layer.kernel.astype("<f4").tobytes()
        buf += layer.bias.astype("<f4").tobytes()
        if layer.prelu is not None:
            buf += layer.prelu.astype("<f4").tobytes()
    return bytes(buf)


def read_weights(path) -> tuple:
    """Re-read an exported file; returns (layers, tag).  Validation side."""
    data = Path(path).read_bytes()
    off = 0

    def take(n):
        nonlocal off
        if off + n > len(data):
            raise ValueError(f"{path}: truncated")
        chunk = data[off : off + n]
        off += n
        return chunk

    if take(4) != WEIGHT_MAGIC:
        raise ValueError(f"{path}: bad magic")
    (version,) = struct.unpack("<I", take(4))
    if version != WEIGHT_VERSION:
        raise ValueError(f"{path}: unsupported version {version}")
    (tag_len,) = struct.unpack("<B", take(1))
    tag = take(tag_len).decode("utf-8")
    (count,) = struct.unpack("<I", take(4))
    layers = []
    for _ in range(count):
        out_ch, in_ch, kh, kw = struct.unpack("<IIII", take(16))
        (has_prelu,) = struct.unpack("<B", take(1))
        kernel = np.frombuffer(take(4 * out_ch * in_ch * kh * kw), dtype="<f4")
        kernel = kernel.reshape(out_ch, in_ch, kh, kw).copy()
        bias = np.frombuffer(take(4 * out_ch), dtype="<f4").copy()
        prelu = np.frombuffer(take(4 * out_ch), dtype="<f4").copy() if has_prelu else None
        layers.append(FlatLayer(kernel=kernel, bias=bias, prelu=prelu))
    if off != len(data):
        raise ValueError(f"{path}: trailing bytes")
    return layers, tag


def validate_chain(layers: list) -> None:
    prev = 3
    for i, layer in enumerate(layers):
        out_ch, in_ch, kh, kw = layer.kernel.shape
        if in_ch != prev:
            raise ValueError(f"layer {i}: in_ch {in_ch} != previous out {prev}")
        if (kh, kw) != (3, 3):
            raise ValueError(f"layer {i}: kernel {kh}x{kw}, expected 3x3")
        prev = out_ch
    if prev != 3:
        raise ValueError(f"final layer produces {prev} channels, expected 3")


def export_weights(model: nn.Module, path, exposure_tag: str) -> None:
    """Fold, serialize, write atomically, and verify the written file."""
    model.eval()
    layers = flatten_model(model)
    validate_chain(layers)
    blob = serialize(layers, exposure_tag)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(blob)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    reread, tag = read_weights(path)
    validate_chain(reread)
    if tag != exposure_tag:
        raise ValueError(f"verify failed: tag {tag!r} != {exposure_tag!r}")


def numpy_forward(layers: list, img: np.ndarray) -> np.ndarray:
    """Reference forward pass on flat layers (reflect padding, float32).

    Used to sanity-check folding independently of torch.
    """
    x = np.ascontiguousarray(img, dtype=np.float32)
    for layer in layers:
        h, w, _ = x.shape
        out_ch = layer.kernel.shape[0]
        padded = np.pad(x, ((1, 1), (1, 1), (0, 0)), mode="reflect")
        acc = np.broadcast_to(layer.bias, (h, w, out_ch)).astype(np.float32).copy()
        for dy in range(3):
            for dx in range(3):
                acc += padded[dy : dy + h, dx : dx + w] @ layer.kernel[:, :, dy, dx].T
        x = acc if layer.prelu is None else np.where(acc >= 0, acc, layer.prelu * acc)
        x = x.astype(np.float32)
    return x


def write_fixture_dump(arr: np.ndarray, path) -> None:
    """Raw float image dump with the 16-byte LFX1 header."""
    arr = np.ascontiguousarray(arr, dtype="<f4")
    h, w, c = arr.shape
    Path(path).write_bytes(struct.pack("<4sIII", FIXTURE_MAGIC, h, w, c) + arr.tobytes())


def read_fixture_dump(path) -> np.ndarray:
    data = Path(path).read_bytes()
    magic, h, w, c = struct.unpack("<4sIII", data[:16])
    if magic != FIXTURE_MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    arr = np.frombuffer(data[16:], dtype="<f4")
    if arr.size != h * w * c:
        raise ValueError(f"{path}: payload size mismatch")
    return arr.reshape(h, w, c)
