import struct

import numpy as np
import pytest

from brightfuse import virtgen
from brightfuse.crf import Crf, Imf, map_codes
from brightfuse.edgefilter import BaseDetail


def pack_weight_file(layers, tag="x4", version=1, magic=b"LFW1", trailing=b""):
    """Serialize (kernel, bias, prelu) triples in the weight binary layout."""
    buf = bytearray()
    buf += magic
    buf += struct.pack("<I", version)
    tag_bytes = tag.encode("utf-8")
    buf += struct.pack("<B", len(tag_bytes)) + tag_bytes
    buf += struct.pack("<I", len(layers))
    for kernel, bias, prelu in layers:
        kernel = np.asarray(kernel, dtype="<f4")
        out_ch, in_ch, kh, kw = kernel.shape
        buf += struct.pack("<IIIIB", out_ch, in_ch, kh, kw, 0 if prelu is None else 1)
        buf += kernel.tobytes()
        buf += np.asarray(bias, dtype="<f4").tobytes()
        if prelu is not None:
            buf += np.asarray(prelu, dtype="<f4").tobytes()
    return bytes(buf) + trailing


def identity_layer(channels=3):
    """3x3 delta kernel passing each channel through unchanged."""
    kernel = np.zeros((channels, channels, 3, 3), dtype=np.float32)
    for c in range(channels):
        kernel[c, c, 1, 1] = 1.0
    return kernel, np.zeros(channels, dtype=np.float32), None


def random_monotone_tables(rng, lo=-8.0, span=8.0, jitter=1.0):
    """Random strictly increasing 3x256 log-irradiance tables.

    jitter controls step-size spread; small values give smooth tables
    like real response curves, 1.0 gives deliberately jagged ones.
    """
    steps = rng.uniform(0.01, 0.01 + jitter, size=(3, 256))
    t = np.cumsum(steps, axis=1)
    t = t - t[:, :1]
    t = lo + span * t / t[:, -1:]
    return t


def random_monotone_crf(rng):
    return Crf(tables=random_monotone_tables(rng))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def brute_force_gamma(z1, bd, imf, mask, cfg, lo=1.0, hi=64.0, step=1e-4):
    """Grid search over the base-layer gain; independent of the closed form."""
    codes = z1.astype(np.float64) * 255.0
    base = bd.base.astype(np.float64) * 255.0
    detail = bd.detail.astype(np.float64) * 255.0
    w_list, b_list, d_list = [], [], []
    for ch in range(3):
        z = codes[:, :, ch][mask]
        w_list.append(virtgen.reliability_weight(z, cfg))
        b_list.append(base[:, :, ch][mask])
        d_list.append(map_codes(imf, z, ch) - detail[:, :, ch][mask])
    w = np.concatenate(w_list)
    b = np.concatenate(b_list)
    d = np.concatenate(d_list)
    grid = np.arange(lo, hi + step, step)
    best_g, best_sse = lo, np.inf
    for start in range(0, grid.size, 65536):
        chunk = grid[start : start + 65536]
        resid = d[None, :] - chunk[:, None] * b[None, :]
        sse = (w[None, :] * resid * resid).sum(axis=1)
        i = int(np.argmin(sse))
        if sse[i] < best_sse:
            best_sse, best_g = float(sse[i]), float(chunk[i])
    return best_g


def make_case2_instance(rng, n_pixels=8, gamma_true=None):
    """Random under-exposed strip with one usable channel per pixel."""
    if gamma_true is None:
        gamma_true = rng.uniform(1.5, 50.0)
    h, w = 1, n_pixels
    z1 = np.zeros((h, w, 3), dtype=np.float32)
    base = np.zeros((h, w, 3), dtype=np.float32)
    detail = np.zeros((h, w, 3), dtype=np.float32)
    lut = np.tile(np.arange(256, dtype=np.float64), (3, 1))
    for x in range(w):
        usable = rng.integers(0, 3)
        for ch in range(3):
            if ch == usable:
                code = rng.uniform(8.0, 200.0)
                b = rng.uniform(2.0, 30.0)
                e = rng.uniform(-5.0, 5.0)
                target = np.clip(gamma_true * b + e + rng.normal(0, 2.0), 0, 255)
                z1[0, x, ch] = code / 255.0
                base[0, x, ch] = b / 255.0
                detail[0, x, ch] = e / 255.0
                lut[ch, int(round(code))] = target
            else:
                z1[0, x, ch] = rng.uniform(0.0, 4.0) / 255.0
                base[0, x, ch] = rng.uniform(0.0, 4.0) / 255.0
    imf = Imf(lut=lut, ratio=4.0)
    bd = BaseDetail(base=base, detail=detail)
    mask = np.ones((h, w), dtype=bool)
    return z1, bd, imf, mask
