"""Triplet datasets: (dark input, initial virtual, ground truth) patches.

A scene directory is produced by the imaging CLI and contains the
rendered stack (exp_1.png is the noisy short exposure, the longer
renders are the ground truths), the exposure sidecar, and the initial
virtual exposures (virtual_4.png / virtual_16.png).  Patches are served
in code units with mirror + random-crop augmentation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

SIDECAR_NAME = "exposures.json"


def load_codes(path) -> np.ndarray:
    """Image file -> float32 (H, W, 3) in code units."""
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"), dtype=np.float32)


@dataclass
class Triplet:
    z1: np.ndarray
    zi: np.ndarray
    zti: np.ndarray


def load_scene(scene_dir, ratio: float) -> Triplet:
    scene_dir = Path(scene_dir)
    sidecar = json.loads((scene_dir / SIDECAR_NAME).read_text())
    times = [float(t) for t in sidecar["exposure_times"]]
    if float(ratio) not in times:
        raise ValueError(f"{scene_dir}: no exposure at ratio {ratio} in {times}")
    truth_idx = times.index(float(ratio)) + 1
    z1 = load_codes(scene_dir / "exp_1.png")
    zi = load_codes(scene_dir / f"virtual_{ratio:g}.png")
    zti = load_codes(scene_dir / f"exp_{truth_idx}.png")
    if z1.shape != zi.shape or z1.shape != zti.shape:
        raise ValueError(f"{scene_dir}: triplet images differ in size")
    return Triplet(z1=z1, zi=zi, zti=zti)


class TripletDataset:
    """Random aligned patches over a set of scene directories."""

    def __init__(self, scene_dirs, ratio: float, patch_size: int = 64,
                 augment: bool = True, seed: int = 0):
        if not scene_dirs:
            raise ValueError("empty dataset: no scene directories")
        self.triplets = [load_scene(d, ratio) for d in scene_dirs]
        self.patch_size = patch_size
        self.augment = augment
        self.rng = np.random.default_rng(seed)
        for t in self.triplets:
            h, w = t.z1.shape[:2]
            if h < patch_size or w < patch_size:
                raise ValueError(
                    f"scene {h}x{w} smaller than patch size {patch_size}"
                )

    def __len__(self):
        return len(self.triplets)

    def sample_batch(self, batch_size: int):
        """Returns (z1, zi, zti) float32 arrays of shape (B, 3, P, P)."""
        p = self.patch_size
        out = [np.empty((batch_size, 3, p, p), dtype=np.float32) for _ in range(3)]
        for b in range(batch_size):
            t = self.triplets[self.rng.integers(len(self.triplets))]
            h, w = t.z1.shape[:2]
            y = int(self.rng.integers(h - p + 1))
            x = int(self.rng.integers(w - p + 1))
            flip_h = self.augment and self.rng.random() < 0.5
            flip_v = self.augment and self.rng.random() < 0.5
            for j, img in enumerate((t.z1, t.zi, t.zti)):
                patch = img[y : y + p, x : x + p]
                if flip_h:
                    patch = patch[:, ::-1]
                if flip_v:
                    patch = patch[::-1]
                out[j][b] = np.moveaxis(patch, 2, 0)
        return tuple(out)
