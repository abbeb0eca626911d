import json
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

from residtrain.datagen import generate_dataset


def write_png(path, arr):
    Image.fromarray(arr.astype(np.uint8), "RGB").save(path)


def make_synthetic_scene(scene_dir, seed=0, size=64):
    """Hand-built scene directory, no imaging CLI involved."""
    scene_dir = Path(scene_dir)
    scene_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    z1 = rng.integers(0, 80, (size, size, 3))
    for i, gain in enumerate((1.0, 3.2, 9.5), start=1):
        write_png(scene_dir / f"exp_{i}.png", np.clip(z1 * gain, 0, 255))
    for ratio, gain in ((4.0, 3.0), (16.0, 9.0)):
        write_png(scene_dir / f"virtual_{ratio:g}.png", np.clip(z1 * gain, 0, 255))
    (scene_dir / "exposures.json").write_text(
        json.dumps({"exposure_times": [1.0, 4.0, 16.0]})
    )
    return scene_dir


@pytest.fixture(scope="session")
def train_scenes(tmp_path_factory):
    """Eight 96x96 rendered scenes with noisy short exposures."""
    root = tmp_path_factory.mktemp("train_scenes")
    return generate_dataset(root, 8, seed0=0, size=96, noise_read=2.5)


@pytest.fixture(scope="session")
def small_scenes(tmp_path_factory):
    """Six 64x64 scenes for the convergence experiments."""
    root = tmp_path_factory.mktemp("small_scenes")
    return generate_dataset(root, 6, seed0=50, size=64, noise_read=2.5)
