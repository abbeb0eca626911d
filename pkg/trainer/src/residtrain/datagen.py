"""Synthetic training data via the imaging package's CLI.

The trainer talks to the imaging side only through its command line and
file formats: `stack synth` renders a noisy-short-exposure stack (the
longer renders are the ground truths) and `virtual` produces the initial
virtual exposures that the network learns to correct.
"""

from __future__ import annotations

import subprocess
import sys
from pathlib import Path

IMAGING_CLI = [sys.executable, "-m", "brightfuse.cli"]


def run_imaging_cli(args, cli=None):
    cmd = [str(c) for c in (cli or IMAGING_CLI) + list(args)]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(
            f"imaging CLI failed ({proc.returncode}): {' '.join(cmd)}\n{proc.stderr}"
        )
    return proc.stdout


def generate_scene(
    scene_dir,
    seed: int,
    size: int = 96,
    noise_read: float = 2.5,
    noise_shot: float = 0.0,
    crf_gamma: float = 2.2,
    ratios=(4.0, 16.0),
    cli=None,
) -> Path:
    """One scene directory: stack renders, sidecar, and initial virtuals."""
    scene_dir = Path(scene_dir)
    run_imaging_cli(
        [
            "stack", "synth",
            "--random-scene", seed,
            "--size", size, size,
            "--crf-gamma", crf_gamma,
            "--noise-read", noise_read,
            "--noise-shot", noise_shot,
            "--seed", seed,
            "--out-dir", scene_dir,
        ],
        cli,
    )
    for ratio in ratios:
        run_imaging_cli(
            [
                "virtual",
                "--input", scene_dir / "exp_1.png",
                "--crf-gamma", crf_gamma,
                "--ratio", ratio,
                "--out", scene_dir / f"virtual_{ratio:g}.png",
            ],
            cli,
        )
    return scene_dir


def generate_dataset(
    out_root,
    n_scenes: int,
    seed0: int = 0,
    **scene_kwargs,
) -> list:
    out_root = Path(out_root)
    out_root.mkdir(parents=True, exist_ok=True)
    dirs = []
    for i in range(n_scenes):
        seed = seed0 + i
        dirs.append(generate_scene(out_root / f"scene_{seed:04d}", seed, **scene_kwargs))
    return dirs
