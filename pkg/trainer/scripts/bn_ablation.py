#!/usr/bin/env python3
"""Batch-norm ablation: same seed with and without BN, plotted together.

Prepares a dataset through the imaging CLI if --data-dir does not exist
yet, then delegates to the trainer's bn-compare command.
"""

import argparse
import sys
from pathlib import Path

from residtrain.cli import main as cli_main
from residtrain.datagen import generate_dataset


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--data-dir", default="ablation_data")
    ap.add_argument("--out-dir", default="bn_ablation_out")
    ap.add_argument("--scenes", type=int, default=8)
    ap.add_argument("--iterations", type=int, default=600)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    data_dir = Path(args.data_dir)
    if not data_dir.exists():
        generate_dataset(data_dir, args.scenes, seed0=0, size=96, noise_read=2.5)
    Path(args.out_dir).mkdir(parents=True, exist_ok=True)
    return cli_main([
        "bn-compare",
        "--data-dir", str(data_dir),
        "--out-dir", str(args.out_dir),
        "--iterations", str(args.iterations),
        "--seed", str(args.seed),
    ])


if __name__ == "__main__":
    sys.exit(main())
