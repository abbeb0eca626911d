#!/usr/bin/env python3
"""Noise-weight ablation: loss curves with and without the adaptive
restoration weight, same seed, plotted together.
"""

import argparse
import sys
from pathlib import Path

from residtrain import TrainConfig, TripletDataset, train
from residtrain.datagen import generate_dataset
from residtrain.train import loss_variability, write_curve_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--data-dir", default="ablation_data")
    ap.add_argument("--out-dir", default="weight_ablation_out")
    ap.add_argument("--scenes", type=int, default=8)
    ap.add_argument("--iterations", type=int, default=600)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    data_dir = Path(args.data_dir)
    if not data_dir.exists():
        generate_dataset(data_dir, args.scenes, seed0=0, size=96, noise_read=2.5)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    dirs = sorted(p for p in data_dir.iterdir() if p.is_dir())

    curves = {}
    for label, nu in (("weighted", 6.0), ("unweighted", 1e-9)):
        cfg = TrainConfig(depth=4, width=16, batch_size=8, iterations=args.iterations,
                          seed=args.seed, patch_size=48, nu=nu)
        ds = TripletDataset(dirs, ratio=4.0, patch_size=48, seed=args.seed)
        _, log = train(ds, cfg)
        curves[label] = log
        write_curve_csv(log, out / f"curve_{label}.csv")
        print(f"{label}: trailing loss variability "
              f"{loss_variability(log, window=100):.4f}")

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 4))
    for label, log in curves.items():
        ax.plot([r[0] for r in log], [r[1] for r in log], label=label, alpha=0.8)
    ax.set_xlabel("iteration")
    ax.set_ylabel("loss")
    ax.set_yscale("log")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out / "weight_compare.png", dpi=120)
    print(f"wrote {out / 'weight_compare.png'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
