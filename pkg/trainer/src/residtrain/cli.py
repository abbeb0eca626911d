"""Trainer command line: data preparation, training, weight export,
parity fixtures, and the batch-norm comparison."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .config import TrainConfig
from .data import TripletDataset, load_codes
from .datagen import generate_dataset
from .export import export_weights, numpy_forward, read_weights, write_fixture_dump
from .train import train, write_curve_csv


def scene_dirs(data_dir):
    dirs = sorted(p for p in Path(data_dir).iterdir() if p.is_dir())
    if not dirs:
        raise SystemExit(f"no scene directories under {data_dir}")
    return dirs


def cfg_from_args(args) -> TrainConfig:
    return TrainConfig(
        depth=args.depth,
        width=args.width,
        batch_size=args.batch_size,
        learning_rate=args.lr,
        color_weight=args.color_weight,
        nu=args.nu,
        bn_enabled=not args.no_bn,
        iterations=args.iterations,
        seed=args.seed,
        patch_size=args.patch_size,
        weight_on=args.weight_on,
    )


def add_train_flags(p, iterations=1500):
    p.add_argument("--depth", type=int, default=8)
    p.add_argument("--width", type=int, default=64)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--lr", type=float, default=1e-4)
    p.add_argument("--color-weight", type=float, default=2.0)
    p.add_argument("--nu", type=float, default=6.0)
    p.add_argument("--no-bn", action="store_true")
    p.add_argument("--iterations", type=int, default=iterations)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--patch-size", type=int, default=64)
    p.add_argument("--weight-on", choices=["zi", "z1"], default="zi")


def cmd_prepare_data(args) -> int:
    dirs = generate_dataset(
        args.out_dir,
        args.scenes,
        seed0=args.seed0,
        size=args.size,
        noise_read=args.noise_read,
        noise_shot=args.noise_shot,
        crf_gamma=args.crf_gamma,
    )
    print(f"prepared {len(dirs)} scenes under {args.out_dir}")
    return 0


def cmd_train(args) -> int:
    cfg = cfg_from_args(args)
    dataset = TripletDataset(
        scene_dirs(args.data_dir),
        ratio=args.ratio,
        patch_size=cfg.patch_size,
        seed=cfg.seed,
    )
    target = "direct" if args.baseline else "residual"
    model, log = train(dataset, cfg, target=target)
    tag = args.tag or f"x{args.ratio:g}"
    export_weights(model, args.out, tag)
    if args.curve:
        write_curve_csv(log, args.curve)
    print(f"trained {target} model ({cfg.depth}x{cfg.width}), "
          f"final loss {log[-1][1]:.1f}, wrote {args.out}")
    return 0


def cmd_fixtures(args) -> int:
    """Briefly train small nets and emit cross-component parity fixtures."""
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    dirs = scene_dirs(args.data_dir)
    input_png = Path(dirs[0]) / "exp_1.png"
    (out / "input.png").write_bytes(input_png.read_bytes())
    img = load_codes(out / "input.png") / 255.0

    for ratio in args.ratios:
        tag = f"x{ratio:g}"
        cfg = TrainConfig(
            depth=args.depth,
            width=args.width,
            batch_size=8,
            iterations=args.iterations,
            seed=args.seed,
            patch_size=32,
        )
        dataset = TripletDataset(dirs, ratio=ratio, patch_size=32, seed=cfg.seed)
        model, _ = train(dataset, cfg)
        export_weights(model, out / f"weights_{tag}.bin", tag)
        layers, _ = read_weights(out / f"weights_{tag}.bin")
        residual = numpy_forward(layers, img.astype(np.float32))
        write_fixture_dump(residual, out / f"expected_{tag}.lfx")
        print(f"fixture {tag}: weights + expected residual written")
    print(f"parity fixtures in {out}")
    return 0


def cmd_bn_compare(args) -> int:
    """Same seed with and without batch norm; log both, plot both."""
    dataset_args = dict(ratio=args.ratio, patch_size=args.patch_size, seed=args.seed)
    curves = {}
    for bn in (True, False):
        cfg = TrainConfig(
            depth=args.depth,
            width=args.width,
            batch_size=args.batch_size,
            iterations=args.iterations,
            seed=args.seed,
            bn_enabled=bn,
            patch_size=args.patch_size,
        )
        dataset = TripletDataset(scene_dirs(args.data_dir), **dataset_args)
        _, log = train(dataset, cfg)
        label = "bn" if bn else "no_bn"
        curves[label] = log
        write_curve_csv(log, Path(args.out_dir) / f"curve_{label}.csv")

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 4))
    for label, log in curves.items():
        ax.plot([r[0] for r in log], [r[1] for r in log], label=label)
    ax.set_xlabel("iteration")
    ax.set_ylabel("loss")
    ax.set_yscale("log")
    ax.legend()
    fig.tight_layout()
    plot_path = Path(args.out_dir) / "bn_compare.png"
    fig.savefig(plot_path, dpi=120)
    print(f"wrote {plot_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="residtrain",
        description="Train the residual enhancement networks and export weights.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare-data", help="synthesize triplet scene directories")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--scenes", type=int, default=12)
    p.add_argument("--seed0", type=int, default=0)
    p.add_argument("--size", type=int, default=96)
    p.add_argument("--noise-read", type=float, default=2.5)
    p.add_argument("--noise-shot", type=float, default=0.0)
    p.add_argument("--crf-gamma", type=float, default=2.2)
    p.set_defaults(func=cmd_prepare_data)

    p = sub.add_parser("train", help="train one exposure's network")
    p.add_argument("--data-dir", required=True)
    p.add_argument("--ratio", type=float, required=True)
    p.add_argument("--tag", help="exposure tag for the weight file (default x<ratio>)")
    p.add_argument("--baseline", action="store_true",
                   help="direct-mapping target instead of the residual")
    p.add_argument("--out", required=True)
    p.add_argument("--curve", help="write the loss curve CSV here")
    add_train_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("fixtures", help="emit cross-component parity fixtures")
    p.add_argument("--data-dir", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--ratios", type=float, nargs="+", default=[4.0, 16.0])
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--width", type=int, default=8)
    p.add_argument("--iterations", type=int, default=40)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_fixtures)

    p = sub.add_parser("bn-compare", help="train with and without batch norm")
    p.add_argument("--data-dir", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--ratio", type=float, default=4.0)
    p.add_argument("--depth", type=int, default=5)
    p.add_argument("--width", type=int, default=16)
    p.add_argument("--batch-size", type=int, default=8)
    p.add_argument("--iterations", type=int, default=300)
    p.add_argument("--patch-size", type=int, default=48)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_bn_compare)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
