#!/usr/bin/env python3
"""Desk-scale evaluation: fused pipeline vs naive gamma brightening.

Synthesizes N scenes, renders 1:4:16 exposure stacks through a gamma-2.2
response, runs the model-driven pipeline on the shortest exposure, and
scores both results against the stack.  Add --weights-x4/--weights-x16 to
score the CNN-enhanced pipeline as a third column.
"""

import argparse
import sys

import numpy as np

from brightfuse import meffuse, mefssim, residnet, virtgen
from brightfuse.crf import make_gamma_crf
from brightfuse.edgefilter import wgif_decompose
from brightfuse.imgcore import to_float, to_u8
from brightfuse.meffuse import FusionConfig
from brightfuse.synth import random_radiance, render_stack


def pipeline(z1, crf, nets=None):
    cfg = virtgen.VirtGenConfig()
    bd = wgif_decompose(z1)
    enhanced = []
    for ratio in cfg.ratios:
        v = to_float(to_u8(virtgen.generate_virtual(z1, crf, ratio, cfg, bd=bd)))
        if nets and ratio in nets:
            v = to_float(to_u8(residnet.enhance(nets[ratio], z1, v).enhanced))
        enhanced.append(v)
    fcfg = FusionConfig()
    wm = meffuse.build_weights(z1, enhanced[0], enhanced[1], fcfg)
    return meffuse.fuse([z1, enhanced[0], enhanced[1]], wm, fcfg)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scenes", type=int, default=10)
    ap.add_argument("--size", type=int, default=96)
    ap.add_argument("--seed0", type=int, default=100)
    ap.add_argument("--noise-read", type=float, default=0.0)
    ap.add_argument("--weights-x4")
    ap.add_argument("--weights-x16")
    args = ap.parse_args()

    crf = make_gamma_crf(2.2)
    nets = {}
    if args.weights_x4:
        nets[4.0] = residnet.load_weights(args.weights_x4)
    if args.weights_x16:
        nets[16.0] = residnet.load_weights(args.weights_x16)

    header = f"{'scene':>6} {'gamma':>8} {'pipeline':>9}"
    if nets:
        header += f" {'with-cnn':>9}"
    print(header)
    wins_pipe = wins_cnn = 0
    for i in range(args.scenes):
        stack = render_stack(
            random_radiance(args.seed0 + i, args.size, args.size),
            crf,
            noise_read=args.noise_read,
            seed=args.seed0 + i,
        )
        floats = [to_float(im) for im in stack.images]
        z1 = floats[0]
        naive = np.power(z1, 1 / 2.2, dtype=np.float32)
        s_naive = mefssim.mef_ssim(floats, naive)
        s_pipe = mefssim.mef_ssim(floats, pipeline(z1, crf))
        row = f"{i:>6} {s_naive:>8.4f} {s_pipe:>9.4f}"
        wins_pipe += int(s_pipe > s_naive)
        if nets:
            s_cnn = mefssim.mef_ssim(floats, pipeline(z1, crf, nets))
            row += f" {s_cnn:>9.4f}"
            wins_cnn += int(s_cnn >= s_pipe)
        print(row)
    print(f"\npipeline > gamma in {wins_pipe}/{args.scenes} scenes")
    if nets:
        print(f"cnn >= pipeline in {wins_cnn}/{args.scenes} scenes")
    return 0


if __name__ == "__main__":
    sys.exit(main())
