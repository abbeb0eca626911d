"""Command-line surface for the brightening pipeline.

Subcommands: brighten, virtual, fuse, mefssim, decompose, crf estimate,
stack synth, stack validate.  Exit codes are stable: 0 success, 2 usage,
3 I/O, 4 format/schema, 5 numeric/degenerate input.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import crf as crfmod
from . import meffuse, mefssim, residnet, synth, virtgen
from .edgefilter import DEFAULT_LAMBDA, DEFAULT_RADIUS, wgif_decompose
from .errors import BrightfuseError, SchemaError, UsageError
from .imgcore import (
    ExposureStack,
    load_image,
    load_stack,
    save_png,
    save_stack,
    to_float,
    to_u8,
)

log = logging.getLogger("brightfuse")


def _add_wgif_flags(p):
    p.add_argument("--wgif-radius", type=int, default=DEFAULT_RADIUS)
    p.add_argument("--wgif-lambda", type=float, default=DEFAULT_LAMBDA)


def _add_threshold_flags(p):
    p.add_argument("--xi-low", type=float, default=5.0, help="under-exposure code threshold")
    p.add_argument("--xi-high", type=float, default=60.0, help="full-reliability code threshold")


def _crf_from_args(args) -> crfmod.Crf:
    if getattr(args, "crf_gamma", None) is not None:
        return crfmod.make_gamma_crf(args.crf_gamma)
    if args.crf is None:
        raise UsageError("a CRF is required: pass --crf FILE or --crf-gamma G")
    return crfmod.load_crf(args.crf)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="brightfuse",
        description="Brighten a single dark sRGB image via virtual exposures "
        "and multi-scale exposure fusion.",
    )
    parser.add_argument("--threads", type=int, default=0,
                        help="worker threads, 0 = auto (advisory; numpy runs vectorized)")
    parser.add_argument("--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("brighten", help="full pipeline: virtual exposures + fusion")
    p.add_argument("--input", required=True)
    p.add_argument("--crf")
    p.add_argument("--crf-gamma", type=float, help="use a synthetic gamma response instead of --crf")
    p.add_argument("--weights-x4", help="residual network weights for the 4x exposure")
    p.add_argument("--weights-x16", help="residual network weights for the 16x exposure")
    p.add_argument("--no-cnn", action="store_true", help="skip residual enhancement")
    p.add_argument("--ratios", type=float, nargs=2, default=[4.0, 16.0],
                   metavar=("R2", "R3"))
    _add_threshold_flags(p)
    _add_wgif_flags(p)
    p.add_argument("--psi1", choices=["on", "off"], default="on",
                   help="highlight protection weight for the input image")
    p.add_argument("--levels", type=int, help="pyramid depth (default: auto)")
    p.add_argument("--emit-intermediates", metavar="DIR",
                   help="write virtual images, enhanced images, and weight maps here")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_brighten)

    p = sub.add_parser("virtual", help="generate one initial virtual exposure")
    p.add_argument("--input", required=True)
    p.add_argument("--crf")
    p.add_argument("--crf-gamma", type=float)
    p.add_argument("--ratio", type=float, required=True)
    _add_threshold_flags(p)
    _add_wgif_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_virtual)

    p = sub.add_parser("fuse", help="fuse three images with pipeline weights")
    p.add_argument("--inputs", nargs=3, required=True,
                   metavar=("Z1", "Z2", "Z3"),
                   help="first input is the dark image for highlight protection")
    p.add_argument("--psi1", choices=["on", "off"], default="on")
    p.add_argument("--levels", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("mefssim", help="score a fused image against its stack")
    p.add_argument("--stack", nargs="+", required=True)
    p.add_argument("--fused", required=True)
    p.set_defaults(func=cmd_mefssim)

    p = sub.add_parser("decompose", help="write base/detail layers for inspection")
    p.add_argument("--input", required=True)
    _add_wgif_flags(p)
    p.add_argument("--out-base", required=True)
    p.add_argument("--out-detail", required=True)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("crf", help="camera response tooling")
    crf_sub = p.add_subparsers(dest="crf_command", required=True)
    pe = crf_sub.add_parser("estimate", help="estimate a CRF from an exposure stack")
    pe.add_argument("--stack-dir", help="directory with PNGs and exposures.json")
    pe.add_argument("--images", nargs="+", help="explicit image paths")
    pe.add_argument("--times", type=float, nargs="+", help="exposure times for --images")
    pe.add_argument("--lambda-smooth", type=float, default=50.0)
    pe.add_argument("--samples", type=int, default=200)
    pe.add_argument("--seed", type=int, default=0)
    pe.add_argument("--out", required=True)
    pe.set_defaults(func=cmd_crf_estimate)

    p = sub.add_parser("stack", help="exposure stack tooling")
    stack_sub = p.add_subparsers(dest="stack_command", required=True)
    ps = stack_sub.add_parser("synth", help="render a stack from a radiance map")
    ps.add_argument("--radiance", help=".npy radiance map; omit for a seeded random scene")
    ps.add_argument("--random-scene", type=int, metavar="SEED",
                    help="render a built-in random scene with this seed")
    ps.add_argument("--size", type=int, nargs=2, default=[96, 96], metavar=("H", "W"))
    ps.add_argument("--crf")
    ps.add_argument("--crf-gamma", type=float)
    ps.add_argument("--ratios", type=float, nargs="+", default=[1.0, 4.0, 16.0])
    ps.add_argument("--noise-read", type=float, default=0.0,
                    help="read-noise std in codes, shortest exposure only")
    ps.add_argument("--noise-shot", type=float, default=0.0,
                    help="shot-noise scale: std = sqrt(read^2 + shot^2*code)")
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--prefix", default="exp")
    ps.add_argument("--out-dir", required=True)
    ps.set_defaults(func=cmd_stack_synth)
    pv = stack_sub.add_parser("validate", help="check a stack directory")
    pv.add_argument("--dir", required=True)
    pv.set_defaults(func=cmd_stack_validate)

    return parser


def _load_float(path) -> np.ndarray:
    return to_float(load_image(path))


def _check_weight_tag(weights, ratio, flag):
    expected = f"x{ratio:g}"
    if weights.exposure_tag != expected:
        raise UsageError(
            f"{flag}: weight file is tagged {weights.exposure_tag!r} but the "
            f"pipeline ratio needs {expected!r}"
        )


def run_brighten_pipeline(args):
    """Shared by cmd_brighten and tests; returns the fused float image."""
    z1 = _load_float(args.input)
    crf = _crf_from_args(args)
    cfg = virtgen.VirtGenConfig(
        xi_low=args.xi_low, xi_high=args.xi_high, ratios=tuple(args.ratios)
    )
    weight_paths = {args.ratios[0]: args.weights_x4, args.ratios[1]: args.weights_x16}
    nets = {}
    if not args.no_cnn:
        for ratio, path in weight_paths.items():
            if path is None:
                continue
            net = residnet.load_weights(path)
            flag = "--weights-x4" if path == args.weights_x4 else "--weights-x16"
            _check_weight_tag(net, ratio, flag)
            nets[ratio] = net

    bd = wgif_decompose(z1, radius=args.wgif_radius, lambda_reg=args.wgif_lambda)
    virtuals = []
    enhanced = []
    for ratio in args.ratios:
        v = virtgen.generate_virtual(z1, crf, ratio, cfg, bd=bd)
        v = to_float(to_u8(v))  # virtual exposures are 8-bit images
        virtuals.append(v)
        if ratio in nets:
            e = residnet.enhance(nets[ratio], z1, v).enhanced
            e = to_float(to_u8(e))
            enhanced.append(e)
        else:
            enhanced.append(v)

    fuse_cfg = meffuse.FusionConfig(
        psi1_enabled=args.psi1 == "on", levels=getattr(args, "levels", None)
    )
    weights = meffuse.build_weights(z1, enhanced[0], enhanced[1], fuse_cfg)
    fused = meffuse.fuse([z1, enhanced[0], enhanced[1]], weights, fuse_cfg)

    if args.emit_intermediates:
        outdir = Path(args.emit_intermediates)
        outdir.mkdir(parents=True, exist_ok=True)
        for i, (v, e) in enumerate(zip(virtuals, enhanced), start=2):
            save_png(to_u8(v), outdir / f"virtual_{i}.png")
            save_png(to_u8(e), outdir / f"enhanced_{i}.png")
        for i, wmap in enumerate(weights.maps, start=1):
            save_png(to_u8(wmap), outdir / f"weight_{i}.png")
    return fused


def cmd_brighten(args) -> int:
    fused = run_brighten_pipeline(args)
    save_png(to_u8(fused), args.out)
    log.info("wrote %s", args.out)
    return 0


def cmd_virtual(args) -> int:
    z1 = _load_float(args.input)
    crf = _crf_from_args(args)
    cfg = virtgen.VirtGenConfig(xi_low=args.xi_low, xi_high=args.xi_high)
    v = virtgen.generate_virtual(
        z1, crf, args.ratio, cfg,
        wgif_radius=args.wgif_radius, wgif_lambda=args.wgif_lambda,
    )
    save_png(to_u8(v), args.out)
    return 0


def cmd_fuse(args) -> int:
    imgs = [_load_float(p) for p in args.inputs]
    cfg = meffuse.FusionConfig(psi1_enabled=args.psi1 == "on", levels=args.levels)
    weights = meffuse.build_weights(imgs[0], imgs[1], imgs[2], cfg)
    fused = meffuse.fuse(imgs, weights, cfg)
    save_png(to_u8(fused), args.out)
    return 0


def cmd_mefssim(args) -> int:
    stack = [_load_float(p) for p in args.stack]
    fused = _load_float(args.fused)
    score = mefssim.mef_ssim(stack, fused)
    print(f"mefssim={score:.4f}")
    return 0


def cmd_decompose(args) -> int:
    img = _load_float(args.input)
    bd = wgif_decompose(img, radius=args.wgif_radius, lambda_reg=args.wgif_lambda)
    save_png(to_u8(bd.base), args.out_base)
    save_png(to_u8(bd.detail + 0.5), args.out_detail)
    return 0


def cmd_crf_estimate(args) -> int:
    if args.stack_dir:
        stack = load_stack(args.stack_dir)
    elif args.images and args.times:
        if len(args.images) != len(args.times):
            raise UsageError("--images and --times must have the same length")
        stack = ExposureStack(
            images=[load_image(p) for p in args.images], times=args.times
        )
    else:
        raise UsageError("pass --stack-dir or both --images and --times")
    est = crfmod.estimate_crf(
        stack, lambda_smooth=args.lambda_smooth, samples=args.samples, seed=args.seed
    )
    crfmod.save_crf(est, args.out)
    log.info("wrote %s", args.out)
    return 0


def cmd_stack_synth(args) -> int:
    if args.radiance:
        radiance = synth.load_radiance(args.radiance)
    elif args.random_scene is not None:
        radiance = synth.random_radiance(args.random_scene, *args.size)
    else:
        raise UsageError("pass --radiance FILE or --random-scene SEED")
    crf = _crf_from_args(args)
    stack = synth.render_stack(
        radiance,
        crf,
        times=args.ratios,
        noise_read=args.noise_read,
        noise_shot=args.noise_shot,
        seed=args.seed,
    )
    save_stack(stack, args.out_dir, prefix=args.prefix)
    log.info("wrote %d exposures to %s", len(stack.images), args.out_dir)
    return 0


def cmd_stack_validate(args) -> int:
    stack = load_stack(args.dir)
    stack.validate()
    if len(set(stack.times)) != len(stack.times):
        raise SchemaError("exposure times are not distinct")
    h, w = stack.images[0].shape[:2]
    print(f"ok: {len(stack.images)} exposures, {w}x{h}, times={stack.times}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except BrightfuseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
