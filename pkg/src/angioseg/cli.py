"""Command line interface.

``angioseg run`` processes a frame or a sequence directory end to end and
writes masks, overlays, and a metrics summary.  ``angioseg phantom``
renders synthetic sequences with ground truth that the run command can
consume like real data.

Exit codes: 0 success, 2 unreadable input, 3 configuration error.
"""

import argparse
import os
import sys

import numpy as np

from . import io, phantom
from ._backend import BACKEND
from .config import ConfigError, PipelineConfig, load_config, serialize_config
from .pipeline import process_frames

FRAME_EXTENSIONS = (".pgm", ".png")


def _list_frames(path):
    if os.path.isfile(path):
        return [path]
    if os.path.isdir(path):
        names = sorted(n for n in os.listdir(path)
                       if n.lower().endswith(FRAME_EXTENSIONS)
                       and not n.startswith("gt_"))
        return [os.path.join(path, n) for n in names]
    raise FileNotFoundError(path)


def _load_ground_truth(gt_dir, index):
    def maybe(name):
        p = os.path.join(gt_dir, name % index)
        return io.read_mask(p) if os.path.isfile(p) else None
    return (maybe("gt_vessel_%03d.pgm"), maybe("gt_centerline_%03d.pgm"),
            maybe("gt_catheter_%03d.pgm"))


def _run(args):
    if args.config:
        try:
            cfg = load_config(args.config)
        except FileNotFoundError:
            print(f"error: config file not found: {args.config}", file=sys.stderr)
            return 3
        except ConfigError as exc:
            print(f"error: {args.config}: {exc}", file=sys.stderr)
            return 3
    else:
        cfg = PipelineConfig()

    try:
        paths = _list_frames(args.input)
        if not paths:
            raise FileNotFoundError(f"no frames in {args.input}")
        images = [io.read_image(p) for p in paths]
    except (FileNotFoundError, ValueError, OSError) as exc:
        print(f"error: cannot read input: {exc}", file=sys.stderr)
        return 2

    result = process_frames(images, cfg,
                            catheter_enabled=False if args.no_catheter else None)
    for w in result.warnings:
        print(f"warning: {w}", file=sys.stderr)

    os.makedirs(args.out, exist_ok=True)
    lines = [f"frames {len(result.frames)}", f"backend {BACKEND}"]
    dices = []
    precisions = []
    for frame in result.frames:
        i = frame.index
        io.write_mask(os.path.join(args.out, f"artery_{i:03d}.pgm"), frame.artery_mask)
        io.write_mask(os.path.join(args.out, f"centerline_{i:03d}.pgm"),
                      frame.centerline_mask)
        if frame.catheter_mask is not None:
            io.write_mask(os.path.join(args.out, f"catheter_{i:03d}.pgm"),
                          frame.catheter_mask)
        io.write_overlay(os.path.join(args.out, f"overlay_{i:03d}.png"),
                         frame.preprocessed.i_ce, arteries=frame.artery_mask,
                         catheter=frame.catheter_mask,
                         centerline=frame.centerline_mask)
        if args.debug_artifacts:
            pre = frame.preprocessed
            io.write_image(os.path.join(args.out, f"debug_ice_{i:03d}.pgm"), pre.i_ce)
            io.write_image(os.path.join(args.out, f"debug_iv_{i:03d}.pgm"), pre.i_v)
            io.write_image(os.path.join(args.out, f"debug_smoothed_{i:03d}.pgm"),
                           pre.smoothed)
            io.write_mask(os.path.join(args.out, f"debug_ridge_low_{i:03d}.pgm"),
                          pre.ridges.low)
            io.write_mask(os.path.join(args.out, f"debug_voted_{i:03d}.pgm"),
                          frame.segmentation.voted_mask)
            for si, m in enumerate(frame.segmentation.initial_masks):
                io.write_mask(os.path.join(args.out, f"debug_initial_{i:03d}_s{si}.pgm"), m)
            from .segment import scale_cluster_count
            from .superpix import SlicParams, boundary_mask, slic
            lm = slic(pre.i_ce, SlicParams(
                k=scale_cluster_count(cfg.superpixel_ks[0], pre.i_ce.shape),
                m=cfg.slic_m, max_iter=cfg.slic_max_iter,
                conv_tol=cfg.slic_conv_tol))
            io.write_overlay(os.path.join(args.out, f"debug_superpixels_{i:03d}.png"),
                             pre.i_ce, arteries=boundary_mask(lm.labels))

        entry = f"frame {i:03d}"
        if frame.tracking_lost:
            entry += " tracking_lost"
        if args.ground_truth:
            gt_vessel, gt_center, gt_cath = _load_ground_truth(args.ground_truth, i)
            if gt_vessel is not None:
                d = phantom.dice(frame.artery_mask, gt_vessel)
                dices.append(d)
                entry += f" dice {d:.4f}"
            if gt_center is not None:
                cov = phantom.coverage_within(gt_center, frame.centerline_mask, 2.0)
                entry += f" centerline_coverage {cov:.4f}"
            if gt_cath is not None and result.catheter_states:
                p = phantom.catheter_precision(result.catheter_states[i].poly, gt_cath)
                precisions.append(p)
                entry += f" catheter_precision {p:.4f}"
        lines.append(entry)
    if dices:
        lines.append(f"mean_dice {float(np.mean(dices)):.4f}")
    if precisions:
        lines.append(f"mean_catheter_precision {float(np.mean(precisions)):.4f}")
    with open(os.path.join(args.out, "metrics.txt"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    print("\n".join(lines))
    return 0


def _phantom(args):
    if args.spec:
        try:
            spec = phantom.load_phantom_spec(args.spec)
        except FileNotFoundError:
            print(f"error: spec file not found: {args.spec}", file=sys.stderr)
            return 2
        except phantom.PhantomSpecError as exc:
            print(f"error: {args.spec}: {exc}", file=sys.stderr)
            return 3
        if args.seed is not None:
            from dataclasses import replace
            spec = replace(spec, seed=args.seed)
    elif args.preset == "catheter":
        spec = phantom.catheter_suite_spec(args.seed or 0, size=args.size)
    else:
        spec = phantom.standard_suite_spec(args.seed or 0, size=args.size)

    frames = phantom.generate(spec, n_frames=args.frames)
    os.makedirs(args.out, exist_ok=True)
    for i, (img, gt) in enumerate(frames):
        io.write_image(os.path.join(args.out, f"frame_{i:03d}.pgm"), img)
        io.write_mask(os.path.join(args.out, f"gt_vessel_{i:03d}.pgm"), gt.vessel_mask)
        io.write_mask(os.path.join(args.out, f"gt_centerline_{i:03d}.pgm"),
                      gt.centerline_mask)
        if gt.catheter_mask is not None:
            io.write_mask(os.path.join(args.out, f"gt_catheter_{i:03d}.pgm"),
                          gt.catheter_mask)
    print(f"wrote {len(frames)} frame(s) to {args.out}")
    return 0


def _dump_config(args):
    sys.stdout.write(serialize_config(PipelineConfig()))
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="angioseg",
        description="Coronary artery segmentation, catheter tracking, and "
                    "centerline extraction for X-ray angiograms.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="process a frame or sequence directory")
    run_p.add_argument("--config", help="pipeline config file (key=value lines)")
    run_p.add_argument("--input", required=True,
                       help="frame file or directory of PGM/PNG frames")
    run_p.add_argument("--out", required=True, help="output directory")
    run_p.add_argument("--no-catheter", action="store_true",
                       help="disable catheter detection/tracking")
    run_p.add_argument("--ground-truth",
                       help="directory with gt_*.pgm masks for metrics")
    run_p.add_argument("--debug-artifacts", action="store_true",
                       help="write intermediate images and per-scale masks")
    run_p.set_defaults(func=_run)

    ph_p = sub.add_parser("phantom", help="render a synthetic phantom sequence")
    ph_p.add_argument("--spec", help="phantom spec file (key=value lines)")
    ph_p.add_argument("--preset", choices=("standard", "catheter"),
                      default="standard", help="built-in phantom when no spec given")
    ph_p.add_argument("--frames", type=int, default=1)
    ph_p.add_argument("--seed", type=int, default=None)
    ph_p.add_argument("--size", type=int, default=512)
    ph_p.add_argument("--out", required=True)
    ph_p.set_defaults(func=_phantom)

    cfg_p = sub.add_parser("default-config",
                           help="print the default configuration")
    cfg_p.set_defaults(func=_dump_config)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
