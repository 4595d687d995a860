"""Command-line front end: synth / build / render / merge / eval.

Reports are line-oriented `key value` text so golden tests can diff them.
Exit codes: 0 success, 2 usage error, 1 data error.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from . import builder, fusion, io, metrics, render
from .core import ImageBuffer
from .errors import SMPIError, UnknownScene

DEFAULT_RESOLUTION = (256, 384)  # (H, W)
PLANE_RECALL_TAUS = [round(0.05 * k, 2) for k in range(13)]  # 0.0 .. 0.6


def _write_report(path, lines):
    text = "\n".join(lines) + "\n"
    if path:
        with open(path, "w") as f:
            f.write(text)
    sys.stdout.write(text)


def cmd_synth(args):
    gt, smpi = builder.synth_scene(args.scene, seed=args.seed,
                                   resolution=(args.height, args.width))
    os.makedirs(args.out, exist_ok=True)
    io.save_image(gt.image, os.path.join(args.out, "image.png"))
    io.save_depth(gt.depth, os.path.join(args.out, "depth.npy"))
    for i, mask in enumerate(gt.plane_masks):
        io.save_image(np.repeat(mask[..., None], 3, axis=-1).astype(float),
                      os.path.join(args.out, f"mask_{i:03d}.png"))
    io.save_trajectory([gt.camera], os.path.join(args.out, "camera.txt"))
    io.save_smpi(smpi, os.path.join(args.out, "smpi"))
    print(f"scene {args.scene} planes {len(smpi)} out {args.out}")
    return 0


def cmd_build(args):
    image = io.load_image(args.image)
    depth = io.load_depth(args.depth)
    masks = [np.asarray(io.load_image(p)[..., 0] > 0.5) for p in args.masks]
    cameras = io.load_trajectory(args.camera, resolution=image.shape[:2])
    gt = builder.SceneGT(image=image, depth=depth, plane_masks=masks, camera=cameras[0])
    smpi = builder.build_smpi(gt, nonplanar_layers=args.nonplanar_layers)
    io.save_smpi(smpi, args.out)
    print(f"num_planar {smpi.num_planar}")
    print(f"num_nonplanar {smpi.num_nonplanar}")
    for i, (_, rms) in enumerate(builder.fit_planar_proxies(gt)):
        print(f"residual_{i} {rms:.9g}")
    return 0


def cmd_render(args):
    smpi = io.load_smpi(args.smpi)
    resolution = (args.height, args.width) if args.height and args.width else DEFAULT_RESOLUTION
    cameras = io.load_trajectory(args.trajectory, resolution=resolution)
    os.makedirs(args.out, exist_ok=True)
    t0 = time.perf_counter()
    for i, cam in enumerate(cameras):
        image, depth = render.render_novel_view(smpi, cam)
        io.save_image(image.pixels, os.path.join(args.out, f"frame_{i:04d}.png"))
        np.save(os.path.join(args.out, f"frame_{i:04d}.conf.npy"), image.confidence)
        if args.depth:
            io.save_depth(depth, os.path.join(args.out, f"depth_{i:04d}.png"))
    dt = time.perf_counter() - t0
    fps = len(cameras) / dt if dt > 0 else float("inf")
    print(f"frames {len(cameras)} seconds {dt:.3f} fps {fps:.1f}")
    return 0


def cmd_merge(args):
    renders = []
    for path in args.renders:
        pixels = io.load_image(path)
        conf_path = path[:-4] + ".conf.npy" if path.endswith(".png") else path + ".conf.npy"
        if not os.path.exists(conf_path):
            raise SMPIError(f"missing confidence sidecar {conf_path}")
        renders.append(ImageBuffer(pixels=pixels, confidence=np.load(conf_path)))
    merged, holes = fusion.merge_views(renders)
    io.save_image(merged.pixels, args.out)
    np.save(args.out[:-4] + ".conf.npy" if args.out.endswith(".png") else args.out + ".conf.npy",
            merged.confidence)
    print(f"holes {int(holes.sum())}")
    return 0


def _load_labels(path):
    from PIL import Image

    return np.asarray(Image.open(path).convert("L"))


def cmd_eval(args):
    lines = []
    if args.kind == "image":
        pred = io.load_image(args.pred)
        gt = io.load_image(args.gt)
        lines.append(f"psnr {metrics.psnr(pred, gt):.9g}")
        lines.append(f"ssim {metrics.ssim(pred, gt):.9g}")
    elif args.kind == "depth":
        rec = metrics.depth_metrics(io.load_depth(args.pred), io.load_depth(args.gt))
        for key in ("rel", "log", "rmse", "a1", "a2", "a3"):
            lines.append(f"{key} {rec[key]:.9g}")
    elif args.kind == "planes":
        pred_smpi = io.load_smpi(args.pred)
        gt_smpi = io.load_smpi(args.gt)
        pred_pl = [(p.mask, p.plane) for p in pred_smpi.proxies]
        gt_pl = [(p.mask, p.plane) for p in gt_smpi.proxies]
        recall = metrics.plane_recall(pred_pl, gt_pl, gt_smpi.reference_camera,
                                      PLANE_RECALL_TAUS)
        for tau, r in zip(PLANE_RECALL_TAUS, recall):
            lines.append(f"recall@{tau:g} {r:.9g}")
        curve_path = args.curve or (args.report + ".curve" if args.report else None)
        if curve_path:
            with open(curve_path, "w") as f:
                for tau, r in zip(PLANE_RECALL_TAUS, recall):
                    f.write(f"{tau:g} {r:.9g}\n")
    elif args.kind == "seg":
        rec = metrics.segmentation_metrics(_load_labels(args.pred), _load_labels(args.gt))
        for key in ("VI", "RI", "SC"):
            lines.append(f"{key} {rec[key]:.9g}")
    _write_report(args.report, lines)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="smpi", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic scene with exact ground truth")
    p.add_argument("--scene", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--height", type=int, default=96)
    p.add_argument("--width", type=int, default=128)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("build", help="build an S-MPI from image + depth + masks")
    p.add_argument("--image", required=True)
    p.add_argument("--depth", required=True)
    p.add_argument("--masks", nargs="*", default=[])
    p.add_argument("--camera", required=True)
    p.add_argument("--nonplanar-layers", type=int, default=builder.DEFAULT_NONPLANAR_LAYERS)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("render", help="render an S-MPI along a trajectory")
    p.add_argument("--smpi", required=True)
    p.add_argument("--trajectory", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--depth", action="store_true")
    p.add_argument("--height", type=int)
    p.add_argument("--width", type=int)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("merge", help="confidence-weighted merge of rendered views")
    p.add_argument("--renders", nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("eval", help="evaluate predictions against ground truth")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--kind", choices=["image", "depth", "planes", "seg"], required=True)
    p.add_argument("--report")
    p.add_argument("--curve")
    p.set_defaults(func=cmd_eval)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UnknownScene as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except SMPIError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
