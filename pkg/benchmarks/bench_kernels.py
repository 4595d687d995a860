"""Benchmark the compiled kernels against the numpy fallback.

Times the two hot paths (per-pixel compositing and inverse bilinear warp)
plus a full 12-proxy novel-view render at 256x384, for both backends.

Usage: python benchmarks/bench_kernels.py [--frames N] [--proxies N]
"""

import argparse
import importlib
import sys
import time

import numpy as np


def _timeit(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _inputs(rng, n, h, w):
    colors = rng.random((n, h, w, 3))
    alphas = rng.random((n, h, w))
    depth = rng.random((h, w, n)) * 5 + 0.5
    order = np.argsort(-depth, axis=-1, kind="stable").astype(np.int32)
    depth_sorted = np.ascontiguousarray(np.take_along_axis(depth, order.astype(np.int64), -1))
    hom = np.array([[1.0, 0.01, 2.0], [0.0, 1.0, -1.0], [0.0, 1e-4, 1.0]])
    return colors, alphas, order, depth_sorted, hom


def bench_backend(module_name, label, args):
    kern = importlib.import_module(module_name)
    rng = np.random.default_rng(0)
    h, w = 256, 384
    colors, alphas, order, depth_sorted, hom = _inputs(rng, args.proxies, h, w)

    t_comp = _timeit(lambda: kern.composite_layers(colors, alphas, order, depth_sorted),
                     args.frames)
    t_warp = _timeit(lambda: kern.warp_bilinear(colors[0], alphas[0], hom, h, w),
                     args.frames)
    print(f"{label:>8}  composite {t_comp * 1e3:7.2f} ms   "
          f"warp {t_warp * 1e3:7.2f} ms/layer")
    return t_comp, t_warp


def bench_full_render(args):
    from smpi import kernels
    from smpi.core import Camera
    from smpi.render import render_novel_view

    sys.path.insert(0, "tests")
    from conftest import random_smpi

    rng = np.random.default_rng(1)
    smpi = random_smpi(rng, args.proxies, (256, 384))
    cam = smpi.reference_camera
    tgt = Camera(cam.fx, cam.fy, cam.cx, cam.cy, np.eye(3),
                 np.array([0.05, 0.0, 0.0]), cam.resolution)
    render_novel_view(smpi, tgt)  # warm-up
    t = _timeit(lambda: render_novel_view(smpi, tgt), args.frames)
    print(f"\nfull render ({kernels.BACKEND} backend, {args.proxies} proxies, "
          f"256x384): {t * 1e3:.1f} ms/frame = {1.0 / t:.1f} FPS")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--frames", type=int, default=5, help="timing repeats")
    parser.add_argument("--proxies", type=int, default=12)
    args = parser.parse_args()

    try:
        bench_backend("smpi._kernels", "cython", args)
    except ImportError:
        print("  cython  (extension not built)")
    bench_backend("smpi._kernels_py", "python", args)
    bench_full_render(args)


if __name__ == "__main__":
    main()
