"""S-MPI rendering.

Per-pixel back-to-front ordering (planes may intersect, so the compositing
order can differ pixel to pixel), alpha compositing of color and depth, and
novel-view rendering by plane transform + inverse homography warp.  A
standard fronto-parallel MPI fast path is provided as an independent
implementation for cross-checking.

The per-pixel sort/blend and the bilinear warp run through smpi.kernels
(compiled extension when built, numpy fallback otherwise).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import SMPI, Camera, DepthMap, ImageBuffer
from .errors import DegeneratePlane, DimensionMismatch, NonMonotoneDepths
from .geometry import EPS_DENOM, _k_inv, plane_homography, plane_to_camera

# Pixels whose accumulated compositing weight falls below this are marked
# invalid in rendered depth maps.
CONF_MIN = 1e-3


@dataclass(frozen=True)
class PixelOrdering:
    """Back-to-front proxy permutation per pixel plus the depth stack behind it.

    order: (H, W, N) proxy indices, depth descending; invisible proxies
    (depth -inf in depth_stack) sort last and must composite with zero alpha.
    """

    order: np.ndarray
    depth_stack: np.ndarray


def _pixel_rays(camera: Camera):
    H, W = camera.resolution
    uu, vv = np.meshgrid(np.arange(W, dtype=float), np.arange(H, dtype=float))
    return np.stack([uu, vv, np.ones_like(uu)], axis=-1) @ _k_inv(camera.intrinsics).T


def proxy_depth_stack(smpi: SMPI, camera: Camera):
    """Per-proxy plane depths in `camera`'s frame, stacked (H, W, N).

    Returns (depth_stack, visible); invisible entries hold -inf so a
    depth-descending sort pushes them last.
    """
    rays = _pixel_rays(camera)
    n = len(smpi.proxies)
    H, W = camera.resolution
    depth_stack = np.empty((H, W, n))
    visible = np.empty((H, W, n), dtype=bool)
    for i, proxy in enumerate(smpi.proxies):
        plane_cam = plane_to_camera(proxy.plane, camera)
        denom = rays @ plane_cam.normal
        with np.errstate(divide="ignore", invalid="ignore"):
            d = plane_cam.offset / denom
        vis = (np.abs(denom) > EPS_DENOM) & (d > 0.0)
        depth_stack[..., i] = np.where(vis, d, -np.inf)
        visible[..., i] = vis
    return depth_stack, visible


def compute_ordering(smpi: SMPI, camera: Camera) -> PixelOrdering:
    """Sort proxies back-to-front independently at every pixel.

    Ties break by ascending proxy index; invisible proxies go last.
    """
    depth_stack, _ = proxy_depth_stack(smpi, camera)
    return _ordering_from_stack(depth_stack)


def _ordering_from_stack(depth_stack) -> PixelOrdering:
    order = np.argsort(-depth_stack, axis=-1, kind="stable").astype(np.int32)
    return PixelOrdering(order=order, depth_stack=depth_stack)


def _run_kernel(colors, alphas, ordering: PixelOrdering):
    colors = np.ascontiguousarray(colors, dtype=np.float64)
    alphas = np.ascontiguousarray(alphas, dtype=np.float64)
    order = np.ascontiguousarray(ordering.order, dtype=np.int32)
    if colors.shape[0] != alphas.shape[0] or colors.shape[0] != order.shape[-1]:
        raise DimensionMismatch(
            f"{colors.shape[0]} color layers, {alphas.shape[0]} alpha layers, "
            f"ordering over {order.shape[-1]}"
        )
    if colors.shape[1:3] != order.shape[:2] or alphas.shape[1:3] != order.shape[:2]:
        raise DimensionMismatch(
            f"layer rasters {alphas.shape[1:]} vs ordering raster {order.shape[:2]}"
        )
    # depth rearranged into slot order so the kernel indexes it positionally
    depth_sorted = np.take_along_axis(ordering.depth_stack, order.astype(np.int64), axis=-1)
    depth_sorted = np.ascontiguousarray(depth_sorted, dtype=np.float64)
    return kernels.composite_layers(colors, alphas, order, depth_sorted)


def composite(colors, alphas, ordering: PixelOrdering) -> ImageBuffer:
    """Alpha-composite per-proxy RGBa layers in the per-pixel order.

    colors: (N, H, W, 3); alphas: (N, H, W).  The confidence channel stores
    the accumulated compositing weight per pixel.
    """
    image, conf, _ = _run_kernel(colors, alphas, ordering)
    return ImageBuffer(pixels=image, confidence=conf)


def render_depth(smpi: SMPI, camera: Camera) -> DepthMap:
    """Soft depth map: per-proxy plane depths blended with compositing weights."""
    depth_stack, visible = proxy_depth_stack(smpi, camera)
    ordering = _ordering_from_stack(depth_stack)
    alphas = np.stack([p.alpha for p in smpi.proxies], axis=0)
    alphas = alphas * np.transpose(visible, (2, 0, 1))
    colors = np.zeros(alphas.shape + (3,))
    _, conf, depth = _run_kernel(colors, alphas, ordering)
    return DepthMap(np.where(conf >= CONF_MIN, depth, 0.0))


def warp_bilinear(color, alpha, hom_matrix, out_shape):
    """Inverse-warp an RGBa raster through a target->source homography.

    Samples falling outside the source canvas contribute nothing (color 0,
    alpha 0), which is what makes confidence-based view merging meaningful.
    """
    color = np.ascontiguousarray(color, dtype=np.float64)
    alpha = np.ascontiguousarray(alpha, dtype=np.float64)
    hom = np.ascontiguousarray(hom_matrix, dtype=np.float64)
    return kernels.warp_bilinear(color, alpha, hom, out_shape[0], out_shape[1])


def warp_layers(smpi: SMPI, target_camera: Camera):
    """Warp every proxy's RGBa layer from the reference view into the target view.

    Returns (colors (N,H,W,3), alphas (N,H,W)); degenerate proxies (plane
    through the target optical center) come back fully transparent.
    """
    Ht, Wt = target_camera.resolution
    ref = smpi.reference_camera
    colors = []
    alphas = []
    for proxy in smpi.proxies:
        plane_t = plane_to_camera(proxy.plane, target_camera)
        try:
            hom = plane_homography(plane_t, src_camera=ref, tgt_camera=target_camera)
        except DegeneratePlane:
            colors.append(np.zeros((Ht, Wt, 3)))
            alphas.append(np.zeros((Ht, Wt)))
            continue
        c, a = warp_bilinear(proxy.color, proxy.alpha, hom.matrix, (Ht, Wt))
        colors.append(c)
        alphas.append(a)
    return np.stack(colors, axis=0), np.stack(alphas, axis=0)


def render_novel_view(smpi: SMPI, target_camera: Camera):
    """Render the S-MPI into a target view.

    Pipeline: transform each plane into the target frame, inverse-homography
    warp its RGBa layer, re-derive the per-pixel ordering in the target
    frame, then composite color and depth.  Returns (ImageBuffer, DepthMap).
    """
    colors, alphas = warp_layers(smpi, target_camera)
    depth_stack, visible = proxy_depth_stack(smpi, target_camera)
    ordering = _ordering_from_stack(depth_stack)
    alphas = alphas * np.transpose(visible, (2, 0, 1))
    image, conf, depth = _run_kernel(colors, alphas, ordering)
    return (
        ImageBuffer(pixels=image, confidence=conf),
        DepthMap(np.where(conf >= CONF_MIN, depth, 0.0)),
    )


def render_standard_mpi(layers, camera: Camera, target: Camera) -> ImageBuffer:
    """Render a classic fronto-parallel MPI; independent of the S-MPI path.

    layers: list of (color (H,W,3), alpha (H,W), offset) with offsets
    strictly increasing.  The global back-to-front order is simply the
    reversed layer list, composited with the sequential over operator.
    """
    offsets = [d for _, _, d in layers]
    if any(b <= a for a, b in zip(offsets, offsets[1:])):
        raise NonMonotoneDepths(f"offsets not strictly increasing: {offsets}")

    Ht, Wt = target.resolution
    R, t = target.relative_to(camera)  # target frame -> source frame
    Ks = np.array([[camera.fx, 0, camera.cx], [0, camera.fy, camera.cy], [0, 0, 1.0]])
    Kt_inv = np.array(
        [
            [1.0 / target.fx, 0, -target.cx / target.fx],
            [0, 1.0 / target.fy, -target.cy / target.fy],
            [0, 0, 1.0],
        ]
    )
    uu, vv = np.meshgrid(np.arange(Wt, dtype=float), np.arange(Ht, dtype=float))
    rays = np.stack([uu, vv, np.ones_like(uu)], axis=-1) @ Kt_inv.T

    out = np.zeros((Ht, Wt, 3))
    conf = np.zeros((Ht, Wt))
    n_src = np.array([0.0, 0.0, 1.0])
    for color, alpha, d_src in reversed(layers):
        # plane (n_z, d) of the source frame expressed in the target frame
        n_t = R.T @ n_src
        d_t = d_src - float(n_src @ t)
        if abs(d_t) <= 1e-6:
            continue
        hom = Ks @ (R + np.outer(t, n_t) / d_t) @ Kt_inv
        c, a = warp_bilinear(color, alpha, hom, (Ht, Wt))
        denom = rays @ n_t
        with np.errstate(divide="ignore", invalid="ignore"):
            front = d_t / denom > 0
        a = np.where((np.abs(denom) > EPS_DENOM) & front, a, 0.0)
        out = out * (1.0 - a[..., None]) + c * a[..., None]
        conf = conf * (1.0 - a) + a
    return ImageBuffer(pixels=out, confidence=conf)
