"""Hot rendering kernels, pure-numpy fallback.

Reference implementation of the kernel contract; used when the compiled
extension is unavailable or SMPI_FORCE_PYTHON is set.
"""

import numpy as np


def composite_layers(colors, alphas, order, depths):
    """Blend N layers per pixel in the given back-to-front order.

    colors: (N, H, W, 3); alphas: (N, H, W); order: (H, W, N) proxy indices
    back-to-front; depths: (H, W, N) slot-ordered per-proxy depth, non-finite
    entries skipped in the depth blend.  Returns (image, confidence, depth).
    """
    order_nhw = np.ascontiguousarray(np.transpose(order, (2, 0, 1)).astype(np.int64))
    a_sorted = np.take_along_axis(alphas, order_nhw, axis=0)
    c_sorted = np.take_along_axis(colors, order_nhw[..., None], axis=0)
    d_sorted = np.transpose(depths, (2, 0, 1))
    d_sorted = np.where(np.isfinite(d_sorted), d_sorted, 0.0)

    # transmittance in front of slot k: product of (1 - a) over slots > k
    one_minus = 1.0 - a_sorted
    trans = np.cumprod(one_minus[::-1], axis=0)[::-1]
    trans = np.concatenate([trans[1:], np.ones_like(trans[:1])], axis=0)

    weights = a_sorted * trans
    image = np.einsum("nhw,nhwc->hwc", weights, c_sorted)
    conf = weights.sum(axis=0)
    depth = (weights * d_sorted).sum(axis=0)
    return image, conf, depth


def warp_bilinear(color, alpha, hom, out_h, out_w):
    """Inverse-warp an RGBa raster: sample the source at H q_t, bilinearly.

    Taps falling outside the source canvas contribute nothing, so fully
    off-canvas samples come back transparent.
    """
    Hs, Ws = alpha.shape
    uu, vv = np.meshgrid(np.arange(out_w, dtype=float), np.arange(out_h, dtype=float))
    q = np.stack([uu, vv, np.ones_like(uu)], axis=-1) @ np.asarray(hom).T
    with np.errstate(divide="ignore", invalid="ignore"):
        x = q[..., 0] / q[..., 2]
        y = q[..., 1] / q[..., 2]
    ok = (np.abs(q[..., 2]) >= 1e-12) & np.isfinite(x) & np.isfinite(y)
    x = np.where(ok, x, -2.0)
    y = np.where(ok, y, -2.0)

    x0 = np.floor(x)
    y0 = np.floor(y)
    fx = x - x0
    fy = y - y0

    out_c = np.zeros((out_h, out_w, 3))
    out_a = np.zeros((out_h, out_w))
    for dx, dy, w in (
        (0, 0, (1 - fx) * (1 - fy)),
        (1, 0, fx * (1 - fy)),
        (0, 1, (1 - fx) * fy),
        (1, 1, fx * fy),
    ):
        xi = (x0 + dx).astype(np.int64)
        yi = (y0 + dy).astype(np.int64)
        inb = (xi >= 0) & (xi < Ws) & (yi >= 0) & (yi < Hs) & ok
        w = np.where(inb, w, 0.0)
        xi = np.clip(xi, 0, Ws - 1)
        yi = np.clip(yi, 0, Hs - 1)
        out_c += w[..., None] * color[yi, xi]
        out_a += w * alpha[yi, xi]
    return out_c, out_a
