"""Evaluation metrics.

Image quality (PSNR / SSIM), monocular-style depth accuracy, per-plane
recall under a joint mask-IoU + depth-error criterion, and clustering
agreement for plane segmentations (VI / RI / SC).
"""

from __future__ import annotations

import numpy as np
from scipy.signal import convolve2d

from .core import Camera, DepthMap
from .errors import DimensionMismatch, EmptyMask, ImageTooSmall, NoOverlap
from .geometry import plane_depth_map, plane_to_camera

PSNR_CAP = 99.0
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_C1 = 0.01**2
SSIM_C2 = 0.03**2


def psnr(pred, gt, mask=None):
    """Peak signal-to-noise ratio in dB on unit-range images, capped at 99."""
    pred = np.asarray(pred, dtype=float)
    gt = np.asarray(gt, dtype=float)
    if pred.shape != gt.shape:
        raise DimensionMismatch(f"{pred.shape} vs {gt.shape}")
    err = (pred - gt) ** 2
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if not mask.any():
            raise EmptyMask("mask selects no pixels")
        err = err[mask]
    mse = float(err.mean())
    if mse <= 0.0:
        return PSNR_CAP
    return min(PSNR_CAP, 10.0 * np.log10(1.0 / mse))


def _luma(img):
    img = np.asarray(img, dtype=float)
    if img.ndim == 2:
        return img
    return img @ np.array([0.299, 0.587, 0.114])


def _gaussian_window(size=SSIM_WINDOW, sigma=SSIM_SIGMA):
    r = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(r**2) / (2.0 * sigma**2))
    k = np.outer(g, g)
    return k / k.sum()


def ssim(pred, gt):
    """Mean local SSIM over valid 11x11 Gaussian windows (sigma 1.5), unit range."""
    x = _luma(pred)
    y = _luma(gt)
    if x.shape != y.shape:
        raise DimensionMismatch(f"{x.shape} vs {y.shape}")
    if min(x.shape) < SSIM_WINDOW:
        raise ImageTooSmall(f"{x.shape} smaller than {SSIM_WINDOW}px window")
    w = _gaussian_window()
    mu_x = convolve2d(x, w, mode="valid")
    mu_y = convolve2d(y, w, mode="valid")
    xx = convolve2d(x * x, w, mode="valid") - mu_x**2
    yy = convolve2d(y * y, w, mode="valid") - mu_y**2
    xy = convolve2d(x * y, w, mode="valid") - mu_x * mu_y
    num = (2 * mu_x * mu_y + SSIM_C1) * (2 * xy + SSIM_C2)
    den = (mu_x**2 + mu_y**2 + SSIM_C1) * (xx + yy + SSIM_C2)
    return float((num / den).mean())


def depth_metrics(pred: DepthMap, gt: DepthMap):
    """rel / log10 / rmse errors plus the delta < 1.25^k accuracy fractions."""
    sel = pred.valid & gt.valid
    if not sel.any():
        raise NoOverlap("no pixel is valid in both maps")
    p = pred.depth[sel]
    g = gt.depth[sel]
    ratio = np.maximum(p / g, g / p)
    return {
        "rel": float(np.mean(np.abs(p - g) / g)),
        "log": float(np.mean(np.abs(np.log10(p) - np.log10(g)))),
        "rmse": float(np.sqrt(np.mean((p - g) ** 2))),
        "a1": float(np.mean(ratio < 1.25)),
        "a2": float(np.mean(ratio < 1.25**2)),
        "a3": float(np.mean(ratio < 1.25**3)),
    }


def _iou(a, b):
    union = np.logical_or(a, b).sum()
    if union == 0:
        return 0.0
    return np.logical_and(a, b).sum() / union


def plane_recall(pred, gt, camera: Camera, depth_err_thresholds, iou_threshold=0.5):
    """Per-plane recall curve over depth-error thresholds at mask IoU >= 0.5.

    pred / gt: lists of (mask, world-frame Plane).  Matching is greedy
    one-to-one by descending IoU; a matched GT plane counts as recalled at
    threshold tau when the mean absolute plane-depth difference over the
    mask intersection is <= tau.
    """
    if len(gt) == 0:
        return [1.0 for _ in depth_err_thresholds]
    pairs = []
    for ip, (pm, _) in enumerate(pred):
        for ig, (gm, _) in enumerate(gt):
            iou = _iou(pm, gm)
            if iou >= iou_threshold:
                pairs.append((iou, ip, ig))
    pairs.sort(key=lambda t: (-t[0], t[1], t[2]))

    used_p, used_g = set(), set()
    errors = {}
    for iou, ip, ig in pairs:
        if ip in used_p or ig in used_g:
            continue
        used_p.add(ip)
        used_g.add(ig)
        pm, pplane = pred[ip]
        gm, gplane = gt[ig]
        inter = np.logical_and(pm, gm)
        dp, _ = plane_depth_map(plane_to_camera(pplane, camera), camera)
        dg, _ = plane_depth_map(plane_to_camera(gplane, camera), camera)
        with np.errstate(invalid="ignore"):  # inf - inf where both invisible
            diff = np.abs(dp - dg)[inter]
        diff = diff[np.isfinite(diff)]
        errors[ig] = float(diff.mean()) if diff.size else np.inf

    return [
        sum(1 for e in errors.values() if e <= tau) / len(gt)
        for tau in depth_err_thresholds
    ]


def segmentation_metrics(pred_labels, gt_labels):
    """Variation of Information, Rand Index and Segmentation Covering.

    Computed from the label contingency table; invariant to label ids.
    VI uses natural logarithms.
    """
    p = np.asarray(pred_labels).ravel()
    g = np.asarray(gt_labels).ravel()
    if p.shape != g.shape:
        raise DimensionMismatch(f"{p.shape} vs {g.shape}")
    n = p.size

    _, p_idx = np.unique(p, return_inverse=True)
    _, g_idx = np.unique(g, return_inverse=True)
    np_lab = p_idx.max() + 1
    ng_lab = g_idx.max() + 1
    contingency = np.zeros((np_lab, ng_lab))
    np.add.at(contingency, (p_idx, g_idx), 1.0)

    a = contingency.sum(axis=1)  # pred cluster sizes
    b = contingency.sum(axis=0)  # gt cluster sizes

    def entropy(sizes):
        q = sizes[sizes > 0] / n
        return float(-(q * np.log(q)).sum())

    r = contingency / n
    pq = np.outer(a / n, b / n)
    nz = r > 0
    mutual = float((r[nz] * np.log(r[nz] / pq[nz])).sum())
    vi = entropy(a) + entropy(b) - 2.0 * mutual

    def c2(x):
        return x * (x - 1) / 2.0

    total_pairs = c2(float(n))
    same_both = c2(contingency).sum()
    same_p = c2(a).sum()
    same_g = c2(b).sum()
    ri = 1.0 if total_pairs == 0 else (total_pairs + 2 * same_both - same_p - same_g) / total_pairs

    inter = contingency
    union = a[:, None] + b[None, :] - inter
    with np.errstate(divide="ignore", invalid="ignore"):
        iou = np.where(union > 0, inter / union, 0.0)
    sc = float(((b / n) * iou.max(axis=0)).sum())

    return {"VI": max(vi, 0.0), "RI": float(ri), "SC": sc}
