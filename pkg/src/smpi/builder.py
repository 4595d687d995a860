"""Oracle S-MPI construction.

Stands in for a learned predictor: fits planes from ground-truth depth and
instance masks, builds RGBa layers, bins the leftover non-planar pixels
into fronto-parallel layers spread uniformly over their depth range, and
generates synthetic scenes with analytically exact ground truth.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .core import (
    SMPI,
    Camera,
    DepthMap,
    Plane,
    Proxy,
    StructureClass,
    normalize_plane,
)
from .errors import DegenerateFit, EmptyScene, UnknownScene
from .geometry import backproject_grid, plane_depth_map, transform_plane

DEFAULT_NONPLANAR_LAYERS = 8
MASK_THRESHOLD = 0.5


@dataclass(frozen=True)
class SceneGT:
    """Ground truth for one view: image, depth, disjoint plane masks, camera."""

    image: np.ndarray  # (H, W, 3)
    depth: DepthMap
    plane_masks: list  # of (H, W) bool
    camera: Camera


def fit_plane(points):
    """Total least-squares plane through >= 3 points.

    Centroid plus smallest scatter eigenvector, canonicalized.  Returns
    (Plane, rms_residual).  Raises DegenerateFit for collinear/coincident
    inputs (two smallest scatter eigenvalues of comparable size).
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    if pts.shape[0] < 3:
        raise DegenerateFit(f"need >= 3 points, got {pts.shape[0]}")
    centroid = pts.mean(axis=0)
    centered = pts - centroid
    scatter = centered.T @ centered
    evals, evecs = np.linalg.eigh(scatter)
    scale = max(evals[2], 1.0)
    if evals[1] <= 1e-12 * scale or evals[0] / max(evals[1], 1e-300) > 0.99:
        raise DegenerateFit("points are collinear or coincident")
    normal = evecs[:, 0]
    plane = normalize_plane(normal, float(normal @ centroid))
    rms = float(np.sqrt(max(evals[0], 0.0) / pts.shape[0]))
    return plane, rms


def _camera_to_world_plane(plane_cam: Plane, camera: Camera) -> Plane:
    R_inv = camera.rotation.T
    t_inv = -R_inv @ camera.translation
    return transform_plane(plane_cam, R_inv, t_inv)


def fit_planar_proxies(gt: SceneGT):
    """Fit one world-frame plane per GT mask; returns list of (plane, rms)."""
    valid = gt.depth.valid
    pts_cam = backproject_grid(gt.camera, gt.depth.depth)
    pts_world = gt.camera.camera_to_world(pts_cam.reshape(-1, 3)).reshape(pts_cam.shape)
    fits = []
    for mask in gt.plane_masks:
        sel = mask & valid
        fits.append(fit_plane(pts_world[sel]))
    return fits


def _feather_alpha(alpha):
    # 3x3 mean filter, zero-padded: one-pixel soft rim around hard masks
    padded = np.pad(alpha, 1, mode="edge")
    out = np.zeros_like(alpha)
    for dy in (0, 1, 2):
        for dx in (0, 1, 2):
            out += padded[dy : dy + alpha.shape[0], dx : dx + alpha.shape[1]]
    return out / 9.0


def build_smpi(
    gt: SceneGT,
    nonplanar_layers: int = DEFAULT_NONPLANAR_LAYERS,
    *,
    mask_threshold: float = MASK_THRESHOLD,
    disparity_bins: bool = False,
    feather: bool = False,
) -> SMPI:
    """Construct an S-MPI from ground truth.

    One planar proxy per GT mask (plane fitted to backprojected pixels,
    alpha = mask), then the residual valid-depth pixels split into
    `nonplanar_layers` fronto-parallel bins spread uniformly over their
    depth range (uniform in disparity instead when disparity_bins is set).
    """
    depth = gt.depth.depth
    valid = gt.depth.valid
    if not valid.any():
        raise EmptyScene("no valid depth pixels")
    H, W = depth.shape

    proxies = []
    covered = np.zeros((H, W), dtype=bool)
    for mask, (plane, _rms) in zip(gt.plane_masks, fit_planar_proxies(gt)):
        sel = mask & valid
        alpha = sel.astype(float)
        if feather:
            alpha = _feather_alpha(alpha)
        proxies.append(
            Proxy(
                plane=plane,
                structure=StructureClass.PLANAR,
                color=gt.image * sel[..., None],
                alpha=alpha,
                mask=alpha >= mask_threshold,
            )
        )
        covered |= sel

    residual = valid & ~covered
    num_nonplanar = 0
    if residual.any():
        if nonplanar_layers < 1:
            raise ValueError("nonplanar_layers must be >= 1")
        d_res = depth[residual]
        lo, hi = float(d_res.min()), float(d_res.max())
        if hi <= lo:
            hi = lo + 1e-9
        if disparity_bins:
            edges = 1.0 / np.linspace(1.0 / hi, 1.0 / lo, nonplanar_layers + 1)[::-1]
        else:
            edges = np.linspace(lo, hi, nonplanar_layers + 1)
        centers = 0.5 * (edges[:-1] + edges[1:])
        bin_idx = np.clip(np.searchsorted(edges, depth, side="right") - 1, 0, nonplanar_layers - 1)
        for k in range(nonplanar_layers):
            sel = residual & (bin_idx == k)
            alpha = sel.astype(float)
            if feather:
                alpha = _feather_alpha(alpha)
            plane_cam = Plane(np.array([0.0, 0.0, 1.0]), float(centers[k]))
            proxies.append(
                Proxy(
                    plane=_camera_to_world_plane(plane_cam, gt.camera),
                    structure=StructureClass.NONPLANAR,
                    color=gt.image * sel[..., None],
                    alpha=alpha,
                    mask=alpha >= mask_threshold,
                )
            )
            num_nonplanar += 1

    return SMPI(
        proxies=tuple(proxies),
        num_planar=len(gt.plane_masks),
        num_nonplanar=num_nonplanar,
        reference_camera=gt.camera,
        resolution=(H, W),
    )


# --------------------------------------------------------------------------
# synthetic scenes


@dataclass(frozen=True)
class SceneModel:
    """World-frame planes with procedural textures attached to them."""

    planes: tuple  # of Plane
    textures: tuple  # of callable (..., 3) world points -> (..., 3) rgb


def _make_texture(rng):
    freq = rng.uniform(0.6, 2.2, size=(3, 3))
    phase = rng.uniform(0.0, 2.0 * np.pi, size=3)

    def tex(points):
        raw = 0.5 + 0.45 * np.sin(np.asarray(points) @ freq.T + phase)
        return np.round(raw * 255.0) / 255.0  # 8-bit grid, lossless to store

    return tex


def scene_model(name: str, seed: int = 0) -> SceneModel:
    """Built-in scenes: "box", "corridor", "random(k[, seed=s])"."""
    name = name.strip()
    rng = np.random.default_rng(seed)
    if name == "box":
        planes = [
            normalize_plane((0.0, 0.0, 1.0), 4.0),  # back wall
            normalize_plane((0.0, 1.0, 0.0), 1.0),  # floor (y down)
            normalize_plane((0.0, -1.0, 0.0), 1.0),  # ceiling
            normalize_plane((-1.0, 0.0, 0.18), 2.0),  # left wall, slanted
            normalize_plane((1.0, 0.0, 0.18), 2.0),  # right wall, slanted
        ]
    elif name == "corridor":
        planes = [
            normalize_plane((0.0, 0.0, 1.0), 8.0),
            normalize_plane((0.0, 1.0, 0.0), 1.0),
            normalize_plane((0.0, -1.0, 0.0), 1.0),
            normalize_plane((-1.0, 0.0, 0.05), 1.2),
            normalize_plane((1.0, 0.0, 0.05), 1.2),
        ]
    else:
        m = re.fullmatch(r"random\((\d+)(?:\s*,\s*seed\s*=\s*(\d+))?\)", name)
        if not m:
            raise UnknownScene(f"unknown scene {name!r}")
        k = int(m.group(1))
        if m.group(2) is not None:
            rng = np.random.default_rng(int(m.group(2)))
        planes = []
        for _ in range(k):
            n = rng.normal(size=3)
            n[2] = abs(n[2]) + 1.0  # keep planes facing the reference camera
            planes.append(normalize_plane(n, rng.uniform(1.0, 5.0) * np.linalg.norm(n)))
    textures = tuple(_make_texture(rng) for _ in planes)
    return SceneModel(planes=tuple(planes), textures=textures)


def rasterize_scene(model: SceneModel, camera: Camera):
    """Direct per-pixel rasterization: nearest positive plane depth wins.

    Independent of the homography/compositing pipeline; used as the
    rendering oracle.  Returns (image, DepthMap, masks).
    """
    H, W = camera.resolution
    depth_stack = []
    for plane in model.planes:
        d, _vis = plane_depth_map(transform_plane(plane, camera.rotation, camera.translation), camera)
        depth_stack.append(np.where(d > 0, d, np.inf))
    depth_stack = np.stack(depth_stack, axis=0)
    best = np.argmin(depth_stack, axis=0)
    depth = np.take_along_axis(depth_stack, best[None], axis=0)[0]
    hit = np.isfinite(depth)
    depth = np.where(hit, depth, 0.0)

    image = np.zeros((H, W, 3))
    masks = []
    pts_cam = backproject_grid(camera, np.where(hit, depth, 1.0))
    pts_world = camera.camera_to_world(pts_cam.reshape(-1, 3)).reshape(pts_cam.shape)
    for i, tex in enumerate(model.textures):
        mask = hit & (best == i)
        image[mask] = tex(pts_world[mask])
        masks.append(mask)
    return image, DepthMap(depth), masks


def synth_scene(name: str, seed: int = 0, resolution=(96, 128)):
    """Analytically exact SceneGT plus the matching exact S-MPI."""
    H, W = resolution
    camera = Camera.identity(fx=float(W), fy=float(W), cx=(W - 1) / 2.0, cy=(H - 1) / 2.0,
                             resolution=(H, W))
    model = scene_model(name, seed)
    image, depth, masks = rasterize_scene(model, camera)

    proxies = []
    for plane, tex, mask in zip(model.planes, model.textures, masks):
        d, vis = plane_depth_map(plane, camera)  # camera pose is identity
        pts = backproject_grid(camera, np.where(vis, d, 1.0))
        color = np.where(vis[..., None], tex(pts), 0.0)
        proxies.append(
            Proxy(
                plane=plane,
                structure=StructureClass.PLANAR,
                color=color,
                alpha=mask.astype(float),
                mask=mask,
            )
        )
    smpi = SMPI(
        proxies=tuple(proxies),
        num_planar=len(proxies),
        num_nonplanar=0,
        reference_camera=camera,
        resolution=(H, W),
    )
    gt = SceneGT(image=image, depth=depth, plane_masks=masks, camera=camera)
    return gt, smpi
