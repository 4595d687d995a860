"""Closed-form plane / camera math.

Per-pixel plane depth, plane transformation between rigid frames, the
plane-induced homography between two pinhole views and backprojection.
Degenerate configurations (grazing rays, planes through the optical
center) are reported as invisibility rather than raised, so a single bad
proxy cannot poison a rendered frame.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Camera, Plane, normalize_plane
from .errors import DegeneratePlane, NonPositiveDepth

# Grazing-angle cutoff for the depth denominator n . K^-1 q.
EPS_DENOM = 1e-9
# Minimum |d| before the homography's division by the offset degenerates.
EPS_OFFSET = 1e-6


@dataclass(frozen=True)
class Homography2D:
    """Invertible 3x3 map between homogeneous pixel coordinates."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float).reshape(3, 3)
        if abs(np.linalg.det(m)) <= 1e-12:
            raise DegeneratePlane("homography is singular")
        object.__setattr__(self, "matrix", m)

    def apply(self, pixels) -> np.ndarray:
        """Map (..., 2) pixels through the homography with perspective division."""
        p = np.asarray(pixels, dtype=float)
        q = np.concatenate([p, np.ones(p.shape[:-1] + (1,))], axis=-1)
        out = q @ self.matrix.T
        return out[..., :2] / out[..., 2:3]

    def inverse(self) -> "Homography2D":
        return Homography2D(np.linalg.inv(self.matrix))


def _k_inv(intrinsics) -> np.ndarray:
    fx, fy, cx, cy = intrinsics
    return np.array(
        [[1.0 / fx, 0.0, -cx / fx], [0.0, 1.0 / fy, -cy / fy], [0.0, 0.0, 1.0]]
    )


def _k(intrinsics) -> np.ndarray:
    fx, fy, cx, cy = intrinsics
    return np.array([[fx, 0.0, cx], [0.0, fy, cy], [0.0, 0.0, 1.0]])


def plane_depth(plane: Plane, intrinsics, pixel):
    """Depth of `plane` along the ray through `pixel`, D = d / (n . K^-1 q).

    Returns None ("invisible") when the ray grazes the plane or the
    intersection lies at or behind the camera.
    """
    u, v = pixel
    ray = _k_inv(intrinsics) @ np.array([u, v, 1.0])
    denom = float(plane.normal @ ray)
    if abs(denom) <= EPS_DENOM:
        return None
    depth = plane.offset / denom
    if depth <= 0.0:
        return None
    return depth


def plane_depth_map(plane: Plane, camera: Camera):
    """Vectorized plane depth over the full raster.

    Returns (depth, visible); invisible entries hold -inf so that a depth-
    descending sort pushes them last.
    """
    H, W = camera.resolution
    u = np.arange(W, dtype=float)
    v = np.arange(H, dtype=float)
    uu, vv = np.meshgrid(u, v)
    rays = np.stack([uu, vv, np.ones_like(uu)], axis=-1) @ _k_inv(camera.intrinsics).T
    denom = rays @ plane.normal
    with np.errstate(divide="ignore", invalid="ignore"):
        depth = plane.offset / denom
    visible = (np.abs(denom) > EPS_DENOM) & (depth > 0.0)
    depth = np.where(visible, depth, -np.inf)
    return depth, visible


def transform_plane(plane: Plane, rotation, translation) -> Plane:
    """Re-express a plane under the rigid map x -> R x + t, re-canonicalized."""
    R = np.asarray(rotation, dtype=float)
    t = np.asarray(translation, dtype=float)
    n_t = R @ plane.normal
    d_t = plane.offset + float(n_t @ t)
    return normalize_plane(n_t, d_t)


def plane_to_camera(plane: Plane, camera: Camera) -> Plane:
    """World-frame plane expressed in `camera`'s frame."""
    return transform_plane(plane, camera.rotation, camera.translation)


def backproject(intrinsics, pixel, depth) -> np.ndarray:
    """Lift a pixel to a camera-frame 3D point, D * K^-1 q."""
    if depth <= 0.0:
        raise NonPositiveDepth(f"depth {depth}")
    u, v = pixel
    return depth * (_k_inv(intrinsics) @ np.array([u, v, 1.0]))


def project(intrinsics, point) -> np.ndarray:
    """Camera-frame point to pixel; the inverse of backproject."""
    p = np.asarray(point, dtype=float)
    q = _k(intrinsics) @ p
    return q[:2] / q[2]


def backproject_grid(camera: Camera, depth: np.ndarray) -> np.ndarray:
    """Backproject a full (H, W) depth raster to (H, W, 3) camera-frame points."""
    H, W = depth.shape
    uu, vv = np.meshgrid(np.arange(W, dtype=float), np.arange(H, dtype=float))
    rays = np.stack([uu, vv, np.ones_like(uu)], axis=-1) @ _k_inv(camera.intrinsics).T
    return rays * depth[..., None]


def plane_homography(plane_in_target: Plane, src_camera: Camera, tgt_camera: Camera) -> Homography2D:
    """Homography taking target pixels to source pixels for points on the plane.

    With (R, t) the rigid map from the target frame to the source frame and
    (n, d) the plane in the target frame, a plane point x_t maps to
    x_s = (R + t n^T / d) x_t, hence H = K_s (R + t n^T / d) K_t^-1.
    The convention is pinned by the backproject-transform-project oracle in
    the test suite, not by any sign lore.
    """
    d = plane_in_target.offset
    if abs(d) <= EPS_OFFSET:
        raise DegeneratePlane(f"plane offset {d} passes through the target optical center")
    R, t = tgt_camera.relative_to(src_camera)
    M = R + np.outer(t, plane_in_target.normal) / d
    H = _k(src_camera.intrinsics) @ M @ _k_inv(tgt_camera.intrinsics)
    return Homography2D(H)
