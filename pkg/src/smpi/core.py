"""Shared domain types: planes, proxies, cameras and raster buffers.

All rasters are row-major numpy arrays with a top-left origin; a pixel
(u, v) maps to the homogeneous vector (u, v, 1) directly.  Color is stored
and composited in the input color space (no linearization).  Every type
here is treated as immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DimensionMismatch, ZeroNormal

# Depth value below which a pixel is considered invalid / empty.
INVALID_DEPTH = 0.0

FRONTO_NORMAL = np.array([0.0, 0.0, 1.0])


class StructureClass(Enum):
    PLANAR = "planar"
    NONPLANAR = "nonplanar"


@dataclass(frozen=True)
class Plane:
    """A plane n.x = d with unit normal and non-negative offset (meters)."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float)
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "offset", float(self.offset))

    def contains(self, point, tol=1e-6) -> bool:
        return abs(float(self.normal @ np.asarray(point, dtype=float)) - self.offset) <= tol

    def is_fronto_parallel(self, tol=1e-12) -> bool:
        return bool(np.allclose(self.normal, FRONTO_NORMAL, atol=tol))


def normalize_plane(raw_normal, raw_offset) -> Plane:
    """Canonicalize (n, d): unit normal, offset >= 0.

    For offset exactly 0 the sign ambiguity is resolved by making the first
    nonzero normal component positive.
    """
    n = np.asarray(raw_normal, dtype=float)
    norm = float(np.linalg.norm(n))
    if norm <= 1e-12:
        raise ZeroNormal(f"normal has norm {norm}")
    d = float(raw_offset)
    if abs(norm - 1.0) > 1e-12:  # keep normalization exactly idempotent
        n = n / norm
        d = d / norm
    if d < 0.0:
        n = -n
        d = -d
    elif d == 0.0:
        for c in n:
            if c != 0.0:
                if c < 0.0:
                    n = -n
                break
    return Plane(n, d)


@dataclass(frozen=True)
class Camera:
    """Pinhole camera: intrinsics in pixels plus a rigid world->camera pose."""

    fx: float
    fy: float
    cx: float
    cy: float
    rotation: np.ndarray  # 3x3, world -> camera
    translation: np.ndarray  # 3, meters
    resolution: tuple  # (H, W)

    def __post_init__(self):
        R = np.asarray(self.rotation, dtype=float).reshape(3, 3)
        t = np.asarray(self.translation, dtype=float).reshape(3)
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if not np.allclose(R @ R.T, np.eye(3), atol=1e-9) or not np.isclose(
            np.linalg.det(R), 1.0, atol=1e-9
        ):
            raise ValueError("rotation is not a proper rotation matrix")
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", t)
        object.__setattr__(self, "resolution", (int(self.resolution[0]), int(self.resolution[1])))

    @property
    def intrinsics(self):
        return (self.fx, self.fy, self.cx, self.cy)

    @property
    def K(self) -> np.ndarray:
        return np.array(
            [[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]]
        )

    def world_to_camera(self, points) -> np.ndarray:
        p = np.asarray(points, dtype=float)
        return p @ self.rotation.T + self.translation

    def camera_to_world(self, points) -> np.ndarray:
        p = np.asarray(points, dtype=float)
        return (p - self.translation) @ self.rotation

    def relative_to(self, other: "Camera"):
        """Rigid transform (R, t) mapping this camera's frame to `other`'s."""
        R = other.rotation @ self.rotation.T
        t = other.translation - R @ self.translation
        return R, t

    @staticmethod
    def identity(fx, fy, cx, cy, resolution) -> "Camera":
        return Camera(fx, fy, cx, cy, np.eye(3), np.zeros(3), resolution)


@dataclass(frozen=True)
class Proxy:
    """One layer: a posed plane plus its RGBa realization in the reference view."""

    plane: Plane  # global / world frame
    structure: StructureClass
    color: np.ndarray  # (H, W, 3) in [0, 1]
    alpha: np.ndarray  # (H, W) in [0, 1]
    mask: np.ndarray  # (H, W) bool

    def __post_init__(self):
        c = np.asarray(self.color, dtype=float)
        a = np.asarray(self.alpha, dtype=float)
        m = np.asarray(self.mask, dtype=bool)
        if c.shape[:2] != a.shape or a.shape != m.shape or c.ndim != 3 or c.shape[2] != 3:
            raise DimensionMismatch(
                f"color {c.shape}, alpha {a.shape}, mask {m.shape} disagree"
            )
        object.__setattr__(self, "color", c)
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "mask", m)


@dataclass(frozen=True)
class SMPI:
    """Global proxy set for a scene; planar proxies first, then non-planar."""

    proxies: tuple
    num_planar: int
    num_nonplanar: int
    reference_camera: Camera
    resolution: tuple  # (H, W)

    def __post_init__(self):
        object.__setattr__(self, "proxies", tuple(self.proxies))
        object.__setattr__(self, "resolution", (int(self.resolution[0]), int(self.resolution[1])))
        if self.num_planar + self.num_nonplanar != len(self.proxies):
            raise ValueError("num_planar + num_nonplanar != len(proxies)")
        for i, p in enumerate(self.proxies):
            want = StructureClass.PLANAR if i < self.num_planar else StructureClass.NONPLANAR
            if p.structure is not want:
                raise ValueError(f"proxy {i} has structure {p.structure}, expected {want}")

    def __len__(self):
        return len(self.proxies)


@dataclass(frozen=True)
class ImageBuffer:
    """Composited RGB plus accumulated alpha-weight confidence."""

    pixels: np.ndarray  # (H, W, 3)
    confidence: np.ndarray  # (H, W)

    def __post_init__(self):
        p = np.asarray(self.pixels, dtype=float)
        c = np.asarray(self.confidence, dtype=float)
        if p.shape[:2] != c.shape:
            raise DimensionMismatch(f"pixels {p.shape} vs confidence {c.shape}")
        object.__setattr__(self, "pixels", p)
        object.__setattr__(self, "confidence", c)


@dataclass(frozen=True)
class DepthMap:
    """Dense depth raster in meters; values <= 0 mark invalid pixels."""

    depth: np.ndarray  # (H, W)

    def __post_init__(self):
        object.__setattr__(self, "depth", np.asarray(self.depth, dtype=float))

    @property
    def valid(self) -> np.ndarray:
        return self.depth > INVALID_DEPTH
