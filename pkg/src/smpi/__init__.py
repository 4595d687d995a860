"""Structural multiplane images: construction, rendering, fusion, evaluation."""

from .core import (
    SMPI,
    Camera,
    DepthMap,
    ImageBuffer,
    Plane,
    Proxy,
    StructureClass,
    normalize_plane,
)
from .kernels import BACKEND

__all__ = [
    "SMPI",
    "Camera",
    "DepthMap",
    "ImageBuffer",
    "Plane",
    "Proxy",
    "StructureClass",
    "normalize_plane",
    "BACKEND",
]
