"""Persistence: S-MPI containers, images, depth maps and camera trajectories.

An S-MPI container is a directory holding a JSON manifest plus one lossless
8-bit RGBA PNG per proxy (and an optional float32 alpha sidecar when
sub-1/255 alpha precision is requested).  Depth maps store as 16-bit PNG in
millimeters (0 = invalid) or as lossless .npy.  Trajectories are plain text,
one camera per line: fx fy cx cy followed by the row-major 3x4 world->camera
pose.
"""

from __future__ import annotations

import json
import os

import numpy as np
from PIL import Image

from .core import SMPI, Camera, DepthMap, Plane, Proxy, StructureClass
from .errors import (
    CorruptManifest,
    MissingLayer,
    ParseError,
    UnsupportedFormat,
    VersionMismatch,
)

MANIFEST_NAME = "manifest.json"
CONTAINER_VERSION = 1


def save_image(pixels, path):
    """Unit-range RGB (H, W, 3) to an 8-bit PNG."""
    arr = np.clip(np.asarray(pixels) * 255.0, 0, 255).round().astype(np.uint8)
    Image.fromarray(arr, "RGB").save(path)


def load_image(path):
    return np.asarray(Image.open(path).convert("RGB"), dtype=float) / 255.0


def save_smpi(smpi: SMPI, path, high_precision: bool = False):
    """Write an S-MPI container directory; see module docstring for layout."""
    os.makedirs(path, exist_ok=True)
    entries = []
    for i, proxy in enumerate(smpi.proxies):
        layer_name = f"layer_{i:04d}.png"
        mask_name = f"mask_{i:04d}.png"
        rgba = np.concatenate([proxy.color, proxy.alpha[..., None]], axis=-1)
        rgba = np.clip(rgba * 255.0, 0, 255).round().astype(np.uint8)
        Image.fromarray(rgba, "RGBA").save(os.path.join(path, layer_name))
        Image.fromarray(proxy.mask.astype(np.uint8) * 255, "L").save(
            os.path.join(path, mask_name)
        )
        entry = {
            "normal": list(proxy.plane.normal),
            "offset": proxy.plane.offset,
            "structure": proxy.structure.value,
            "layer": layer_name,
            "mask": mask_name,
        }
        if high_precision:
            alpha_name = f"alpha_{i:04d}.npy"
            np.save(os.path.join(path, alpha_name), proxy.alpha.astype(np.float32))
            entry["alpha_sidecar"] = alpha_name
        entries.append(entry)

    cam = smpi.reference_camera
    manifest = {
        "version": CONTAINER_VERSION,
        "resolution": list(smpi.resolution),
        "num_planar": smpi.num_planar,
        "num_nonplanar": smpi.num_nonplanar,
        "camera": {
            "intrinsics": [cam.fx, cam.fy, cam.cx, cam.cy],
            "rotation": [list(row) for row in cam.rotation],
            "translation": list(cam.translation),
            "resolution": list(cam.resolution),
        },
        "proxies": entries,
    }
    with open(os.path.join(path, MANIFEST_NAME), "w") as f:
        json.dump(manifest, f, indent=1)


def load_smpi(path) -> SMPI:
    manifest_path = os.path.join(path, MANIFEST_NAME)
    if not os.path.exists(manifest_path):
        raise CorruptManifest(f"no {MANIFEST_NAME} in {path}")
    try:
        with open(manifest_path) as f:
            manifest = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise CorruptManifest(str(e)) from e

    version = manifest.get("version")
    if version != CONTAINER_VERSION:
        raise VersionMismatch(f"container version {version}, expected {CONTAINER_VERSION}")

    try:
        c = manifest["camera"]
        fx, fy, cx, cy = c["intrinsics"]
        camera = Camera(
            fx, fy, cx, cy,
            np.array(c["rotation"], dtype=float),
            np.array(c["translation"], dtype=float),
            tuple(c["resolution"]),
        )
        resolution = tuple(manifest["resolution"])
        entries = manifest["proxies"]
        num_planar = manifest["num_planar"]
        num_nonplanar = manifest["num_nonplanar"]
    except (KeyError, TypeError, ValueError) as e:
        raise CorruptManifest(f"bad manifest field: {e}") from e

    proxies = []
    for i, entry in enumerate(entries):
        layer_path = os.path.join(path, entry["layer"])
        mask_path = os.path.join(path, entry["mask"])
        if not os.path.exists(layer_path) or not os.path.exists(mask_path):
            raise MissingLayer(f"proxy {i}: missing {entry['layer']} or {entry['mask']}")
        rgba = np.asarray(Image.open(layer_path), dtype=float) / 255.0
        if "alpha_sidecar" in entry:
            sidecar = os.path.join(path, entry["alpha_sidecar"])
            if not os.path.exists(sidecar):
                raise MissingLayer(f"proxy {i}: missing {entry['alpha_sidecar']}")
            alpha = np.load(sidecar).astype(float)
        else:
            alpha = rgba[..., 3]
        mask = np.asarray(Image.open(mask_path)) > 0
        proxies.append(
            Proxy(
                plane=Plane(np.array(entry["normal"], dtype=float), entry["offset"]),
                structure=StructureClass(entry["structure"]),
                color=rgba[..., :3],
                alpha=alpha,
                mask=mask,
            )
        )
    return SMPI(
        proxies=tuple(proxies),
        num_planar=num_planar,
        num_nonplanar=num_nonplanar,
        reference_camera=camera,
        resolution=resolution,
    )


def save_depth(depth: DepthMap, path):
    """16-bit millimeter PNG (lossy, <= 0.5 mm) or lossless float .npy."""
    if str(path).endswith(".png"):
        mm = np.round(np.where(depth.valid, depth.depth * 1000.0, 0.0))
        Image.fromarray(np.clip(mm, 0, 65535).astype(np.uint16)).save(path)
    elif str(path).endswith(".npy"):
        np.save(path, depth.depth)
    else:
        raise UnsupportedFormat(f"unsupported depth format: {path}")


def load_depth(path) -> DepthMap:
    if str(path).endswith(".png"):
        mm = np.asarray(Image.open(path), dtype=float)
        return DepthMap(mm / 1000.0)
    if str(path).endswith(".npy"):
        return DepthMap(np.load(path))
    raise UnsupportedFormat(f"unsupported depth format: {path}")


def save_trajectory(cameras, path):
    with open(path, "w") as f:
        for cam in cameras:
            pose = np.hstack([cam.rotation, cam.translation[:, None]])
            nums = [cam.fx, cam.fy, cam.cx, cam.cy] + [float(x) for x in pose.ravel()]
            f.write(" ".join(repr(x) for x in nums) + "\n")


def load_trajectory(path, resolution=(256, 384)):
    """One Camera per non-empty line; raises ParseError with the line number."""
    cameras = []
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 16:
                raise ParseError(lineno, f"expected 16 numbers, got {len(parts)}")
            try:
                nums = [float(x) for x in parts]
            except ValueError as e:
                raise ParseError(lineno, str(e)) from e
            fx, fy, cx, cy = nums[:4]
            pose = np.array(nums[4:], dtype=float).reshape(3, 4)
            try:
                cameras.append(Camera(fx, fy, cx, cy, pose[:, :3], pose[:, 3], resolution))
            except ValueError as e:
                raise ParseError(lineno, str(e)) from e
    return cameras
