import numpy as np
import pytest

from smpi.core import SMPI, Camera, Proxy, StructureClass, normalize_plane


def random_rotation(rng):
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def random_camera(rng, resolution=(32, 32), max_angle=0.3, max_shift=0.5):
    H, W = resolution
    # small pose perturbations keep most planes visible in both views
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    angle = rng.uniform(-max_angle, max_angle)
    K = np.array([[0, -axis[2], axis[1]], [axis[2], 0, -axis[0]], [-axis[1], axis[0], 0]])
    R = np.eye(3) + np.sin(angle) * K + (1 - np.cos(angle)) * (K @ K)
    t = rng.uniform(-max_shift, max_shift, size=3)
    fx = rng.uniform(0.7, 1.5) * W
    return Camera(fx, fx, (W - 1) / 2.0, (H - 1) / 2.0, R, t, resolution)


def random_plane(rng, min_offset=1.0, max_offset=5.0):
    n = rng.normal(size=3)
    n[2] = abs(n[2]) + 1.0  # face the identity camera
    return normalize_plane(n, rng.uniform(min_offset, max_offset) * np.linalg.norm(n))


def random_smpi(rng, n_proxies, resolution, camera=None):
    H, W = resolution
    if camera is None:
        camera = Camera.identity(float(W), float(W), (W - 1) / 2.0, (H - 1) / 2.0, resolution)
    proxies = []
    for _ in range(n_proxies):
        alpha = rng.uniform(0.0, 1.0, size=(H, W))
        proxies.append(
            Proxy(
                plane=random_plane(rng),
                structure=StructureClass.PLANAR,
                color=rng.uniform(0.0, 1.0, size=(H, W, 3)),
                alpha=alpha,
                mask=alpha >= 0.5,
            )
        )
    return SMPI(
        proxies=tuple(proxies),
        num_planar=n_proxies,
        num_nonplanar=0,
        reference_camera=camera,
        resolution=resolution,
    )


def naive_render(smpi, camera):
    """Literal per-pixel sort + alpha-composition sum; the rendering oracle.

    Independent of smpi.render: plane depths, visibility, ordering and the
    compositing products are all spelled out from the defining formulas.
    """
    H, W = camera.resolution
    N = len(smpi.proxies)
    fx, fy, cx, cy = camera.intrinsics

    uu, vv = np.meshgrid(np.arange(W, dtype=float), np.arange(H, dtype=float))
    rays = np.stack([(uu - cx) / fx, (vv - cy) / fy, np.ones_like(uu)], axis=-1)

    D = np.empty((H, W, N))
    A = np.empty((H, W, N))
    C = np.empty((H, W, N, 3))
    for i, p in enumerate(smpi.proxies):
        n_c = camera.rotation @ p.plane.normal
        d_c = p.plane.offset + float(n_c @ camera.translation)
        denom = rays @ n_c
        with np.errstate(divide="ignore", invalid="ignore"):
            depth = d_c / denom
        vis = (np.abs(denom) > 1e-9) & (depth > 0)
        D[..., i] = np.where(vis, depth, -np.inf)
        A[..., i] = np.where(vis, p.alpha, 0.0)
        C[..., i, :] = p.color

    order = np.argsort(-D, axis=-1, kind="stable")
    D_s = np.take_along_axis(D, order, axis=-1)
    A_s = np.take_along_axis(A, order, axis=-1)
    C_s = np.take_along_axis(C, order[..., None], axis=-2)

    img = np.zeros((H, W, 3))
    conf = np.zeros((H, W))
    depth_out = np.zeros((H, W))
    for i in range(N):
        w = A_s[..., i].copy()
        for j in range(i + 1, N):
            w = w * (1.0 - A_s[..., j])
        img += w[..., None] * C_s[..., i, :]
        conf += w
        depth_out += w * np.where(np.isfinite(D_s[..., i]), D_s[..., i], 0.0)
    return img, conf, depth_out, order
