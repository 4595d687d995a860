# cython: boundscheck=False, wraparound=False, cdivision=True
"""Hot rendering kernels, compiled fast path.

Same contract as _kernels_py; selected at import by smpi.kernels when the
extension built.
"""

import numpy as np

cimport numpy as cnp
cimport openmp
from cython.parallel cimport prange
from libc.math cimport floor, isfinite

cnp.import_array()


def set_num_threads(int n):
    """Cap OpenMP parallelism (SMPI_THREADS)."""
    if n > 0:
        openmp.omp_set_num_threads(n)


def composite_layers(double[:, :, :, ::1] colors,
                     double[:, :, ::1] alphas,
                     int[:, :, ::1] order,
                     double[:, :, ::1] depths):
    """Blend N layers per pixel in the given back-to-front order.

    colors: (N, H, W, 3); alphas: (N, H, W); order: (H, W, N) proxy indices
    back-to-front; depths: (H, W, N) slot-ordered per-proxy depth, non-finite
    entries skipped in the depth blend.  Returns (image, confidence, depth).
    """
    cdef Py_ssize_t N = colors.shape[0]
    cdef Py_ssize_t H = colors.shape[1]
    cdef Py_ssize_t W = colors.shape[2]
    cdef Py_ssize_t h, w, k, c
    cdef int idx
    cdef double trans, weight, a, d

    image_arr = np.zeros((H, W, 3), dtype=np.float64)
    conf_arr = np.zeros((H, W), dtype=np.float64)
    depth_arr = np.zeros((H, W), dtype=np.float64)
    cdef double[:, :, ::1] image = image_arr
    cdef double[:, ::1] conf = conf_arr
    cdef double[:, ::1] depth_out = depth_arr

    for h in prange(H, nogil=True, schedule="static"):
        for w in range(W):
            trans = 1.0
            # walk front-to-back accumulating transmittance
            for k in range(N - 1, -1, -1):
                idx = order[h, w, k]
                a = alphas[idx, h, w]
                weight = a * trans
                if weight != 0.0:
                    for c in range(3):
                        image[h, w, c] += weight * colors[idx, h, w, c]
                    conf[h, w] += weight
                    d = depths[h, w, k]
                    if isfinite(d):
                        depth_out[h, w] += weight * d
                trans = trans * (1.0 - a)

    return image_arr, conf_arr, depth_arr


def warp_bilinear(double[:, :, ::1] color,
                  double[:, ::1] alpha,
                  double[:, ::1] hom,
                  Py_ssize_t out_h, Py_ssize_t out_w):
    """Inverse-warp an RGBa raster: sample the source at H q_t, bilinearly.

    Taps falling outside the source canvas contribute nothing, so fully
    off-canvas samples come back transparent.
    """
    cdef Py_ssize_t Hs = alpha.shape[0]
    cdef Py_ssize_t Ws = alpha.shape[1]
    cdef Py_ssize_t h, w, c
    cdef long x0, y0, xi, yi
    cdef int dx, dy
    cdef double qx, qy, qz, x, y, fx, fy, tap

    out_c_arr = np.zeros((out_h, out_w, 3), dtype=np.float64)
    out_a_arr = np.zeros((out_h, out_w), dtype=np.float64)
    cdef double[:, :, ::1] out_c = out_c_arr
    cdef double[:, ::1] out_a = out_a_arr

    for h in prange(out_h, nogil=True, schedule="static"):
        for w in range(out_w):
            qx = hom[0, 0] * w + hom[0, 1] * h + hom[0, 2]
            qy = hom[1, 0] * w + hom[1, 1] * h + hom[1, 2]
            qz = hom[2, 0] * w + hom[2, 1] * h + hom[2, 2]
            if qz > -1e-12 and qz < 1e-12:
                continue
            x = qx / qz
            y = qy / qz
            if not (isfinite(x) and isfinite(y)):
                continue
            x0 = <long>floor(x)
            y0 = <long>floor(y)
            fx = x - x0
            fy = y - y0
            for dy in range(2):
                yi = y0 + dy
                if yi < 0 or yi >= Hs:
                    continue
                for dx in range(2):
                    xi = x0 + dx
                    if xi < 0 or xi >= Ws:
                        continue
                    tap = (fx if dx else 1.0 - fx) * (fy if dy else 1.0 - fy)
                    for c in range(3):
                        out_c[h, w, c] += tap * color[yi, xi, c]
                    out_a[h, w] += tap * alpha[yi, xi]

    return out_c_arr, out_a_arr
