# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled twins of the kernels in ``_fallback.py``.

Bit-identical outputs are a hard contract: every arithmetic expression below
copies the fallback's expression tree (same operand order, same round-half-up
via floor(v + 0.5), same reflect-101 folding). Keep the two files in sync.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport floor

cnp.import_array()

BACKEND = "compiled"


cdef inline double _clampd(double v, double lo, double hi) nogil:
    if v < lo:
        return lo
    if v > hi:
        return hi
    return v


cdef inline Py_ssize_t _reflect101(Py_ssize_t idx, Py_ssize_t n) nogil:
    cdef Py_ssize_t period, q
    if n == 1:
        return 0
    period = 2 * (n - 1)
    q = ((idx % period) + period) % period
    if q > n - 1:
        q = period - q
    return q


def warp_bilinear_u8(const cnp.uint8_t[:, ::1] src, const double[:, ::1] map_x, const double[:, ::1] map_y, int fill):
    cdef Py_ssize_t h = src.shape[0], w = src.shape[1]
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] out = np.empty((h, w), dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] ov = out
    cdef Py_ssize_t r, c, xi, yi
    cdef double x, y, x0, y0, fx, fy, p00, p10, p01, p11, v, fillf
    fillf = <double> fill
    with nogil:
        for r in range(h):
            for c in range(w):
                x = map_x[r, c]
                y = map_y[r, c]
                x0 = floor(x)
                y0 = floor(y)
                fx = x - x0
                fy = y - y0
                if x0 >= 0 and x0 < w and y0 >= 0 and y0 < h:
                    p00 = <double> src[<Py_ssize_t> y0, <Py_ssize_t> x0]
                else:
                    p00 = fillf
                if x0 + 1 >= 0 and x0 + 1 < w and y0 >= 0 and y0 < h:
                    p10 = <double> src[<Py_ssize_t> y0, <Py_ssize_t> x0 + 1]
                else:
                    p10 = fillf
                if x0 >= 0 and x0 < w and y0 + 1 >= 0 and y0 + 1 < h:
                    p01 = <double> src[<Py_ssize_t> y0 + 1, <Py_ssize_t> x0]
                else:
                    p01 = fillf
                if x0 + 1 >= 0 and x0 + 1 < w and y0 + 1 >= 0 and y0 + 1 < h:
                    p11 = <double> src[<Py_ssize_t> y0 + 1, <Py_ssize_t> x0 + 1]
                else:
                    p11 = fillf
                v = (1.0 - fy) * ((1.0 - fx) * p00 + fx * p10) + fy * ((1.0 - fx) * p01 + fx * p11)
                v = floor(v + 0.5)
                if v < 0.0:
                    v = 0.0
                elif v > 255.0:
                    v = 255.0
                ov[r, c] = <cnp.uint8_t> v
    return out


def warp_nearest_u8(const cnp.uint8_t[:, ::1] src, const double[:, ::1] map_x, const double[:, ::1] map_y, int fill):
    cdef Py_ssize_t h = src.shape[0], w = src.shape[1]
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] out = np.empty((h, w), dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] ov = out
    cdef Py_ssize_t r, c
    cdef double xi, yi
    cdef cnp.uint8_t fillb = <cnp.uint8_t> fill
    with nogil:
        for r in range(h):
            for c in range(w):
                xi = floor(map_x[r, c] + 0.5)
                yi = floor(map_y[r, c] + 0.5)
                if xi >= 0 and xi <= w - 1 and yi >= 0 and yi <= h - 1:
                    ov[r, c] = src[<Py_ssize_t> yi, <Py_ssize_t> xi]
                else:
                    ov[r, c] = fillb
    return out


cdef cnp.ndarray _reflect_table(Py_ssize_t n, Py_ssize_t rad):
    # table[j] = reflect101(j - rad, n) for j in [0, n + 2*rad)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] table = np.empty(n + 2 * rad, dtype=np.int64)
    cdef Py_ssize_t j
    for j in range(n + 2 * rad):
        table[j] = _reflect101(j - rad, n)
    return table


def sepconv2d_f64(const double[:, ::1] src, const double[::1] kernel):
    cdef Py_ssize_t h = src.shape[0], w = src.shape[1]
    cdef Py_ssize_t k = kernel.shape[0], rad = k // 2
    cdef cnp.ndarray[cnp.float64_t, ndim=2] tmp_arr = np.empty((h, w), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out_arr = np.empty((h, w), dtype=np.float64)
    cdef double[:, ::1] tmp = tmp_arr
    cdef double[:, ::1] ov = out_arr
    cdef const cnp.int64_t[::1] cols = _reflect_table(w, rad)
    cdef const cnp.int64_t[::1] rows = _reflect_table(h, rad)
    cdef Py_ssize_t r, c, t
    cdef double acc
    with nogil:
        # Per-element accumulation in ascending tap order, matching the
        # fallback's float64 addition sequence exactly.
        for r in range(h):
            for c in range(w):
                acc = 0.0
                for t in range(k):
                    acc = acc + kernel[t] * src[r, cols[c + t]]
                tmp[r, c] = acc
        for r in range(h):
            for c in range(w):
                acc = 0.0
                for t in range(k):
                    acc = acc + kernel[t] * tmp[rows[r + t], c]
                ov[r, c] = acc
    return out_arr


def conv3x3_f64(const double[:, ::1] src, const double[:, ::1] kernel):
    cdef Py_ssize_t h = src.shape[0], w = src.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out_arr = np.empty((h, w), dtype=np.float64)
    cdef double[:, ::1] ov = out_arr
    cdef const cnp.int64_t[::1] cols = _reflect_table(w, 1)
    cdef const cnp.int64_t[::1] rows = _reflect_table(h, 1)
    cdef Py_ssize_t r, c, dy, dx
    cdef double acc
    with nogil:
        for r in range(h):
            for c in range(w):
                acc = 0.0
                for dy in range(3):
                    for dx in range(3):
                        acc = acc + kernel[dy, dx] * src[rows[r + dy], cols[c + dx]]
                ov[r, c] = acc
    return out_arr


def median_filter_u8(const cnp.uint8_t[:, ::1] src, int ksize):
    cdef Py_ssize_t h = src.shape[0], w = src.shape[1]
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] out = np.empty((h, w), dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] ov = out
    cdef Py_ssize_t r, c, dy, dx, i, v, n = ksize * ksize
    cdef Py_ssize_t rad = ksize // 2
    cdef int hist[256]
    cdef Py_ssize_t mid = n // 2 + 1, count
    if ksize > 7:
        raise ValueError("median_filter_u8 supports ksize <= 7")
    cdef const cnp.int64_t[::1] cols = _reflect_table(w, rad)
    cdef const cnp.int64_t[::1] rows = _reflect_table(h, rad)
    with nogil:
        for r in range(h):
            for c in range(w):
                for i in range(256):
                    hist[i] = 0
                for dy in range(ksize):
                    for dx in range(ksize):
                        hist[src[rows[r + dy], cols[c + dx]]] += 1
                count = 0
                v = 0
                while True:
                    count += hist[v]
                    if count >= mid:
                        break
                    v += 1
                ov[r, c] = <cnp.uint8_t> v
    return out


def clahe_interp_u8(const cnp.uint8_t[:, ::1] src, const double[:, :, ::1] luts, int tile_h, int tile_w):
    cdef Py_ssize_t h = src.shape[0], w = src.shape[1]
    cdef Py_ssize_t tr = luts.shape[0], tc = luts.shape[1]
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] out = np.empty((h, w), dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] ov = out
    cdef Py_ssize_t r, c, iy0, iy1, ix0, ix1, pv
    cdef double ty, tx, y0, x0, wy, wx, v, l00, l01, l10, l11
    with nogil:
        for r in range(h):
            ty = (<double> r + 0.5) / tile_h - 0.5
            y0 = floor(ty)
            wy = ty - y0
            iy0 = <Py_ssize_t> _clampd(y0, 0, tr - 1)
            iy1 = <Py_ssize_t> _clampd(y0 + 1, 0, tr - 1)
            for c in range(w):
                tx = (<double> c + 0.5) / tile_w - 0.5
                x0 = floor(tx)
                wx = tx - x0
                ix0 = <Py_ssize_t> _clampd(x0, 0, tc - 1)
                ix1 = <Py_ssize_t> _clampd(x0 + 1, 0, tc - 1)
                pv = <Py_ssize_t> src[r, c]
                l00 = luts[iy0, ix0, pv]
                l01 = luts[iy0, ix1, pv]
                l10 = luts[iy1, ix0, pv]
                l11 = luts[iy1, ix1, pv]
                v = (1.0 - wy) * ((1.0 - wx) * l00 + wx * l01) + wy * ((1.0 - wx) * l10 + wx * l11)
                v = floor(v + 0.5)
                if v < 0.0:
                    v = 0.0
                elif v > 255.0:
                    v = 255.0
                ov[r, c] = <cnp.uint8_t> v
    return out
