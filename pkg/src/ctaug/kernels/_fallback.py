"""Pure-NumPy implementations of the hot pixel kernels.

Every function here has a compiled twin in ``_kernels.pyx``. The two are kept
bit-identical by construction: same expression tree per output pixel, same
reflect-101 index folding, same round-half-up (``floor(v + 0.5)``). Tests
compare both backends bytewise, so any edit here must be mirrored in the
.pyx file.
"""

from __future__ import annotations

import numpy as np

BACKEND = "fallback"


def _reflect101(idx: np.ndarray, n: int) -> np.ndarray:
    # Mirror without repeating the edge sample: ... 2 1 | 0 1 2 | 1 0 ...
    if n == 1:
        return np.zeros_like(idx)
    period = 2 * (n - 1)
    q = np.mod(idx, period)
    return np.where(q > n - 1, period - q, q)


def warp_bilinear_u8(src: np.ndarray, map_x: np.ndarray, map_y: np.ndarray, fill: int) -> np.ndarray:
    """Sample ``src`` at (map_y, map_x) with bilinear weights; constant fill outside."""
    h, w = src.shape
    src_f = src.astype(np.float64)
    fill_f = float(fill)

    x0 = np.floor(map_x)
    y0 = np.floor(map_y)
    fx = map_x - x0
    fy = map_y - y0
    x0i = x0.astype(np.int64)
    y0i = y0.astype(np.int64)

    def gather(xi, yi):
        inb = (xi >= 0) & (xi < w) & (yi >= 0) & (yi < h)
        vals = src_f[np.clip(yi, 0, h - 1), np.clip(xi, 0, w - 1)]
        return np.where(inb, vals, fill_f)

    p00 = gather(x0i, y0i)
    p10 = gather(x0i + 1, y0i)
    p01 = gather(x0i, y0i + 1)
    p11 = gather(x0i + 1, y0i + 1)

    v = (1.0 - fy) * ((1.0 - fx) * p00 + fx * p10) + fy * ((1.0 - fx) * p01 + fx * p11)
    return np.clip(np.floor(v + 0.5), 0.0, 255.0).astype(np.uint8)


def warp_nearest_u8(src: np.ndarray, map_x: np.ndarray, map_y: np.ndarray, fill: int) -> np.ndarray:
    """Sample ``src`` at the rounded (map_y, map_x); constant fill outside."""
    h, w = src.shape
    xi = np.floor(map_x + 0.5)
    yi = np.floor(map_y + 0.5)
    inb = (xi >= 0) & (xi <= w - 1) & (yi >= 0) & (yi <= h - 1)
    xc = np.clip(xi, 0, w - 1).astype(np.int64)
    yc = np.clip(yi, 0, h - 1).astype(np.int64)
    out = src[yc, xc]
    return np.where(inb, out, np.uint8(fill)).astype(np.uint8)


def sepconv2d_f64(src: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Separable 2-D convolution (rows then columns), reflect-101 borders.

    Taps are accumulated in ascending order in both passes so the compiled
    twin produces the same float64 sums.
    """
    h, w = src.shape
    k = kernel.shape[0]
    r = k // 2

    cols = _reflect101(np.arange(-r, w + r, dtype=np.int64), w)
    padded = src[:, cols]
    tmp = np.zeros((h, w), dtype=np.float64)
    for t in range(k):
        tmp += kernel[t] * padded[:, t : t + w]

    rows = _reflect101(np.arange(-r, h + r, dtype=np.int64), h)
    padded = tmp[rows, :]
    out = np.zeros((h, w), dtype=np.float64)
    for t in range(k):
        out += kernel[t] * padded[t : t + h, :]
    return out


def conv3x3_f64(src: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Dense 3x3 convolution with reflect-101 borders; taps in row-major order."""
    h, w = src.shape
    rows = _reflect101(np.arange(-1, h + 1, dtype=np.int64), h)
    cols = _reflect101(np.arange(-1, w + 1, dtype=np.int64), w)
    padded = src[np.ix_(rows, cols)]
    out = np.zeros((h, w), dtype=np.float64)
    for dy in range(3):
        for dx in range(3):
            out += kernel[dy, dx] * padded[dy : dy + h, dx : dx + w]
    return out


def median_filter_u8(src: np.ndarray, ksize: int) -> np.ndarray:
    """Square median filter with reflect-101 borders; ksize odd."""
    h, w = src.shape
    r = ksize // 2
    rows = _reflect101(np.arange(-r, h + r, dtype=np.int64), h)
    cols = _reflect101(np.arange(-r, w + r, dtype=np.int64), w)
    padded = src[np.ix_(rows, cols)]
    windows = np.empty((ksize * ksize, h, w), dtype=np.uint8)
    i = 0
    for dy in range(ksize):
        for dx in range(ksize):
            windows[i] = padded[dy : dy + h, dx : dx + w]
            i += 1
    windows.sort(axis=0)
    return windows[(ksize * ksize) // 2]


def clahe_interp_u8(src: np.ndarray, luts: np.ndarray, tile_h: int, tile_w: int) -> np.ndarray:
    """Blend the four surrounding tile LUTs per pixel and round.

    ``luts`` is (tile_rows, tile_cols, 256) float64 holding already-rounded
    mapping values; interpolation weights come from half-pixel tile-center
    coordinates.
    """
    h, w = src.shape
    tr, tc = luts.shape[0], luts.shape[1]

    ty = (np.arange(h, dtype=np.float64) + 0.5) / tile_h - 0.5
    tx = (np.arange(w, dtype=np.float64) + 0.5) / tile_w - 0.5
    y0 = np.floor(ty)
    x0 = np.floor(tx)
    wy = ty - y0
    wx = tx - x0
    iy0 = np.clip(y0, 0, tr - 1).astype(np.int64)
    iy1 = np.clip(y0 + 1, 0, tr - 1).astype(np.int64)
    ix0 = np.clip(x0, 0, tc - 1).astype(np.int64)
    ix1 = np.clip(x0 + 1, 0, tc - 1).astype(np.int64)

    src_i = src.astype(np.int64)
    l00 = luts[iy0[:, None], ix0[None, :], src_i]
    l01 = luts[iy0[:, None], ix1[None, :], src_i]
    l10 = luts[iy1[:, None], ix0[None, :], src_i]
    l11 = luts[iy1[:, None], ix1[None, :], src_i]

    wyc = wy[:, None]
    wxc = wx[None, :]
    v = (1.0 - wyc) * ((1.0 - wxc) * l00 + wxc * l01) + wyc * ((1.0 - wxc) * l10 + wxc * l11)
    return np.clip(np.floor(v + 0.5), 0.0, 255.0).astype(np.uint8)
