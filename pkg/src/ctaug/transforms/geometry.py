"""Shared geometric maps for the spatial techniques.

A GeometricMap is a dense inverse-coordinate field: for each output pixel it
names the source location to sample. One map is drawn per application and
reused for image (bilinear) and mask (nearest), which is what keeps the two
rasters aligned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..core.rng import RngStream
from ..errors import ValidationError
from .params import (
    ElasticParams,
    FlipParams,
    GridDistortionParams,
    OpticalDistortionParams,
    PiecewiseAffineParams,
    RandomCropParams,
    RotateParams,
    ShiftScaleRotateParams,
)

BACKGROUND_FILL = 0


@dataclass(frozen=True)
class GeometricMap:
    """Inverse sampling coordinates, shape = output shape."""

    map_x: np.ndarray
    map_y: np.ndarray

    def __post_init__(self) -> None:
        mx = np.ascontiguousarray(self.map_x, dtype=np.float64)
        my = np.ascontiguousarray(self.map_y, dtype=np.float64)
        if mx.shape != my.shape or mx.ndim != 2:
            raise ValidationError("coordinate fields must be two equal-shape 2-D arrays")
        if not (np.isfinite(mx).all() and np.isfinite(my).all()):
            raise ValidationError("coordinate fields must be finite")
        mx.setflags(write=False)
        my.setflags(write=False)
        object.__setattr__(self, "map_x", mx)
        object.__setattr__(self, "map_y", my)

    def warp_image(self, raster: np.ndarray) -> np.ndarray:
        return kernels.warp_bilinear_u8(
            np.ascontiguousarray(raster, dtype=np.uint8), self.map_x, self.map_y, BACKGROUND_FILL
        )

    def warp_mask(self, raster: np.ndarray) -> np.ndarray:
        return kernels.warp_nearest_u8(
            np.ascontiguousarray(raster, dtype=np.uint8), self.map_x, self.map_y, BACKGROUND_FILL
        )


def _grid(h: int, w: int) -> tuple[np.ndarray, np.ndarray]:
    gx, gy = np.meshgrid(np.arange(w, dtype=np.float64), np.arange(h, dtype=np.float64))
    return gx, gy


def identity_map(h: int, w: int) -> GeometricMap:
    gx, gy = _grid(h, w)
    return GeometricMap(gx, gy)


def flip_map(h: int, w: int, params: FlipParams, rng: RngStream) -> GeometricMap:
    axis = params.axis
    if axis == "random":
        axis = ("horizontal", "vertical", "both")[rng.integer(0, 3)]
    gx, gy = _grid(h, w)
    if axis in ("horizontal", "both"):
        gx = (w - 1) - gx
    if axis in ("vertical", "both"):
        gy = (h - 1) - gy
    return GeometricMap(gx, gy)


def _affine_map(h: int, w: int, shift_x: float, shift_y: float, scale: float, angle_deg: float) -> GeometricMap:
    """Inverse of translate -> scale -> rotate, all about the image center.

    Coordinates are screen-style (x right, y down); a positive angle rotates
    the content clockwise on screen.
    """
    cx = (w - 1) / 2.0
    cy = (h - 1) / 2.0
    tx = shift_x * w
    ty = shift_y * h
    theta = math.radians(-angle_deg)
    cos_t = math.cos(theta)
    sin_t = math.sin(theta)
    a00 = cos_t / scale
    a01 = -sin_t / scale
    a10 = sin_t / scale
    a11 = cos_t / scale
    b0 = cx - tx - (a00 * cx + a01 * cy)
    b1 = cy - ty - (a10 * cx + a11 * cy)
    gx, gy = _grid(h, w)
    return GeometricMap(a00 * gx + a01 * gy + b0, a10 * gx + a11 * gy + b1)


def rotate_map(h: int, w: int, params: RotateParams, rng: RngStream) -> GeometricMap:
    angle = rng.uniform(*params.angle_range)
    return _affine_map(h, w, 0.0, 0.0, 1.0, angle)


def shift_scale_rotate_map(h: int, w: int, params: ShiftScaleRotateParams, rng: RngStream) -> GeometricMap:
    shift_x = rng.uniform(*(params.shift_x_range or params.shift_range))
    shift_y = rng.uniform(*(params.shift_y_range or params.shift_range))
    scale = rng.uniform(*params.scale_range)
    angle = rng.uniform(*params.angle_range)
    return _affine_map(h, w, shift_x, shift_y, scale, angle)


def _gaussian_kernel(sigma: float) -> np.ndarray:
    radius = max(1, int(round(3.0 * sigma)))
    xs = np.arange(-radius, radius + 1, dtype=np.float64)
    wts = np.exp(-(xs * xs) / (2.0 * sigma * sigma))
    return wts / wts.sum()

def elastic_map(h: int, w: int, params: ElasticParams, rng: RngStream) -> GeometricMap:
    """Gaussian-smoothed random displacement field scaled by alpha."""
    dx = rng.uniform_field(-1.0, 1.0, (h, w))
    dy = rng.uniform_field(-1.0, 1.0, (h, w))
    kern = _gaussian_kernel(params.sigma)
    dx = kernels.sepconv2d_f64(np.ascontiguousarray(dx), kern) * params.alpha
    dy = kernels.sepconv2d_f64(np.ascontiguousarray(dy), kern) * params.alpha
    gx, gy = _grid(h, w)
    return GeometricMap(gx + dx, gy + dy)


def _distort_axis(n: int, steps: int, factors: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Source nodes are evenly spaced; output nodes stretch each interval by
    # its factor, then the whole axis is renormalized so endpoints coincide.
    src = np.arange(steps + 1, dtype=np.float64) * ((n - 1) / steps)
    widths = np.diff(src) * factors
    dst = np.concatenate(([0.0], np.cumsum(widths)))
    dst *= (n - 1) / dst[-1]
    return src, dst


def _piecewise_linear(coords: np.ndarray, src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    seg = np.clip(np.searchsorted(dst, coords, side="right") - 1, 0, len(dst) - 2)
    d0 = dst[seg]
    d1 = dst[seg + 1]
    s0 = src[seg]
    s1 = src[seg + 1]
    return s0 + (coords - d0) * (s1 - s0) / (d1 - d0)


def grid_distortion_map(h: int, w: int, params: GridDistortionParams, rng: RngStream) -> GeometricMap:
    if h < 2 or w < 2:
        raise ValidationError("grid distortion needs at least 2x2 rasters")
    fx = 1.0 + rng.uniform_field(*params.distort_range, (params.steps,))
    fy = 1.0 + rng.uniform_field(*params.distort_range, (params.steps,))
    src_x, dst_x = _distort_axis(w, params.steps, fx)
    src_y, dst_y = _distort_axis(h, params.steps, fy)
    col_map = _piecewise_linear(np.arange(w, dtype=np.float64), src_x, dst_x)
    row_map = _piecewise_linear(np.arange(h, dtype=np.float64), src_y, dst_y)
    gx = np.broadcast_to(col_map[None, :], (h, w))
    gy = np.broadcast_to(row_map[:, None], (h, w))
    return GeometricMap(np.ascontiguousarray(gx), np.ascontiguousarray(gy))


def optical_distortion_map(h: int, w: int, params: OpticalDistortionParams, rng: RngStream) -> GeometricMap:
    """Radial (barrel/pincushion) model about a jittered principal point."""
    k = rng.uniform(*params.distort_range)
    shift_x = rng.uniform(*params.shift_range)
    shift_y = rng.uniform(*params.shift_range)
    cx = (w - 1) / 2.0 + shift_x * w
    cy = (h - 1) / 2.0 + shift_y * h
    radius = 0.5 * math.hypot(w - 1, h - 1)
    gx, gy = _grid(h, w)
    dx = gx - cx
    dy = gy - cy
    r2 = (dx * dx + dy * dy) / (radius * radius)
    factor = 1.0 + k * r2
    return GeometricMap(cx + dx * factor, cy + dy * factor)


def piecewise_affine_map(h: int, w: int, params: PiecewiseAffineParams, rng: RngStream) -> GeometricMap:
    """Jittered control lattice; displacements interpolated per cell."""
    gr, gc = params.grid
    std = params.jitter_std * min(h, w)
    offsets = rng.normal_field(0.0, std, (gr, gc, 2))

    cell_h = (h - 1) / (gr - 1)
    cell_w = (w - 1) / (gc - 1)
    ty = np.arange(h, dtype=np.float64) / cell_h
    tx = np.arange(w, dtype=np.float64) / cell_w
    i0 = np.minimum(np.floor(ty), gr - 2).astype(np.int64)
    j0 = np.minimum(np.floor(tx), gc - 2).astype(np.int64)
    ry = (ty - i0)[:, None]
    rx = (tx - j0)[None, :]

    def interp(channel: np.ndarray) -> np.ndarray:
        c00 = channel[i0[:, None], j0[None, :]]
        c01 = channel[i0[:, None], j0[None, :] + 1]
        c10 = channel[i0[:, None] + 1, j0[None, :]]
        c11 = channel[i0[:, None] + 1, j0[None, :] + 1]
        return (1.0 - ry) * ((1.0 - rx) * c00 + rx * c01) + ry * ((1.0 - rx) * c10 + rx * c11)

    dy = interp(offsets[:, :, 0])
    dx = interp(offsets[:, :, 1])
    gx, gy = _grid(h, w)
    return GeometricMap(gx + dx, gy + dy)


def random_crop_map(h: int, w: int, params: RandomCropParams, rng: RngStream) -> GeometricMap:
    """Crop a window, then rescale back to the input size (half-pixel centers).

    Sampling coordinates are clamped to the window so the rescale replicates
    window edges instead of bleeding in fill.
    """
    ch, cw = params.height, params.width
    if ch > h or cw > w:
        raise ValidationError(f"crop window {ch}x{cw} exceeds image {h}x{w}")
    top = rng.integer(0, h - ch + 1)
    left = rng.integer(0, w - cw + 1)
    xs = np.clip(left + (np.arange(w, dtype=np.float64) + 0.5) * cw / w - 0.5, left, left + cw - 1)
    ys = np.clip(top + (np.arange(h, dtype=np.float64) + 0.5) * ch / h - 0.5, top, top + ch - 1)
    gx = np.broadcast_to(xs[None, :], (h, w))
    gy = np.broadcast_to(ys[:, None], (h, w))
    return GeometricMap(np.ascontiguousarray(gx), np.ascontiguousarray(gy))
