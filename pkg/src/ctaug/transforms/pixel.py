"""Image-only (pixel-level) techniques. The mask is never touched here.

Intensity maps are built as 256-entry LUTs where possible; neighborhood
filters go through the kernels backend. All rounding is half-up
(floor(v + 0.5)) to match the kernels.
"""

from __future__ import annotations

import io

import numpy as np
from PIL import Image as PILImage

from .. import kernels
from ..core.rng import RngStream
from ..errors import ValidationError
from .params import (
    BrightnessContrastParams,
    ClaheParams,
    CoarseDropoutParams,
    EmbossParams,
    GaussianBlurParams,
    GridDropoutParams,
    ImageCompressionParams,
    MedianBlurParams,
    PosterizeParams,
    RandomGammaParams,
    RandomSnowParams,
    SharpenParams,
)


def _round_u8(values: np.ndarray) -> np.ndarray:
    return np.clip(np.floor(values + 0.5), 0.0, 255.0).astype(np.uint8)


def _apply_lut(img: np.ndarray, lut: np.ndarray) -> np.ndarray:
    return lut[img]


def _reflect_pad_br(img: np.ndarray, ph: int, pw: int) -> np.ndarray:
    """Pad bottom/right to (ph, pw) with reflect-101 indexing."""
    from ..kernels._fallback import _reflect101

    h, w = img.shape
    rows = _reflect101(np.arange(ph, dtype=np.int64), h)
    cols = _reflect101(np.arange(pw, dtype=np.int64), w)
    return np.ascontiguousarray(img[np.ix_(rows, cols)])


def clahe(img: np.ndarray, clip_limit: float, tiles: tuple[int, int]) -> np.ndarray:
    """Contrast-limited adaptive histogram equalization.

    Per tile: 256-bin histogram, clipped at clip_limit * area / 256 with the
    excess redistributed uniformly, then a cdf-min normalized equalization
    LUT. Tile LUTs are blended bilinearly per pixel.
    """
    if clip_limit < 1.0:
        raise ValidationError("clip_limit must be >= 1")
    tr, tc = tiles
    if tr < 1 or tc < 1:
        raise ValidationError("degenerate tile grid")
    h, w = img.shape
    tile_h = -(-h // tr)
    tile_w = -(-w // tc)
    padded = _reflect_pad_br(img, tile_h * tr, tile_w * tc)

    area = tile_h * tile_w
    limit = max(1, int(clip_limit * area / 256.0))
    luts = np.empty((tr, tc, 256), dtype=np.float64)
    ramp = np.arange(256, dtype=np.float64)
    for i in range(tr):
        for j in range(tc):
            tile = padded[i * tile_h : (i + 1) * tile_h, j * tile_w : (j + 1) * tile_w]
            hist = np.bincount(tile.ravel(), minlength=256).astype(np.int64)
            clipped = np.minimum(hist, limit)
            excess = int(hist.sum() - clipped.sum())
            clipped += excess // 256
            clipped[: excess % 256] += 1
            cdf = np.cumsum(clipped)
            cdf_min = int(cdf[np.nonzero(clipped)[0][0]])
            if cdf_min == area:
                luts[i, j] = ramp
            else:
                luts[i, j] = np.clip(
                    np.floor((cdf - cdf_min) * 255.0 / (area - cdf_min) + 0.5), 0.0, 255.0
                )
    out = kernels.clahe_interp_u8(padded, luts, tile_h, tile_w)
    return np.ascontiguousarray(out[:h, :w])


def coarse_dropout(img: np.ndarray, holes: int, hole_size: int, rng: RngStream) -> np.ndarray:
    h, w = img.shape
    if hole_size >= min(h, w):
        raise ValidationError(f"hole_size {hole_size} must be smaller than min side {min(h, w)}")
    out = img.copy()
    for _ in range(holes):
        top = rng.integer(0, h - hole_size + 1)
        left = rng.integer(0, w - hole_size + 1)
        out[top : top + hole_size, left : left + hole_size] = 0
    return out


def grid_dropout(img: np.ndarray, params: GridDropoutParams, rng: RngStream) -> np.ndarray:
    h, w = img.shape
    off_y = rng.integer(0, params.cell)
    off_x = rng.integer(0, params.cell)
    hole = int(params.cell * params.ratio)
    if hole == 0:
        return img.copy()
    rows = ((np.arange(h) - off_y) % params.cell) < hole
    cols = ((np.arange(w) - off_x) % params.cell) < hole
    out = img.copy()
    out[np.ix_(rows, cols)] = 0
    return out


def gaussian_blur(img: np.ndarray, ksize: int) -> np.ndarray:
    # Width follows the usual kernel-size heuristic so blur strength tracks k.
    sigma = 0.3 * ((ksize - 1) * 0.5 - 1.0) + 0.8
    radius = ksize // 2
    xs = np.arange(-radius, radius + 1, dtype=np.float64)
    wts = np.exp(-(xs * xs) / (2.0 * sigma * sigma))
    wts /= wts.sum()
    res = kernels.sepconv2d_f64(np.ascontiguousarray(img, dtype=np.float64), wts)
    return _round_u8(res)


def median_blur(img: np.ndarray, ksize: int) -> np.ndarray:
    return kernels.median_filter_u8(np.ascontiguousarray(img, dtype=np.uint8), ksize)


def image_compression(img: np.ndarray, quality: int) -> np.ndarray:
    buf = io.BytesIO()
    PILImage.fromarray(img, mode="L").save(buf, format="JPEG", quality=int(quality))
    buf.seek(0)
    with PILImage.open(buf) as decoded:
        return np.asarray(decoded.convert("L"), dtype=np.uint8)


def posterize(img: np.ndarray, bits: int) -> np.ndarray:
    keep = np.uint8(0xFF << (8 - bits) & 0xFF)
    return img & keep


def brightness_contrast_lut(alpha: float, beta: float) -> np.ndarray:
    ramp = np.arange(256, dtype=np.float64)
    return _round_u8(ramp * alpha + beta * 255.0)


def gamma_lut(gamma: float) -> np.ndarray:
    ramp = np.arange(256, dtype=np.float64)
    return _round_u8(255.0 * np.power(ramp / 255.0, gamma))


def random_snow(img: np.ndarray, coeff: float, rng: RngStream) -> np.ndarray:
    """Brighten sparse vertical streaks; speck density scales with coeff."""
    h, w = img.shape
    count = int(round(coeff * h * w / 256.0))
    out = img.copy()
    for _ in range(count):
        y = rng.integer(0, h)
        x = rng.integer(0, w)
        length = rng.integer(4, 13)
        seg = out[y : min(y + length, h), x].astype(np.float64)
        out[y : min(y + length, h), x] = _round_u8(seg * 1.5)
    return out


_IDENTITY_3X3 = np.array([[0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.0]])


def emboss(img: np.ndarray, alpha: float, strength: float) -> np.ndarray:
    effect = np.array(
        [
            [-1.0 - strength, -strength, 0.0],
            [-strength, 1.0, strength],
            [0.0, strength, 1.0 + strength],
        ]
    )
    kernel = (1.0 - alpha) * _IDENTITY_3X3 + alpha * effect
    res = kernels.conv3x3_f64(np.ascontiguousarray(img, dtype=np.float64), np.ascontiguousarray(kernel))
    return _round_u8(res)


def sharpen(img: np.ndarray, alpha: float, lightness: float) -> np.ndarray:
    effect = np.array(
        [
            [-1.0, -1.0, -1.0],
            [-1.0, 8.0 + lightness, -1.0],
            [-1.0, -1.0, -1.0],
        ]
    )
    kernel = (1.0 - alpha) * _IDENTITY_3X3 + alpha * effect
    res = kernels.conv3x3_f64(np.ascontiguousarray(img, dtype=np.float64), np.ascontiguousarray(kernel))
    return _round_u8(res)


def apply_pixel_kind(img: np.ndarray, kind_value: str, params, rng: RngStream) -> np.ndarray:
    """Draw this kind's parameters from rng and transform the image."""
    if kind_value == "CLAHE":
        assert isinstance(params, ClaheParams)
        clip = rng.uniform(*params.clip_range)
        return clahe(img, clip, params.tiles)
    if kind_value == "CoarseDropout":
        assert isinstance(params, CoarseDropoutParams)
        return coarse_dropout(img, params.holes, params.hole_size, rng)
    if kind_value == "Emboss":
        assert isinstance(params, EmbossParams)
        alpha = rng.uniform(*params.alpha_range)
        strength = rng.uniform(*params.strength_range)
        return emboss(img, alpha, strength)
    if kind_value == "GaussianBlur":
        assert isinstance(params, GaussianBlurParams)
        return gaussian_blur(img, rng.choice(params.kernel_choices))
    if kind_value == "GridDropout":
        assert isinstance(params, GridDropoutParams)
        return grid_dropout(img, params, rng)
    if kind_value == "ImageCompression":
        assert isinstance(params, ImageCompressionParams)
        lo, hi = params.quality_range
        return image_compression(img, rng.integer(lo, hi + 1))
    if kind_value == "MedianBlur":
        assert isinstance(params, MedianBlurParams)
        return median_blur(img, rng.choice(params.kernel_choices))
    if kind_value == "Posterize":
        assert isinstance(params, PosterizeParams)
        return posterize(img, params.bits)
    if kind_value == "RandomBrightnessContrast":
        assert isinstance(params, BrightnessContrastParams)
        alpha = 1.0 + rng.uniform(*params.contrast_range)
        beta = rng.uniform(*params.brightness_range)
        return _apply_lut(img, brightness_contrast_lut(alpha, beta))
    if kind_value == "RandomGamma":
        assert isinstance(params, RandomGammaParams)
        return _apply_lut(img, gamma_lut(rng.uniform(*params.gamma_range)))
    if kind_value == "RandomSnow":
        assert isinstance(params, RandomSnowParams)
        return random_snow(img, rng.uniform(*params.coeff_range), rng)
    if kind_value == "Sharpen":
        assert isinstance(params, SharpenParams)
        alpha = rng.uniform(*params.alpha_range)
        lightness = rng.uniform(*params.lightness_range)
        return sharpen(img, alpha, lightness)
    raise ValidationError(f"not a pixel kind: {kind_value}")
