"""Lesion transplantation into generated healthy-lung images.

A recipe pairs one generated healthy sample (image + predicted lung mask)
with one real lesion sample whose lung area is within a size tolerance. The
lesion sample's lung crop is aligned by lung bounding-box centers, clipped to
the healthy lung mask, alpha-blended in, and the seam is smoothed inside a
narrow band around the transplanted region's boundary.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core.image import Image, Mask, Sample
from .core.rng import RngStream
from .errors import ValidationError
from .transforms.pixel import gaussian_blur

DEFAULT_SIZE_TOLERANCE = 0.10
DEFAULT_BLEND_WEIGHT = 0.5
DEFAULT_SMOOTH_KERNEL = 5
SEAM_BAND = 2  # px on each side of the transplanted-region boundary
RETRY_BUDGET = 32


@dataclass(frozen=True)
class HealthySample:
    image: Image
    lung_mask: Mask
    source: str = "other"
    sample_id: str = ""

    def __post_init__(self) -> None:
        if self.image.pixels.shape != self.lung_mask.labels.shape:
            raise ValidationError(f"healthy sample {self.sample_id!r}: image/mask dimensions differ")
        if self.source not in ("starganv2", "stylegan2ada", "other"):
            raise ValidationError(f"unknown generator source {self.source!r}")
        if not np.any(self.lung_mask.labels):
            raise ValidationError(f"healthy sample {self.sample_id!r}: empty lung mask")


@dataclass(frozen=True)
class LesionSample:
    image: Image
    lesion_mask: Mask
    lung_mask: Mask
    sample_id: str = ""

    def __post_init__(self) -> None:
        shape = self.image.pixels.shape
        if self.lesion_mask.labels.shape != shape or self.lung_mask.labels.shape != shape:
            raise ValidationError(f"lesion sample {self.sample_id!r}: raster dimensions differ")


@dataclass(frozen=True)
class CompositeRecipe:
    healthy: HealthySample
    lesion: LesionSample
    flip_lesion: bool = False
    blend_weight: float = DEFAULT_BLEND_WEIGHT
    smooth_kernel: int = DEFAULT_SMOOTH_KERNEL
    size_tolerance: float = DEFAULT_SIZE_TOLERANCE

    def __post_init__(self) -> None:
        if not 0.0 < self.blend_weight < 1.0:
            raise ValidationError("blend_weight must be in (0, 1)")
        if self.smooth_kernel < 3 or self.smooth_kernel % 2 == 0:
            raise ValidationError("smooth_kernel must be odd and >= 3")
        if self.size_tolerance < 0:
            raise ValidationError("size_tolerance must be >= 0")


@dataclass(frozen=True)
class CompositeSample:
    sample: Sample
    recipe: CompositeRecipe
    provenance: dict

    def as_sample(self) -> Sample:
        return self.sample


def lung_area(mask: Mask | np.ndarray) -> int:
    labels = mask.labels if isinstance(mask, Mask) else mask
    return int(np.count_nonzero(labels))


def _ratio_ok(lesion_area: int, healthy_area: int, tolerance: float) -> bool:
    # |l/h - 1| <= tol, evaluated as |l - h| <= tol*h so integer-area cases
    # like (1100, 1000, 0.10) stay exactly on the inclusive boundary.
    return abs(lesion_area - healthy_area) <= tolerance * healthy_area


def match_candidates(
    healthy: HealthySample, pool: Sequence[LesionSample], tolerance: float
) -> list[LesionSample]:
    """Pool members whose lung area is within +-tolerance of the healthy one."""
    if tolerance < 0:
        raise ValidationError("tolerance must be >= 0")
    area_h = lung_area(healthy.lung_mask)
    if area_h == 0:
        raise ValidationError("healthy lung area is zero")
    return [c for c in pool if _ratio_ok(lung_area(c.lung_mask), area_h, tolerance)]


def _bbox_center(mask: np.ndarray) -> tuple[float, float]:
    rows = np.any(mask, axis=1)
    cols = np.any(mask, axis=0)
    rmin, rmax = np.nonzero(rows)[0][[0, -1]]
    cmin, cmax = np.nonzero(cols)[0][[0, -1]]
    return ((rmin + rmax) / 2.0, (cmin + cmax) / 2.0)


def _shift_2d(arr: np.ndarray, dy: int, dx: int) -> np.ndarray:
    """Integer translation with zero fill."""
    h, w = arr.shape
    out = np.zeros_like(arr)
    src_y0, src_y1 = max(0, -dy), min(h, h - dy)
    src_x0, src_x1 = max(0, -dx), min(w, w - dx)
    if src_y0 >= src_y1 or src_x0 >= src_x1:
        return out
    out[src_y0 + dy : src_y1 + dy, src_x0 + dx : src_x1 + dx] = arr[src_y0:src_y1, src_x0:src_x1]
    return out


def _dilate(mask: np.ndarray, iterations: int) -> np.ndarray:
    out = mask.copy()
    for _ in range(iterations):
        grown = out.copy()
        grown[1:, :] |= out[:-1, :]
        grown[:-1, :] |= out[1:, :]
        grown[:, 1:] |= out[:, :-1]
        grown[:, :-1] |= out[:, 1:]
        grown[1:, 1:] |= out[:-1, :-1]
        grown[1:, :-1] |= out[:-1, 1:]
        grown[:-1, 1:] |= out[1:, :-1]
        grown[:-1, :-1] |= out[1:, 1:]
        out = grown
    return out


def _erode(mask: np.ndarray, iterations: int) -> np.ndarray:
    return ~_dilate(~mask, iterations)


def compose(recipe: CompositeRecipe) -> CompositeSample:
    """Build one composite; every output lesion pixel lies inside the lung."""
    healthy = recipe.healthy
    lesion = recipe.lesion
    area_h = lung_area(healthy.lung_mask)
    area_l = lung_area(lesion.lung_mask)
    if area_l == 0:
        raise ValidationError(f"lesion sample {lesion.sample_id!r}: empty lung mask")
    if not _ratio_ok(area_l, area_h, recipe.size_tolerance):
        raise ValidationError(
            f"recipe violates size rule: lung-area ratio {area_l / area_h:.4f} "
            f"outside 1 +- {recipe.size_tolerance}"
        )
    if healthy.image.pixels.shape != lesion.image.pixels.shape:
        raise ValidationError("healthy and lesion rasters must share dimensions")

    les_img = lesion.image.pixels
    les_mask = lesion.lesion_mask.labels
    les_lung = lesion.lung_mask.labels
    if recipe.flip_lesion:
        les_img = les_img[:, ::-1]
        les_mask = les_mask[:, ::-1]
        les_lung = les_lung[:, ::-1]

    center_h = _bbox_center(healthy.lung_mask.labels)
    center_l = _bbox_center(les_lung)
    dy = int(np.floor(center_h[0] - center_l[0] + 0.5))
    dx = int(np.floor(center_h[1] - center_l[1] + 0.5))

    lung_bool = les_lung > 0
    moved_img = _shift_2d(np.where(lung_bool, les_img, 0), dy, dx)
    moved_lung = _shift_2d(lung_bool.astype(np.uint8), dy, dx)
    moved_lesion = _shift_2d((les_mask > 0).astype(np.uint8), dy, dx)

    healthy_lung = healthy.lung_mask.labels > 0
    region = (moved_lung > 0) & healthy_lung
    if not region.any():
        raise ValidationError("degenerate composite: no lesion-sample lung pixels survive clipping")

    w = recipe.blend_weight
    base = healthy.image.pixels.astype(np.float64)
    blended = np.floor(w * moved_img.astype(np.float64) + (1.0 - w) * base + 0.5)
    out_img = np.where(region, blended, base).astype(np.uint8)

    band = _dilate(region, SEAM_BAND) & ~_erode(region, SEAM_BAND)
    smoothed = gaussian_blur(out_img, recipe.smooth_kernel)
    out_img = np.where(band, smoothed, out_img)

    out_mask = ((moved_lesion > 0) & healthy_lung).astype(np.uint8)
    sample = Sample(
        image=Image(out_img),
        mask=Mask(out_mask),
        dataset_id=f"composite:{healthy.source}",
        sample_id=f"{healthy.sample_id}+{lesion.sample_id}" + ("+f" if recipe.flip_lesion else ""),
    )
    provenance = {
        "healthy_id": healthy.sample_id,
        "lesion_id": lesion.sample_id,
        "flip": recipe.flip_lesion,
        "offset": [dy, dx],
        "blend_weight": recipe.blend_weight,
    }
    return CompositeSample(sample=sample, recipe=recipe, provenance=provenance)


def expand_offline(
    train: Sequence[Sample],
    healthy_pool: Sequence[HealthySample],
    lesion_pool: Sequence[LesionSample],
    fraction: float,
    rng: RngStream,
    flip_lesion: bool = False,
    blend_weight: float = DEFAULT_BLEND_WEIGHT,
    smooth_kernel: int = DEFAULT_SMOOTH_KERNEL,
    size_tolerance: float = DEFAULT_SIZE_TOLERANCE,
) -> tuple[list[Sample], list[CompositeSample]]:
    """Append floor(fraction * |train|) composites to the training list.

    Recipes are drawn sequentially from one stream; a healthy image with no
    size-matched lesion candidates is redrawn, up to a retry budget.
    Returns (expanded samples, the composites alone).
    """
    if not 0.0 < fraction <= 1.0:
        raise ValidationError(f"fraction must be in (0, 1], got {fraction}")
    if not healthy_pool or not lesion_pool:
        raise ValidationError("healthy and lesion pools must be non-empty")
    count = int(fraction * len(train))
    composites: list[CompositeSample] = []
    for _ in range(count):
        chosen = None
        for _attempt in range(RETRY_BUDGET):
            healthy = healthy_pool[rng.integer(0, len(healthy_pool))]
            candidates = match_candidates(healthy, lesion_pool, size_tolerance)
            if candidates:
                chosen = (healthy, candidates[rng.integer(0, len(candidates))])
                break
        if chosen is None:
            raise ValidationError(
                f"no size-matched healthy/lesion pair found in {RETRY_BUDGET} redraws"
            )
        recipe = CompositeRecipe(
            healthy=chosen[0],
            lesion=chosen[1],
            flip_lesion=flip_lesion,
            blend_weight=blend_weight,
            smooth_kernel=smooth_kernel,
            size_tolerance=size_tolerance,
        )
        composites.append(compose(recipe))
    expanded = list(train) + [c.sample for c in composites]
    return expanded, composites
