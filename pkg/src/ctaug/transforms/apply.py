"""TransformSpec and the single application entry point.

apply_transform is pure given its RngStream: same sample, spec, and stream
key give byte-identical output. Spatial kinds emit the GeometricMap they
used, so callers can re-warp rasters and verify alignment.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from ..core.image import Image, Mask, Sample
from ..core.rng import RngStream
from ..errors import ValidationError
from . import geometry, pixel
from .kinds import SPATIAL_KINDS, TransformKind, is_spatial
from .params import PARAM_TYPES, build_params


@dataclass(frozen=True)
class TransformSpec:
    kind: TransformKind
    params: Any = None

    def __post_init__(self) -> None:
        if self.params is None:
            object.__setattr__(self, "params", build_params(self.kind))
        expected = PARAM_TYPES[self.kind]
        if not isinstance(self.params, expected):
            raise ValidationError(
                f"{self.kind.value}: params must be {expected.__name__}, got {type(self.params).__name__}"
            )


def make_spec(kind: TransformKind | str, params: dict[str, Any] | None = None) -> TransformSpec:
    if isinstance(kind, str):
        try:
            kind = TransformKind(kind)
        except ValueError:
            raise ValidationError(f"unknown transform kind {kind!r}") from None
    return TransformSpec(kind=kind, params=build_params(kind, params))


_MAP_BUILDERS = {
    TransformKind.ELASTIC_TRANSFORM: geometry.elastic_map,
    TransformKind.FLIP: geometry.flip_map,
    TransformKind.GRID_DISTORTION: geometry.grid_distortion_map,
    TransformKind.OPTICAL_DISTORTION: geometry.optical_distortion_map,
    TransformKind.PIECEWISE_AFFINE: geometry.piecewise_affine_map,
    TransformKind.RANDOM_CROP: geometry.random_crop_map,
    TransformKind.ROTATE: geometry.rotate_map,
    TransformKind.SHIFT_SCALE_ROTATE: geometry.shift_scale_rotate_map,
}


def apply_transform_with_map(
    sample: Sample, spec: TransformSpec, rng: RngStream
) -> tuple[Sample, geometry.GeometricMap | None]:
    """Apply one technique; returns the shared map for spatial kinds."""
    h, w = sample.image.height, sample.image.width
    if is_spatial(spec.kind):
        gmap = _MAP_BUILDERS[spec.kind](h, w, spec.params, rng)
        out = Sample(
            image=Image(gmap.warp_image(sample.image.pixels)),
            mask=Mask(gmap.warp_mask(sample.mask.labels)),
            dataset_id=sample.dataset_id,
            sample_id=sample.sample_id,
        )
        return out, gmap
    new_img = pixel.apply_pixel_kind(sample.image.pixels, spec.kind.value, spec.params, rng)
    out = Sample(
        image=Image(new_img),
        mask=sample.mask,
        dataset_id=sample.dataset_id,
        sample_id=sample.sample_id,
    )
    return out, None


def apply_transform(sample: Sample, spec: TransformSpec, rng: RngStream) -> Sample:
    return apply_transform_with_map(sample, spec, rng)[0]


# Convenience wrappers for the individually-specified operations.

def elastic_warp(
    raster: np.ndarray, alpha: float, sigma: float, rng: RngStream
) -> tuple[np.ndarray, geometry.GeometricMap]:
    """Warp one raster elastically and return the map for reuse on its mate."""
    from .params import ElasticParams

    params = ElasticParams(alpha=alpha, sigma=sigma)
    arr = np.ascontiguousarray(raster, dtype=np.uint8)
    gmap = geometry.elastic_map(arr.shape[0], arr.shape[1], params, rng)
    return gmap.warp_image(arr), gmap


def shift_scale_rotate(
    sample: Sample,
    shift: float | tuple[float, float],
    scale: float,
    angle: float,
    rng: RngStream,
) -> Sample:
    from .params import ShiftScaleRotateParams

    sx, sy = shift if isinstance(shift, tuple) else (shift, shift)
    params = ShiftScaleRotateParams(
        shift_range=(0.0, 0.0),
        scale_range=(scale, scale),
        angle_range=(angle, angle),
        shift_x_range=(sx, sx),
        shift_y_range=(sy, sy),
    )
    return apply_transform(sample, TransformSpec(TransformKind.SHIFT_SCALE_ROTATE, params), rng)


clahe = pixel.clahe
coarse_dropout = pixel.coarse_dropout


def load_plan_records(path: str | Path) -> list[dict[str, Any]]:
    """Read the transform configuration file (a record or list of records)."""
    p = Path(path)
    if not p.is_file():
        raise ValidationError(f"transform config not found: {p}")
    with open(p, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{p}: invalid JSON: {exc}") from exc
    records = data if isinstance(data, list) else [data]
    for rec in records:
        if not isinstance(rec, dict) or "kind" not in rec:
            raise ValidationError(f"{p}: each record needs at least a 'kind' field")
        extra = set(rec) - {"kind", "probability", "params"}
        if extra:
            raise ValidationError(f"{p}: unknown record fields {sorted(extra)}")
    return records
