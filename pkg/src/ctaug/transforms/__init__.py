from .apply import (
    TransformSpec,
    apply_transform,
    apply_transform_with_map,
    clahe,
    coarse_dropout,
    elastic_warp,
    load_plan_records,
    make_spec,
    shift_scale_rotate,
)
from .geometry import GeometricMap, identity_map
from .kinds import PIXEL_KINDS, SPATIAL_KINDS, TransformKind, is_spatial
from .params import PARAM_TYPES, build_params

__all__ = [
    "TransformKind",
    "TransformSpec",
    "GeometricMap",
    "SPATIAL_KINDS",
    "PIXEL_KINDS",
    "PARAM_TYPES",
    "is_spatial",
    "identity_map",
    "make_spec",
    "build_params",
    "apply_transform",
    "apply_transform_with_map",
    "elastic_warp",
    "shift_scale_rotate",
    "clahe",
    "coarse_dropout",
    "load_plan_records",
]
