"""The 20 augmentation techniques and their category split.

SPATIAL kinds move pixels: image and mask are warped by one shared geometric
map (bilinear vs nearest resampling). PIXEL kinds recolor the image only and
must leave the mask byte-identical.
"""

from __future__ import annotations

import enum


class TransformKind(enum.Enum):
    CLAHE = "CLAHE"
    COARSE_DROPOUT = "CoarseDropout"
    ELASTIC_TRANSFORM = "ElasticTransform"
    EMBOSS = "Emboss"
    FLIP = "Flip"
    GAUSSIAN_BLUR = "GaussianBlur"
    GRID_DISTORTION = "GridDistortion"
    GRID_DROPOUT = "GridDropout"
    IMAGE_COMPRESSION = "ImageCompression"
    MEDIAN_BLUR = "MedianBlur"
    OPTICAL_DISTORTION = "OpticalDistortion"
    PIECEWISE_AFFINE = "PiecewiseAffine"
    POSTERIZE = "Posterize"
    RANDOM_BRIGHTNESS_CONTRAST = "RandomBrightnessContrast"
    RANDOM_CROP = "RandomCrop"
    RANDOM_GAMMA = "RandomGamma"
    RANDOM_SNOW = "RandomSnow"
    ROTATE = "Rotate"
    SHARPEN = "Sharpen"
    SHIFT_SCALE_ROTATE = "ShiftScaleRotate"


SPATIAL_KINDS = frozenset(
    {
        TransformKind.ELASTIC_TRANSFORM,
        TransformKind.FLIP,
        TransformKind.GRID_DISTORTION,
        TransformKind.OPTICAL_DISTORTION,
        TransformKind.PIECEWISE_AFFINE,
        TransformKind.RANDOM_CROP,
        TransformKind.ROTATE,
        TransformKind.SHIFT_SCALE_ROTATE,
    }
)

PIXEL_KINDS = frozenset(set(TransformKind) - SPATIAL_KINDS)


def is_spatial(kind: TransformKind) -> bool:
    return kind in SPATIAL_KINDS
