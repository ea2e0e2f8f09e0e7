"""Frozen per-kind parameter records.

Each record pins the sampling ranges a technique draws from, so a run is
reproducible from config + seed alone. Ranges may be degenerate (lo == hi),
which is how tests force exact parameter values.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Any

from ..errors import ValidationError
from .kinds import TransformKind


def _check_range(name: str, rng: tuple[float, float]) -> tuple[float, float]:
    lo, hi = float(rng[0]), float(rng[1])
    if not (lo <= hi) or lo != lo or hi != hi:
        raise ValidationError(f"{name}: invalid range ({rng[0]}, {rng[1]})")
    return (lo, hi)


@dataclass(frozen=True)
class ClaheParams:
    clip_range: tuple[float, float] = (1.0, 4.0)
    tiles: tuple[int, int] = (8, 8)

    def __post_init__(self) -> None:
        object.__setattr__(self, "clip_range", _check_range("clip_range", self.clip_range))
        if self.clip_range[0] < 1.0:
            raise ValidationError("CLAHE clip limit must be >= 1")
        if self.tiles[0] < 1 or self.tiles[1] < 1:
            raise ValidationError("CLAHE tile grid must be >= 1x1")


@dataclass(frozen=True)
class CoarseDropoutParams:
    holes: int = 8
    hole_size: int = 8

    def __post_init__(self) -> None:
        if self.holes < 0:
            raise ValidationError("holes must be >= 0")
        if self.hole_size < 1:
            raise ValidationError("hole_size must be >= 1")


@dataclass(frozen=True)
class ElasticParams:
    alpha: float = 34.0
    sigma: float = 4.0

    def __post_init__(self) -> None:
        if not (self.alpha == self.alpha and self.sigma == self.sigma):
            raise ValidationError("elastic parameters must be finite")
        if self.alpha < 0 or self.sigma <= 0:
            raise ValidationError("elastic requires alpha >= 0 and sigma > 0")


@dataclass(frozen=True)
class EmbossParams:
    alpha_range: tuple[float, float] = (0.2, 0.5)
    strength_range: tuple[float, float] = (0.2, 0.5)

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha_range", _check_range("alpha_range", self.alpha_range))
        object.__setattr__(self, "strength_range", _check_range("strength_range", self.strength_range))


@dataclass(frozen=True)
class FlipParams:
    axis: str = "random"

    def __post_init__(self) -> None:
        if self.axis not in ("random", "horizontal", "vertical", "both"):
            raise ValidationError(f"flip axis must be random|horizontal|vertical|both, got {self.axis!r}")


@dataclass(frozen=True)
class GaussianBlurParams:
    kernel_choices: tuple[int, ...] = (3, 5, 7)

    def __post_init__(self) -> None:
        for k in self.kernel_choices:
            if k < 3 or k % 2 == 0 or k > 7:
                raise ValidationError("blur kernels must be odd and in [3, 7]")


@dataclass(frozen=True)
class GridDistortionParams:
    steps: int = 5
    distort_range: tuple[float, float] = (-0.3, 0.3)

    def __post_init__(self) -> None:
        if self.steps < 1:
            raise ValidationError("steps must be >= 1")
        object.__setattr__(self, "distort_range", _check_range("distort_range", self.distort_range))
        if self.distort_range[0] <= -1.0:
            raise ValidationError("distortion must keep cell scale positive (> -1)")


@dataclass(frozen=True)
class GridDropoutParams:
    ratio: float = 0.5
    cell: int = 32

    def __post_init__(self) -> None:
        if not 0.0 <= self.ratio <= 1.0:
            raise ValidationError("ratio must be in [0, 1]")
        if self.cell < 2:
            raise ValidationError("cell must be >= 2")


@dataclass(frozen=True)
class ImageCompressionParams:
    quality_range: tuple[int, int] = (99, 100)

    def __post_init__(self) -> None:
        lo, hi = self.quality_range
        if not (1 <= lo <= hi <= 100):
            raise ValidationError("quality range must satisfy 1 <= lo <= hi <= 100")


@dataclass(frozen=True)
class MedianBlurParams:
    kernel_choices: tuple[int, ...] = (3, 5)

    def __post_init__(self) -> None:
        for k in self.kernel_choices:
            if k < 3 or k % 2 == 0 or k > 7:
                raise ValidationError("median kernels must be odd and in [3, 7]")


@dataclass(frozen=True)
class OpticalDistortionParams:
    distort_range: tuple[float, float] = (-0.05, 0.05)
    shift_range: tuple[float, float] = (-0.05, 0.05)

    def __post_init__(self) -> None:
        object.__setattr__(self, "distort_range", _check_range("distort_range", self.distort_range))
        object.__setattr__(self, "shift_range", _check_range("shift_range", self.shift_range))


@dataclass(frozen=True)
class PiecewiseAffineParams:
    grid: tuple[int, int] = (4, 4)
    jitter_std: float = 0.03

    def __post_init__(self) -> None:
        if self.grid[0] < 2 or self.grid[1] < 2:
            raise ValidationError("control lattice must be at least 2x2")
        if self.jitter_std < 0:
            raise ValidationError("jitter_std must be >= 0")


@dataclass(frozen=True)
class PosterizeParams:
    bits: int = 4

    def __post_init__(self) -> None:
        if not 1 <= self.bits <= 8:
            raise ValidationError("bits must be in [1, 8]")


@dataclass(frozen=True)
class BrightnessContrastParams:
    brightness_range: tuple[float, float] = (-0.2, 0.2)
    contrast_range: tuple[float, float] = (-0.2, 0.2)

    def __post_init__(self) -> None:
        object.__setattr__(self, "brightness_range", _check_range("brightness_range", self.brightness_range))
        object.__setattr__(self, "contrast_range", _check_range("contrast_range", self.contrast_range))


@dataclass(frozen=True)
class RandomCropParams:
    height: int = 410
    width: int = 410

    def __post_init__(self) -> None:
        if self.height < 1 or self.width < 1:
            raise ValidationError("crop window must be positive")


@dataclass(frozen=True)
class RandomGammaParams:
    gamma_range: tuple[float, float] = (0.8, 1.2)

    def __post_init__(self) -> None:
        object.__setattr__(self, "gamma_range", _check_range("gamma_range", self.gamma_range))
        if self.gamma_range[0] <= 0:
            raise ValidationError("gamma must be > 0")


@dataclass(frozen=True)
class RandomSnowParams:
    coeff_range: tuple[float, float] = (0.1, 0.3)

    def __post_init__(self) -> None:
        object.__setattr__(self, "coeff_range", _check_range("coeff_range", self.coeff_range))
        if self.coeff_range[0] < 0:
            raise ValidationError("snow coefficient must be >= 0")


@dataclass(frozen=True)
class RotateParams:
    angle_range: tuple[float, float] = (-90.0, 90.0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "angle_range", _check_range("angle_range", self.angle_range))


@dataclass(frozen=True)
class SharpenParams:
    alpha_range: tuple[float, float] = (0.2, 0.5)
    lightness_range: tuple[float, float] = (0.5, 1.0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha_range", _check_range("alpha_range", self.alpha_range))
        object.__setattr__(self, "lightness_range", _check_range("lightness_range", self.lightness_range))


@dataclass(frozen=True)
class ShiftScaleRotateParams:
    shift_range: tuple[float, float] = (-0.0625, 0.0625)
    scale_range: tuple[float, float] = (0.9, 1.1)
    angle_range: tuple[float, float] = (-45.0, 45.0)
    # Per-axis overrides; None means draw both axes from shift_range.
    shift_x_range: tuple[float, float] | None = None
    shift_y_range: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "shift_range", _check_range("shift_range", self.shift_range))
        object.__setattr__(self, "scale_range", _check_range("scale_range", self.scale_range))
        object.__setattr__(self, "angle_range", _check_range("angle_range", self.angle_range))
        for name in ("shift_x_range", "shift_y_range"):
            rng = getattr(self, name)
            if rng is not None:
                object.__setattr__(self, name, _check_range(name, rng))
        if self.scale_range[0] <= 0:
            raise ValidationError("scale must be > 0")


PARAM_TYPES: dict[TransformKind, type] = {
    TransformKind.CLAHE: ClaheParams,
    TransformKind.COARSE_DROPOUT: CoarseDropoutParams,
    TransformKind.ELASTIC_TRANSFORM: ElasticParams,
    TransformKind.EMBOSS: EmbossParams,
    TransformKind.FLIP: FlipParams,
    TransformKind.GAUSSIAN_BLUR: GaussianBlurParams,
    TransformKind.GRID_DISTORTION: GridDistortionParams,
    TransformKind.GRID_DROPOUT: GridDropoutParams,
    TransformKind.IMAGE_COMPRESSION: ImageCompressionParams,
    TransformKind.MEDIAN_BLUR: MedianBlurParams,
    TransformKind.OPTICAL_DISTORTION: OpticalDistortionParams,
    TransformKind.PIECEWISE_AFFINE: PiecewiseAffineParams,
    TransformKind.POSTERIZE: PosterizeParams,
    TransformKind.RANDOM_BRIGHTNESS_CONTRAST: BrightnessContrastParams,
    TransformKind.RANDOM_CROP: RandomCropParams,
    TransformKind.RANDOM_GAMMA: RandomGammaParams,
    TransformKind.RANDOM_SNOW: RandomSnowParams,
    TransformKind.ROTATE: RotateParams,
    TransformKind.SHARPEN: SharpenParams,
    TransformKind.SHIFT_SCALE_ROTATE: ShiftScaleRotateParams,
}


def build_params(kind: TransformKind, overrides: dict[str, Any] | None = None) -> Any:
    """Instantiate the kind's parameter record, applying config overrides."""
    cls = PARAM_TYPES[kind]
    overrides = dict(overrides or {})
    valid = {f.name for f in fields(cls)}
    unknown = set(overrides) - valid
    if unknown:
        raise ValidationError(f"{kind.value}: unknown params {sorted(unknown)}")
    coerced = {}
    for key, value in overrides.items():
        if isinstance(value, list):
            value = tuple(value)
        coerced[key] = value
    try:
        return cls(**coerced)
    except TypeError as exc:
        raise ValidationError(f"{kind.value}: bad params: {exc}") from exc
