"""Canonical image/mask/sample data model.

Rasters are single-channel 8-bit numpy arrays in row-major (H, W) layout.
All types are immutable after construction: the wrapped arrays are marked
read-only so samples can be shared freely between workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ValidationError


def _freeze(arr: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(arr, dtype=np.uint8)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Image:
    """8-bit grayscale raster."""

    pixels: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "pixels", _freeze(self.pixels))
        if self.pixels.ndim != 2 or self.pixels.shape[0] < 1 or self.pixels.shape[1] < 1:
            raise ValidationError(f"image must be 2-D and non-empty, got shape {self.pixels.shape}")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


@dataclass(frozen=True)
class Mask:
    """Per-pixel class identifiers, same layout as Image."""

    labels: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "labels", _freeze(self.labels))
        if self.labels.ndim != 2 or self.labels.shape[0] < 1 or self.labels.shape[1] < 1:
            raise ValidationError(f"mask must be 2-D and non-empty, got shape {self.labels.shape}")

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    def label_set(self) -> frozenset[int]:
        return frozenset(int(v) for v in np.unique(self.labels))


@dataclass(frozen=True)
class Sample:
    """An image/mask pair with dataset provenance."""

    image: Image
    mask: Mask
    dataset_id: str
    sample_id: str

    def __post_init__(self) -> None:
        if self.image.pixels.shape != self.mask.labels.shape:
            raise ValidationError(
                f"sample {self.sample_id!r}: image {self.image.pixels.shape} and "
                f"mask {self.mask.labels.shape} dimensions differ"
            )

    def equal_bytes(self, other: "Sample") -> bool:
        return (
            self.image.pixels.shape == other.image.pixels.shape
            and np.array_equal(self.image.pixels, other.image.pixels)
            and np.array_equal(self.mask.labels, other.mask.labels)
        )
