"""Raster and sample I/O.

Rasters are stored as single-channel 8-bit PNGs with fixed encoder settings,
which makes saves bit-reproducible and load(save(x)) lossless. Mask files on
disk hold raw dataset-specific values; load_sample translates them into
canonical class ids through a LabelMap.
"""

from __future__ import annotations

from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np
from PIL import Image as PILImage

from ..errors import DataError, ValidationError
from .image import Image, Mask, Sample

if TYPE_CHECKING:
    from ..datasetprep import LabelMap

_PNG_OPTS = {"format": "PNG", "optimize": False, "compress_level": 6}


def read_raster(path: str | Path) -> np.ndarray:
    p = Path(path)
    if not p.is_file():
        raise DataError(f"raster not found: {p}")
    try:
        with PILImage.open(p) as im:
            if im.mode != "L":
                im = im.convert("L")
            return np.asarray(im, dtype=np.uint8)
    except DataError:
        raise
    except Exception as exc:
        raise DataError(f"cannot decode raster {p}: {exc}") from exc


def write_raster(arr: np.ndarray, path: str | Path) -> None:
    p = Path(path)
    try:
        p.parent.mkdir(parents=True, exist_ok=True)
        PILImage.fromarray(np.asarray(arr, dtype=np.uint8), mode="L").save(p, **_PNG_OPTS)
    except OSError as exc:
        raise DataError(f"cannot write raster {p}: {exc}") from exc


def load_sample(
    image_path: str | Path,
    mask_path: str | Path,
    label_map: "LabelMap",
    dataset_id: str | None = None,
    sample_id: str | None = None,
) -> Sample:
    """Load an image/mask pair and translate mask values to canonical ids."""
    img = read_raster(image_path)
    raw = read_raster(mask_path)
    if img.shape != raw.shape:
        raise DataError(
            f"dimension mismatch: image {img.shape} vs mask {raw.shape} "
            f"({image_path} / {mask_path})"
        )
    labels = label_map.translate(raw)
    return Sample(
        image=Image(img),
        mask=Mask(labels),
        dataset_id=dataset_id if dataset_id is not None else label_map.dataset_id,
        sample_id=sample_id if sample_id is not None else Path(image_path).stem,
    )


def save_sample(sample: Sample, image_path: str | Path, mask_path: str | Path) -> None:
    """Write both rasters; encoding is deterministic for equal pixel content."""
    write_raster(sample.image.pixels, image_path)
    write_raster(sample.mask.labels, mask_path)
