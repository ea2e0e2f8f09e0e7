from .image import Image, Mask, Sample
from .io import load_sample, read_raster, save_sample, write_raster
from .manifest import ManifestRecord, read_manifest, write_manifest
from .rng import RngStream, derive_stream, item_stream

__all__ = [
    "Image",
    "Mask",
    "Sample",
    "RngStream",
    "derive_stream",
    "item_stream",
    "load_sample",
    "save_sample",
    "read_raster",
    "write_raster",
    "ManifestRecord",
    "read_manifest",
    "write_manifest",
]
