"""In-process bridge for running ctaug's online augmentation inside a
training loop.

The surface is exactly two functions: bind_plan validates a plan config
through the native loaders and freezes it; augment_batch_arrays pushes one
n x H x W uint8 batch (images + masks) through the per-batch gate and returns
arrays that are bytewise identical to running the native scheduler with the
same seed and keys. Inputs are wrapped zero-copy when contiguous; when the
gate does not fire the original array objects are returned unmodified.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

import ctaug
from ctaug.core.image import Image, Mask, Sample
from ctaug.errors import ValidationError
from ctaug.scheduler import AugmentationPlan, Batch, augment_batch
from ctaug.transforms import make_spec

__version__ = "0.1.0"

# Lockstep with the native library: stream keying and transform semantics
# must match exactly for the bytewise-fidelity contract to hold.
_REQUIRED_CORE = "0.1.0"
if ctaug.__version__ != _REQUIRED_CORE:
    raise ImportError(
        f"ctaug-bindings {__version__} requires ctaug=={_REQUIRED_CORE}, "
        f"found {ctaug.__version__}"
    )

__all__ = ["BoundPlan", "bind_plan", "augment_batch_arrays"]


@dataclass(frozen=True)
class BoundPlan:
    plan: AugmentationPlan
    master_seed: int


def bind_plan(config_path: str | Path) -> BoundPlan:
    """Load and natively validate a plan config.

    The file is one JSON object: {"master_seed": int, "kind": str,
    "probability": float, "params": {...}}. Validation errors from the
    native loaders propagate unchanged.
    """
    p = Path(config_path)
    if not p.is_file():
        raise ValidationError(f"plan config not found: {p}")
    with open(p, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{p}: invalid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ValidationError(f"{p}: expected a JSON object")
    unknown = set(obj) - {"master_seed", "kind", "probability", "params"}
    if unknown:
        raise ValidationError(f"{p}: unknown config keys {sorted(unknown)}")
    for key in ("master_seed", "kind", "probability"):
        if key not in obj:
            raise ValidationError(f"{p}: missing config key {key!r}")
    spec = make_spec(obj["kind"], obj.get("params"))
    plan = AugmentationPlan(spec=spec, probability=float(obj["probability"]))
    return BoundPlan(plan=plan, master_seed=int(obj["master_seed"]))


def _check_batch_array(name: str, arr: np.ndarray) -> None:
    if not isinstance(arr, np.ndarray):
        raise ValidationError(f"{name} must be a numpy array, got {type(arr).__name__}")
    if arr.dtype != np.uint8:
        raise ValidationError(f"{name} dtype must be uint8, got {arr.dtype}")
    if arr.ndim != 3:
        raise ValidationError(f"{name} must be n x H x W, got shape {arr.shape}")
    if not arr.flags.c_contiguous:
        raise ValidationError(f"{name} must be C-contiguous")


def augment_batch_arrays(
    plan: BoundPlan,
    images: np.ndarray,
    masks: np.ndarray,
    epoch: int,
    batch_index: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Gate and transform one batch; bytewise equal to the native scheduler."""
    _check_batch_array("images", images)
    _check_batch_array("masks", masks)
    if images.shape != masks.shape:
        raise ValidationError(f"shape mismatch: images {images.shape} vs masks {masks.shape}")

    samples = tuple(
        Sample(
            image=Image(images[i]),
            mask=Mask(masks[i]),
            dataset_id="bound",
            sample_id=f"b{batch_index}i{i}",
        )
        for i in range(images.shape[0])
    )
    batch = Batch(samples=samples, epoch=int(epoch), batch_index=int(batch_index))
    result = augment_batch(batch, plan.plan, plan.master_seed)
    if result is batch:  # gate miss: hand back the caller's buffers untouched
        return images, masks
    out_images = np.stack([s.image.pixels for s in result.samples])
    out_masks = np.stack([s.mask.labels for s in result.samples])
    return out_images, out_masks
