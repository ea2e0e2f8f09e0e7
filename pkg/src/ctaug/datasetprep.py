"""Dataset filtering, class remapping, splitting, fold planning, balancing.

Five source datasets arrive with five different mask encodings; a per-dataset
LabelMap translates raw values into canonical class ids and declares which
ids are lesions and which are lung-only. Everything downstream of the
translate step speaks canonical ids.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .core.image import Mask, Sample
from .core.rng import RngStream
from .errors import DataError, ValidationError


@dataclass(frozen=True)
class LabelMap:
    dataset_id: str
    raw_to_class: dict[int, int]
    lesion_classes: frozenset[int]
    lung_only_classes: frozenset[int] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "raw_to_class", dict(self.raw_to_class))
        object.__setattr__(self, "lesion_classes", frozenset(self.lesion_classes))
        object.__setattr__(self, "lung_only_classes", frozenset(self.lung_only_classes))
        if self.raw_to_class.get(0) != 0:
            raise ValidationError(f"{self.dataset_id}: raw value 0 must map to background class 0")
        if self.lesion_classes & self.lung_only_classes:
            raise ValidationError(f"{self.dataset_id}: lesion and lung-only classes overlap")
        if 0 in self.lesion_classes or 0 in self.lung_only_classes:
            raise ValidationError(f"{self.dataset_id}: background cannot be lesion or lung-only")

    def translate(self, raw: np.ndarray) -> np.ndarray:
        present = np.unique(raw)
        unknown = [int(v) for v in present if int(v) not in self.raw_to_class]
        if unknown:
            raise ValidationError(f"{self.dataset_id}: unknown label value(s) {unknown}")
        lut = np.zeros(256, dtype=np.uint8)
        for rv, cls in self.raw_to_class.items():
            lut[rv] = cls
        return lut[raw]

    def classes_of(self, mask: Mask) -> set[int]:
        return {int(v) for v in np.unique(mask.labels)}


# Label space produced by remap_binary; re-remapping through this map is the
# identity, which is what makes binarization idempotent.
BINARY_LABEL_MAP = LabelMap(
    dataset_id="binary",
    raw_to_class={0: 0, 1: 1},
    lesion_classes=frozenset({1}),
)


def load_label_map(path: str | Path) -> LabelMap:
    p = Path(path)
    if not p.is_file():
        raise DataError(f"label map not found: {p}")
    with open(p, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"{p}: invalid JSON: {exc}") from exc
    try:
        return LabelMap(
            dataset_id=obj["dataset_id"],
            raw_to_class={int(k): int(v) for k, v in obj["raw_to_class"].items()},
            lesion_classes=frozenset(int(v) for v in obj["lesion_classes"]),
            lung_only_classes=frozenset(int(v) for v in obj.get("lung_only_classes", [])),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{p}: malformed label map: {exc}") from exc


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignments: dict[str, int]
    test_ids: frozenset[str]

    def __post_init__(self) -> None:
        object.__setattr__(self, "assignments", dict(self.assignments))
        object.__setattr__(self, "test_ids", frozenset(self.test_ids))
        if set(self.assignments) & self.test_ids:
            raise ValidationError("train folds and test ids overlap")
        sizes = self.fold_sizes()
        if sizes and max(sizes) - min(sizes) > 1:
            raise ValidationError(f"fold sizes differ by more than 1: {sizes}")

    def fold_sizes(self) -> list[int]:
        sizes = [0] * self.k
        for fold in self.assignments.values():
            sizes[fold] += 1
        return sizes


@dataclass(frozen=True)
class BalanceReport:
    rows: tuple[dict, ...]

    def to_json(self) -> str:
        return json.dumps({"datasets": list(self.rows)}, indent=2, sort_keys=True)


def has_lesion(sample_or_labels: Sample | np.ndarray, label_map: LabelMap) -> bool:
    labels = (
        sample_or_labels.mask.labels
        if isinstance(sample_or_labels, Sample)
        else np.asarray(sample_or_labels)
    )
    present = {int(v) for v in np.unique(labels)}
    return bool(present & label_map.lesion_classes)


def filter_samples(
    samples: Sequence[Sample], label_map: LabelMap
) -> tuple[list[Sample], list[Sample]]:
    """Drop samples with no lesion pixels (all-background or lung-only masks)."""
    kept, removed = [], []
    for s in samples:
        (kept if has_lesion(s, label_map) else removed).append(s)
    return kept, removed


def remap_binary(sample: Sample, label_map: LabelMap) -> Sample:
    """Lesion classes -> 1, everything else -> 0; image untouched."""
    known = set(label_map.raw_to_class.values())
    present = {int(v) for v in np.unique(sample.mask.labels)}
    unknown = present - known
    if unknown:
        raise ValidationError(f"{sample.sample_id}: labels {sorted(unknown)} not in label map")
    lut = np.zeros(256, dtype=np.uint8)
    for cls in label_map.lesion_classes:
        lut[cls] = 1
    return Sample(
        image=sample.image,
        mask=Mask(lut[sample.mask.labels]),
        dataset_id=sample.dataset_id,
        sample_id=sample.sample_id,
    )


def split_pareto(samples: Sequence[Sample], rng: RngStream) -> tuple[list[Sample], list[Sample]]:
    """Seeded shuffle, then ceil(0.8 N) train / rest test."""
    n = len(samples)
    if n < 5:
        raise ValidationError(f"need at least 5 samples to split, got {n}")
    order = rng.permutation(n)
    n_train = math.ceil(0.8 * n)
    train = [samples[i] for i in order[:n_train]]
    test = [samples[i] for i in order[n_train:]]
    return train, test


def make_folds(
    train: Sequence[Sample], k: int, rng: RngStream, test_ids: frozenset[str] = frozenset()
) -> FoldPlan:
    """Shuffled round-robin assignment into k folds."""
    if k < 2:
        raise ValidationError(f"k must be >= 2, got {k}")
    if k > len(train):
        raise ValidationError(f"k = {k} exceeds training-set size {len(train)}")
    order = rng.permutation(len(train))
    assignments = {train[idx].sample_id: pos % k for pos, idx in enumerate(order)}
    if len(assignments) != len(train):
        raise ValidationError("duplicate sample_id in training set")
    return FoldPlan(k=k, assignments=assignments, test_ids=test_ids)


def balance_factors(sizes: dict[str, int]) -> dict[str, int]:
    """Replication factor per dataset: ceil(|largest| / |dataset|)."""
    if len(sizes) < 2:
        raise ValidationError("balancing needs at least 2 datasets")
    for ds, n in sizes.items():
        if n <= 0:
            raise ValidationError(f"dataset {ds!r} is empty")
    largest = max(sizes.values())
    return {ds: math.ceil(largest / n) for ds, n in sizes.items()}


def balance_unified(
    train_sets: dict[str, list[Sample]],
    label_maps: dict[str, LabelMap],
) -> tuple[list[tuple[Sample, int]], BalanceReport]:
    """Binary-remap every sample, replicate smaller datasets, concatenate.

    Returns (sample, replicate_index) pairs; replication is positional, no
    pixel data is duplicated on disk.
    """
    factors = balance_factors({ds: len(samples) for ds, samples in train_sets.items()})
    unified: list[tuple[Sample, int]] = []
    rows = []
    for ds, samples in train_sets.items():
        if ds not in label_maps:
            raise ValidationError(f"no label map for dataset {ds!r}")
        remapped = [remap_binary(s, label_maps[ds]) for s in samples]
        n_i = factors[ds]
        for r in range(n_i):
            unified.extend((s, r) for s in remapped)
        rows.append(
            {
                "dataset_id": ds,
                "size": len(samples),
                "factor": n_i,
                "replicated_size": n_i * len(samples),
            }
        )
    return unified, BalanceReport(rows=tuple(rows))
