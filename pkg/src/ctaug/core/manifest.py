"""Line-oriented manifests: one JSON object per line, fixed field set.

Records assign every sample to a dataset, split, fold, and replicate index.
Unknown fields are rejected so stale manifests fail loudly instead of being
silently reinterpreted. Paths are stored relative to the manifest file and
resolved against it on read, which keeps output trees byte-identical no
matter where a run is rooted.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, replace
from pathlib import Path

from ..errors import DataError, ValidationError

_FIELDS = ("image_path", "mask_path", "dataset_id", "split", "fold", "replicate_index")


@dataclass(frozen=True)
class ManifestRecord:
    image_path: str
    mask_path: str
    dataset_id: str
    split: str
    fold: int | None
    replicate_index: int = 0

    def __post_init__(self) -> None:
        if self.split not in ("train", "test"):
            raise ValidationError(f"split must be train|test, got {self.split!r}")
        if self.split == "test" and self.fold is not None:
            raise ValidationError("fold must be unset for split=test")
        if self.fold is not None and self.fold < 0:
            raise ValidationError(f"fold must be >= 0, got {self.fold}")
        if self.replicate_index < 0:
            raise ValidationError(f"replicate_index must be >= 0, got {self.replicate_index}")


def write_manifest(records: list[ManifestRecord], path: str | Path) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    base = p.parent.resolve()

    def rel(v: str) -> str:
        return os.path.relpath(Path(v).resolve(), base) if os.path.isabs(v) else v

    with open(p, "w", encoding="utf-8") as fh:
        for rec in records:
            stored = replace(rec, image_path=rel(rec.image_path), mask_path=rel(rec.mask_path))
            fh.write(json.dumps(asdict(stored), sort_keys=True) + "\n")


def read_manifest(path: str | Path) -> list[ManifestRecord]:
    p = Path(path)
    if not p.is_file():
        raise DataError(f"manifest not found: {p}")
    records = []
    with open(p, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{p}:{lineno}: invalid JSON: {exc}") from exc
            if not isinstance(obj, dict):
                raise DataError(f"{p}:{lineno}: expected a JSON object")
            unknown = set(obj) - set(_FIELDS)
            if unknown:
                raise DataError(f"{p}:{lineno}: unknown manifest fields {sorted(unknown)}")
            missing = set(_FIELDS) - set(obj)
            if missing:
                raise DataError(f"{p}:{lineno}: missing manifest fields {sorted(missing)}")
            try:
                rec = ManifestRecord(**obj)
            except ValidationError as exc:
                raise DataError(f"{p}:{lineno}: {exc}") from exc
            base = p.parent.resolve()

            def absol(v: str) -> str:
                return v if os.path.isabs(v) else os.path.normpath(os.path.join(base, v))

            records.append(
                replace(rec, image_path=absol(rec.image_path), mask_path=absol(rec.mask_path))
            )
    return records
