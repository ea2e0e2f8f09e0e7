"""Segmentation quality metrics and the Fréchet distance between embedding
distributions.

F-score and IoU are computed from per-image pixel confusion counts with
lesion = 1 as the positive class. The empty-vs-empty convention is 1.0 for
both metrics: the preparation protocol guarantees non-empty ground truths, so
the convention only touches degenerate synthetic inputs.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .core.image import Mask
from .errors import DataError, ValidationError


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self) -> None:
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise ValidationError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


def confusion(pred: Mask | np.ndarray, truth: Mask | np.ndarray) -> ConfusionCounts:
    p = pred.labels if isinstance(pred, Mask) else np.asarray(pred)
    t = truth.labels if isinstance(truth, Mask) else np.asarray(truth)
    if p.shape != t.shape:
        raise ValidationError(f"mask shapes differ: {p.shape} vs {t.shape}")
    for name, arr in (("pred", p), ("truth", t)):
        vals = np.unique(arr)
        if not np.isin(vals, (0, 1)).all():
            raise ValidationError(f"{name} mask is not binary: values {vals.tolist()}")
    pb = p == 1
    tb = t == 1
    tp = int(np.count_nonzero(pb & tb))
    fp = int(np.count_nonzero(pb & ~tb))
    fn = int(np.count_nonzero(~pb & tb))
    tn = int(np.count_nonzero(~pb & ~tb))
    return ConfusionCounts(tp=tp, fp=fp, fn=fn, tn=tn)


def fscore(c: ConfusionCounts) -> float:
    denom = c.tp + (c.fp + c.fn) / 2.0
    if denom == 0.0:
        return 1.0
    return c.tp / denom


def iou(c: ConfusionCounts) -> float:
    denom = c.tp + c.fp + c.fn
    if denom == 0:
        return 1.0
    return c.tp / denom


@dataclass(frozen=True)
class EvalRecord:
    sample_id: str
    counts: ConfusionCounts
    fscore: float
    iou: float
    meta: dict = field(default_factory=dict)


def make_record(sample_id: str, pred, truth, **meta) -> EvalRecord:
    c = confusion(pred, truth)
    return EvalRecord(sample_id=sample_id, counts=c, fscore=fscore(c), iou=iou(c), meta=dict(meta))


def aggregate(
    records: Sequence[EvalRecord], group_keys: Sequence[str]
) -> tuple[list[dict], list[dict]]:
    """Mean metrics per full group, then with the fold dimension collapsed.

    Returns (per_group, fold_collapsed). Grouping keys name entries of each
    record's meta dict; the second table averages the per-fold means, which is
    the macro convention used for reporting.
    """
    if not records:
        raise ValidationError("no records to aggregate")

    def group_rows(keys: Sequence[str]) -> list[dict]:
        groups: dict[tuple, list[EvalRecord]] = {}
        for rec in records:
            key = tuple(rec.meta.get(k) for k in keys)
            groups.setdefault(key, []).append(rec)
        rows = []
        for key in sorted(groups, key=lambda t: tuple(str(v) for v in t)):
            members = groups[key]
            row = dict(zip(keys, key))
            row["n"] = len(members)
            # macro: mean of per-image scores (the reporting default)
            row["fscore"] = sum(r.fscore for r in members) / len(members)
            row["iou"] = sum(r.iou for r in members) / len(members)
            # micro: pooled pixel counts across the group
            pooled = ConfusionCounts(
                tp=sum(r.counts.tp for r in members),
                fp=sum(r.counts.fp for r in members),
                fn=sum(r.counts.fn for r in members),
                tn=sum(r.counts.tn for r in members),
            )
            row["micro_fscore"] = fscore(pooled)
            row["micro_iou"] = iou(pooled)
            rows.append(row)
        return rows

    per_group = group_rows(group_keys)
    if "fold" not in group_keys:
        return per_group, per_group

    outer = [k for k in group_keys if k != "fold"]
    collapsed: dict[tuple, list[dict]] = {}
    for row in per_group:
        key = tuple(row[k] for k in outer)
        collapsed.setdefault(key, []).append(row)
    fold_rows = []
    for key in sorted(collapsed, key=lambda t: tuple(str(v) for v in t)):
        members = collapsed[key]
        row = dict(zip(outer, key))
        row["n_folds"] = len(members)
        row["fscore"] = sum(r["fscore"] for r in members) / len(members)
        row["iou"] = sum(r["iou"] for r in members) / len(members)
        fold_rows.append(row)
    return per_group, fold_rows


@dataclass(frozen=True)
class EmbeddingSet:
    features: np.ndarray

    def __post_init__(self) -> None:
        feats = np.ascontiguousarray(self.features, dtype=np.float64)
        if feats.ndim != 2:
            raise ValidationError(f"features must be 2-D (n, d), got shape {feats.shape}")
        if feats.shape[0] < 2:
            raise ValidationError("need n >= 2 rows for a covariance estimate")
        if not np.isfinite(feats).all():
            raise ValidationError("features must be finite")
        feats.setflags(write=False)
        object.__setattr__(self, "features", feats)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]


EIGENVALUE_FLOOR = 1e-10


def _psd_sqrt(matrix: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(matrix)
    vals = np.where(vals < EIGENVALUE_FLOOR, 0.0, vals)
    return (vecs * np.sqrt(vals)) @ vecs.T


def frechet_distance(a: EmbeddingSet, b: EmbeddingSet) -> float:
    """||mu_a - mu_b||^2 + tr(S_a + S_b - 2 (S_a S_b)^{1/2}).

    The cross term uses the symmetric product sqrt(S_a)^T S_b sqrt(S_a), whose
    eigendecomposition is numerically stable; eigenvalues below 1e-10 are
    clipped to zero.
    """
    if a.d != b.d:
        raise ValidationError(f"embedding dimensions differ: {a.d} vs {b.d}")
    mu_a = a.features.mean(axis=0)
    mu_b = b.features.mean(axis=0)
    sigma_a = np.cov(a.features, rowvar=False).reshape(a.d, a.d)
    sigma_b = np.cov(b.features, rowvar=False).reshape(b.d, b.d)

    sqrt_a = _psd_sqrt(sigma_a)
    cross = sqrt_a @ sigma_b @ sqrt_a
    cross = (cross + cross.T) / 2.0
    vals = np.linalg.eigvalsh(cross)
    vals = np.where(vals < EIGENVALUE_FLOOR, 0.0, vals)
    tr_cross = float(np.sqrt(vals).sum())

    diff = mu_a - mu_b
    result = float(diff @ diff + np.trace(sigma_a) + np.trace(sigma_b) - 2.0 * tr_cross)
    if not np.isfinite(result):
        raise ValidationError("Fréchet distance is not finite")
    return result


def load_embeddings(path: str | Path) -> EmbeddingSet:
    """Load a feature matrix: .npy, or text with an `n d` header line."""
    p = Path(path)
    if not p.is_file():
        raise DataError(f"embedding file not found: {p}")
    if p.suffix == ".npy":
        return EmbeddingSet(np.load(p))
    with open(p, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise DataError(f"{p}: first line must be 'n d'")
        try:
            n, d = int(header[0]), int(header[1])
        except ValueError as exc:
            raise DataError(f"{p}: first line must be 'n d'") from exc
        rows = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rows.append([float(v) for v in line.replace(",", " ").split()])
    feats = np.asarray(rows, dtype=np.float64)
    if feats.shape != (n, d):
        raise DataError(f"{p}: header says {(n, d)}, data is {feats.shape}")
    return EmbeddingSet(feats)


def write_records_csv(records: Sequence[EvalRecord], path: str | Path, footer: str = "") -> None:
    meta_keys = sorted({k for r in records for k in r.meta})
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sample_id", *meta_keys, "tp", "fp", "fn", "tn", "fscore", "iou"])
        for r in records:
            writer.writerow(
                [
                    r.sample_id,
                    *[r.meta.get(k, "") for k in meta_keys],
                    r.counts.tp,
                    r.counts.fp,
                    r.counts.fn,
                    r.counts.tn,
                    f"{r.fscore:.6f}",
                    f"{r.iou:.6f}",
                ]
            )
        if footer:
            fh.write(footer + "\n")
