"""Command-line surface: prepare -> augment/compose -> eval -> stats -> report.

Configuration comes from one JSON file plus flag overrides (flags win). Every
command is deterministic given config + seed: per-item work is keyed off the
master seed, results are ordered before writing, and CSV outputs end with a
metadata comment line recording tool version and seed.

Exit codes: 0 success, 1 validation error, 2 data error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, compositor, datasetprep, metrics, scheduler, stats
from .core import io as core_io
from .core.image import Image, Mask, Sample
from .core.manifest import ManifestRecord, read_manifest, write_manifest
from .core.rng import derive_stream
from .errors import DataError, ValidationError
from .transforms import apply_transform, load_plan_records, make_spec

PROBABILITY_PRESETS = scheduler.PRESET_PROBABILITIES


@dataclass
class RunConfig:
    data_root: Path = Path(".")
    output_root: Path = Path("out")
    master_seed: int = 0
    label_maps: dict[str, Path] = field(default_factory=dict)
    plan: Path | None = None
    probabilities: list[float] = field(default_factory=lambda: list(PROBABILITY_PRESETS))
    k_folds: int = 5
    balance_on: str = "train"
    unified: bool = False
    healthy_pool: Path | None = None
    batch_size: int = 8
    jobs: int = 1

    def validate(self) -> None:
        if not self.data_root.is_dir():
            raise ValidationError(f"data root not found: {self.data_root}")
        for ds, path in self.label_maps.items():
            if not Path(path).is_file():
                raise ValidationError(f"label map for {ds!r} not found: {path}")
        if self.plan is not None and not self.plan.is_file():
            raise ValidationError(f"plan file not found: {self.plan}")
        for p in self.probabilities:
            if not 0.0 <= p <= 1.0:
                raise ValidationError(f"probability {p} outside [0, 1]")
        if self.balance_on not in ("train", "whole"):
            raise ValidationError("balance_on must be train|whole")
        if self.k_folds < 2:
            raise ValidationError("k_folds must be >= 2")
        if self.jobs < 1:
            raise ValidationError("jobs must be >= 1")


def load_config(path: str | Path | None, args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ValidationError(f"config file not found: {p}")
        with open(p, encoding="utf-8") as fh:
            try:
                obj = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{p}: invalid JSON: {exc}") from exc
        known = {
            "data_root", "output_root", "master_seed", "label_maps", "plan",
            "probabilities", "k_folds", "balance_on", "unified", "healthy_pool",
            "batch_size", "jobs",
        }
        unknown = set(obj) - known
        if unknown:
            raise ValidationError(f"{p}: unknown config keys {sorted(unknown)}")
        base = p.parent

        def rel(v):  # paths in the config resolve relative to the config file
            q = Path(v)
            return q if q.is_absolute() else base / q

        if "data_root" in obj:
            cfg.data_root = rel(obj["data_root"])
        if "output_root" in obj:
            cfg.output_root = rel(obj["output_root"])
        if "master_seed" in obj:
            cfg.master_seed = int(obj["master_seed"])
        if "label_maps" in obj:
            cfg.label_maps = {ds: rel(v) for ds, v in obj["label_maps"].items()}
        if "plan" in obj:
            cfg.plan = rel(obj["plan"])
        if "probabilities" in obj:
            cfg.probabilities = [float(v) for v in obj["probabilities"]]
        if "k_folds" in obj:
            cfg.k_folds = int(obj["k_folds"])
        if "balance_on" in obj:
            cfg.balance_on = obj["balance_on"]
        if "unified" in obj:
            cfg.unified = bool(obj["unified"])
        if "healthy_pool" in obj:
            cfg.healthy_pool = rel(obj["healthy_pool"])
        if "batch_size" in obj:
            cfg.batch_size = int(obj["batch_size"])
        if "jobs" in obj:
            cfg.jobs = int(obj["jobs"])

    if getattr(args, "data_root", None):
        cfg.data_root = Path(args.data_root)
    if getattr(args, "out", None):
        cfg.output_root = Path(args.out)
    if getattr(args, "seed", None) is not None:
        cfg.master_seed = args.seed
    if getattr(args, "jobs", None) is not None:
        cfg.jobs = args.jobs
    return cfg


def _footer(cfg: RunConfig) -> str:
    return f"# ctaug={__version__} seed={cfg.master_seed}"


def _read_csv_rows(path: Path) -> tuple[list[str], list[dict[str, str]]]:
    if not path.is_file():
        raise DataError(f"CSV not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.DictReader(lines)
    if reader.fieldnames is None:
        raise ValidationError(f"{path}: empty CSV")
    return list(reader.fieldnames), [dict(r) for r in reader]


def _label_maps(cfg: RunConfig) -> dict[str, datasetprep.LabelMap]:
    return {ds: datasetprep.load_label_map(p) for ds, p in sorted(cfg.label_maps.items())}


def _dataset_pairs(root: Path, dataset_id: str) -> list[tuple[str, Path, Path]]:
    """(stem, image, mask) triples paired by file stem, sorted."""
    img_dir = root / dataset_id / "images"
    mask_dir = root / dataset_id / "masks"
    if not img_dir.is_dir() or not mask_dir.is_dir():
        raise DataError(f"dataset {dataset_id!r}: expected {img_dir} and {mask_dir}")
    pairs = []
    for img in sorted(img_dir.glob("*.png")):
        mask = mask_dir / img.name
        if not mask.is_file():
            raise DataError(f"dataset {dataset_id!r}: no mask for {img.name}")
        pairs.append((img.stem, img, mask))
    if not pairs:
        raise DataError(f"dataset {dataset_id!r}: no images found under {img_dir}")
    return pairs


@dataclass(frozen=True)
class _Item:
    """Lightweight stand-in for a Sample during preparation (no pixel data)."""

    sample_id: str
    image_path: Path
    mask_path: Path


# ---------------------------------------------------------------- prepare


def cmd_prepare(cfg: RunConfig, args: argparse.Namespace) -> int:
    cfg.validate()
    if not cfg.label_maps:
        raise ValidationError("prepare needs label_maps in the config")
    label_maps = _label_maps(cfg)
    out = cfg.output_root
    (out / "manifests").mkdir(parents=True, exist_ok=True)
    (out / "reports").mkdir(parents=True, exist_ok=True)

    removal_report: dict[str, dict] = {}
    train_records: dict[str, list[ManifestRecord]] = {}
    kept_counts: dict[str, int] = {}

    def scan(item: tuple[str, Path, Path], lm: datasetprep.LabelMap) -> tuple[_Item, bool]:
        stem, img, mask = item
        labels = lm.translate(core_io.read_raster(mask))
        return _Item(stem, img, mask), datasetprep.has_lesion(labels, lm)

    for ds_index, (ds, lm) in enumerate(sorted(label_maps.items())):
        pairs = _dataset_pairs(cfg.data_root, ds)
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            scanned = list(pool.map(lambda it: scan(it, lm), pairs))
        kept = [item for item, ok in scanned if ok]
        removed = [item for item, ok in scanned if not ok]
        removal_report[ds] = {
            "total": len(scanned),
            "removed": len(removed),
            "kept": len(kept),
            "removed_ids": [it.sample_id for it in removed],
        }
        if len(kept) < 5:
            raise ValidationError(f"dataset {ds!r}: fewer than 5 usable samples after filtering")

        split_rng = derive_stream(cfg.master_seed, "split", 0, ds_index)
        train, test = datasetprep.split_pareto(kept, split_rng)
        fold_rng = derive_stream(cfg.master_seed, "folds", 0, ds_index)
        plan = datasetprep.make_folds(
            train, cfg.k_folds, fold_rng, test_ids=frozenset(t.sample_id for t in test)
        )

        def rec(item: _Item, split: str, fold: int | None) -> ManifestRecord:
            return ManifestRecord(
                image_path=str(item.image_path),
                mask_path=str(item.mask_path),
                dataset_id=ds,
                split=split,
                fold=fold,
                replicate_index=0,
            )

        train_recs = [rec(t, "train", plan.assignments[t.sample_id]) for t in train]
        test_recs = [rec(t, "test", None) for t in test]
        write_manifest(train_recs, out / "manifests" / f"{ds}_train.jsonl")
        write_manifest(test_recs, out / "manifests" / f"{ds}_test.jsonl")
        train_records[ds] = train_recs
        kept_counts[ds] = len(kept)
        print(f"prepare: {ds}: kept {len(kept)}, removed {len(removed)}, "
              f"train {len(train)}, test {len(test)}")

    with open(out / "reports" / "removals.json", "w", encoding="utf-8") as fh:
        json.dump(removal_report, fh, indent=2, sort_keys=True)

    if cfg.unified:
        if len(train_records) < 2:
            raise ValidationError("unified balancing needs at least 2 datasets")
        sizes = (
            {ds: len(recs) for ds, recs in train_records.items()}
            if cfg.balance_on == "train"
            else dict(kept_counts)
        )
        factors = datasetprep.balance_factors(sizes)
        unified: list[ManifestRecord] = []
        rows = []
        for ds in sorted(train_records):
            recs = train_records[ds]
            for r in range(factors[ds]):
                for src in recs:
                    unified.append(
                        ManifestRecord(
                            image_path=src.image_path,
                            mask_path=src.mask_path,
                            dataset_id=src.dataset_id,
                            split="train",
                            fold=src.fold,
                            replicate_index=r,
                        )
                    )
            rows.append(
                {
                    "dataset_id": ds,
                    "size": sizes[ds],
                    "factor": factors[ds],
                    "replicated_size": factors[ds] * len(recs),
                }
            )
        write_manifest(unified, out / "manifests" / "unified_train.jsonl")
        report = datasetprep.BalanceReport(rows=tuple(rows))
        with open(out / "reports" / "balance.json", "w", encoding="utf-8") as fh:
            fh.write(report.to_json() + "\n")
        print(f"prepare: unified training manifest has {len(unified)} records")
    return 0


# ---------------------------------------------------------------- augment


def _load_record_sample(rec: ManifestRecord, label_maps: dict[str, datasetprep.LabelMap]) -> Sample:
    if rec.dataset_id not in label_maps:
        raise ValidationError(f"no label map for dataset {rec.dataset_id!r}")
    return core_io.load_sample(
        rec.image_path, rec.mask_path, label_maps[rec.dataset_id], sample_id=Path(rec.image_path).stem
    )


def _plan_from_args(cfg: RunConfig, args: argparse.Namespace) -> scheduler.AugmentationPlan:
    plan_path = Path(args.plan) if getattr(args, "plan", None) else cfg.plan
    if plan_path is None:
        raise ValidationError("no transform plan: pass --plan or set it in the config")
    records = load_plan_records(plan_path)
    if getattr(args, "technique", None):
        records = [r for r in records if r["kind"] == args.technique]
        if not records:
            raise ValidationError(f"technique {args.technique!r} not in plan file")
    if len(records) != 1:
        raise ValidationError(
            f"plan file holds {len(records)} techniques; select one with --technique"
        )
    rec = records[0]
    spec = make_spec(rec["kind"], rec.get("params"))
    probability = float(rec.get("probability", 1.0))
    if getattr(args, "probability", None) is not None:
        probability = args.probability
    return scheduler.AugmentationPlan(spec=spec, probability=probability)


def cmd_augment(cfg: RunConfig, args: argparse.Namespace) -> int:
    cfg.validate()
    label_maps = _label_maps(cfg)
    plan = _plan_from_args(cfg, args)
    records = read_manifest(args.manifest)
    out = cfg.output_root

    if args.mode == "online-preview":
        limit = args.batches * cfg.batch_size
        subset = records[:limit]
        samples = [_load_record_sample(r, label_maps) for r in subset]
        augmented = list(
            scheduler.augment_stream(samples, plan, cfg.batch_size, cfg.master_seed, epoch=args.epoch)
        )
        preview_dir = out / "preview"
        out_records = []
        for idx, (rec, sample) in enumerate(zip(subset, augmented)):
            img_path = preview_dir / "images" / f"{idx:05d}_{sample.sample_id}.png"
            mask_path = preview_dir / "masks" / f"{idx:05d}_{sample.sample_id}.png"
            core_io.save_sample(sample, img_path, mask_path)
            out_records.append(
                ManifestRecord(
                    image_path=str(img_path),
                    mask_path=str(mask_path),
                    dataset_id=rec.dataset_id,
                    split=rec.split,
                    fold=rec.fold,
                    replicate_index=rec.replicate_index,
                )
            )
        write_manifest(out_records, preview_dir / "manifest.jsonl")
        print(f"augment: wrote {len(out_records)} preview samples to {preview_dir}")
        return 0

    # offline: pre-generate floor(p * N) transformed copies of drawn samples
    n_new = int(plan.probability * len(records))
    aug_dir = out / "augmented"
    picker = derive_stream(cfg.master_seed, "offline-pick", args.epoch, 0)
    tasks = []
    for i in range(n_new):
        src = records[picker.integer(0, len(records))]
        tasks.append((i, src))

    def build(task: tuple[int, ManifestRecord]) -> tuple[ManifestRecord, Sample]:
        i, src = task
        sample = _load_record_sample(src, label_maps)
        rng = derive_stream(cfg.master_seed, "offline-item", args.epoch, i)
        new = apply_transform(sample, plan.spec, rng)
        sid = f"{new.sample_id}__aug{i:05d}"
        img_path = aug_dir / src.dataset_id / "images" / f"{sid}.png"
        mask_path = aug_dir / src.dataset_id / "masks" / f"{sid}.png"
        rec = ManifestRecord(
            image_path=str(img_path),
            mask_path=str(mask_path),
            dataset_id=src.dataset_id,
            split=src.split,
            fold=src.fold,
            replicate_index=src.replicate_index,
        )
        return rec, new

    with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
        built = list(pool.map(build, tasks))
    for rec, sample in built:
        core_io.save_sample(sample, rec.image_path, rec.mask_path)
    write_manifest(records + [rec for rec, _ in built], out / "manifests" / "augmented_train.jsonl")
    print(f"augment: appended {len(built)} offline samples "
          f"({len(records)} -> {len(records) + len(built)} records)")
    return 0


# ---------------------------------------------------------------- compose


def _healthy_pool(pool_dir: Path, source: str) -> list[compositor.HealthySample]:
    img_dir = pool_dir / "images"
    lung_dir = pool_dir / "lungmasks"
    if not img_dir.is_dir() or not lung_dir.is_dir():
        raise DataError(f"healthy pool needs {img_dir} and {lung_dir}")
    pool = []
    for img in sorted(img_dir.glob("*.png")):
        lung = lung_dir / img.name
        if not lung.is_file():
            raise DataError(f"healthy pool: no lung mask for {img.name}")
        pool.append(
            compositor.HealthySample(
                image=Image(core_io.read_raster(img)),
                lung_mask=Mask((core_io.read_raster(lung) > 0).astype(np.uint8)),
                source=source,
                sample_id=img.stem,
            )
        )
    if not pool:
        raise DataError(f"healthy pool is empty: {img_dir}")
    return pool


def _lesion_pool(
    records: list[ManifestRecord],
    label_maps: dict[str, datasetprep.LabelMap],
    lungmask_root: Path | None,
) -> list[compositor.LesionSample]:
    pool = []
    for rec in records:
        lm = label_maps.get(rec.dataset_id)
        if lm is None:
            raise ValidationError(f"no label map for dataset {rec.dataset_id!r}")
        sample = _load_record_sample(rec, label_maps)
        lesion = (np.isin(sample.mask.labels, sorted(lm.lesion_classes))).astype(np.uint8)
        if lungmask_root is not None:
            lung_path = lungmask_root / rec.dataset_id / "masks" / Path(rec.mask_path).name
            if not lung_path.is_file():
                raise DataError(f"no lung mask for {rec.image_path} under {lungmask_root}")
            lung = (core_io.read_raster(lung_path) > 0).astype(np.uint8)
        else:
            lung_classes = sorted(lm.lung_only_classes | lm.lesion_classes)
            lung = np.isin(sample.mask.labels, lung_classes).astype(np.uint8)
        pool.append(
            compositor.LesionSample(
                image=sample.image,
                lesion_mask=Mask(lesion),
                lung_mask=Mask(lung),
                sample_id=sample.sample_id,
            )
        )
    return pool


def cmd_compose(cfg: RunConfig, args: argparse.Namespace) -> int:
    cfg.validate()
    label_maps = _label_maps(cfg)
    pool_dir = Path(args.healthy_pool) if args.healthy_pool else cfg.healthy_pool
    if pool_dir is None:
        raise ValidationError("no healthy pool: pass --healthy-pool or set it in the config")
    records = read_manifest(args.manifest)
    healthy = _healthy_pool(pool_dir, args.healthy_source)
    lesions = _lesion_pool(records, label_maps, Path(args.lung_root) if args.lung_root else None)

    train = [
        Sample(image=l.image, mask=l.lesion_mask, dataset_id=r.dataset_id, sample_id=l.sample_id)
        for r, l in zip(records, lesions)
    ]
    rng = derive_stream(cfg.master_seed, "compose", 0, 0)
    expanded, composites = compositor.expand_offline(
        train,
        healthy,
        lesions,
        args.fraction,
        rng,
        flip_lesion=args.flip,
        size_tolerance=args.tolerance,
    )

    out = cfg.output_root
    comp_dir = out / "composites"
    (out / "reports").mkdir(parents=True, exist_ok=True)
    (out / "manifests").mkdir(parents=True, exist_ok=True)
    new_records = []
    with open(out / "reports" / "composites.jsonl", "w", encoding="utf-8") as side:
        for i, comp in enumerate(composites):
            sid = f"comp{i:05d}"
            img_path = comp_dir / "images" / f"{sid}.png"
            mask_path = comp_dir / "masks" / f"{sid}.png"
            core_io.save_sample(comp.sample, img_path, mask_path)
            new_records.append(
                ManifestRecord(
                    image_path=str(img_path),
                    mask_path=str(mask_path),
                    dataset_id=comp.sample.dataset_id,
                    split="train",
                    fold=None,
                    replicate_index=0,
                )
            )
            side.write(json.dumps(comp.provenance, sort_keys=True) + "\n")
    write_manifest(records + new_records, out / "manifests" / "composed_train.jsonl")
    print(f"compose: {len(records)} -> {len(records) + len(new_records)} records "
          f"({len(new_records)} composites)")
    return 0


# ---------------------------------------------------------------- eval


def cmd_eval(cfg: RunConfig, args: argparse.Namespace) -> int:
    cfg.validate()
    label_maps = _label_maps(cfg)
    records = read_manifest(args.manifest)
    pred_root = Path(args.pred_root)
    if not pred_root.is_dir():
        raise DataError(f"prediction root not found: {pred_root}")

    fold_dirs = sorted(d for d in pred_root.iterdir() if d.is_dir() and d.name.startswith("fold"))
    model_dirs = [(d.name, d) for d in fold_dirs] if fold_dirs else [("", pred_root)]

    tasks = []
    missing = []
    for fold_name, root in model_dirs:
        for rec in records:
            pred_path = root / rec.dataset_id / "masks" / Path(rec.mask_path).name
            if not pred_path.is_file():
                missing.append(str(pred_path))
            else:
                tasks.append((fold_name, rec, pred_path))
    if missing:
        for m in missing:
            print(f"eval: missing prediction: {m}", file=sys.stderr)
        raise DataError(f"{len(missing)} predictions missing under {pred_root}")

    def evaluate(task) -> metrics.EvalRecord:
        fold_name, rec, pred_path = task
        lm = label_maps[rec.dataset_id]
        sample = _load_record_sample(rec, label_maps)
        truth = datasetprep.remap_binary(sample, lm).mask
        pred = Mask((core_io.read_raster(pred_path) > 0).astype(np.uint8))
        meta = {"dataset": rec.dataset_id}
        if fold_name:
            meta["fold"] = fold_name
        return metrics.make_record(sample.sample_id, pred, truth, **meta)

    with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
        eval_records = list(pool.map(evaluate, tasks))

    out = cfg.output_root
    out.mkdir(parents=True, exist_ok=True)
    metrics.write_records_csv(eval_records, out / "eval_per_image.csv", footer=_footer(cfg))

    keys = ["dataset", "fold"] if fold_dirs else ["dataset"]
    per_group, collapsed = metrics.aggregate(eval_records, keys)
    with open(out / "eval_aggregate.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([*keys, "n", "fscore", "iou", "micro_fscore", "micro_iou"])
        for row in per_group:
            writer.writerow(
                [row.get(k, "") for k in keys]
                + [row["n"], f"{row['fscore']:.6f}", f"{row['iou']:.6f}",
                   f"{row['micro_fscore']:.6f}", f"{row['micro_iou']:.6f}"]
            )
        fh.write(_footer(cfg) + "\n")
    if fold_dirs:
        with open(out / "eval_aggregate_folds.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["dataset", "n_folds", "fscore", "iou"])
            for row in collapsed:
                writer.writerow([row["dataset"], row["n_folds"], f"{row['fscore']:.6f}", f"{row['iou']:.6f}"])
            fh.write(_footer(cfg) + "\n")
    print(f"eval: {len(eval_records)} images scored; aggregates in {out}")
    return 0


# ---------------------------------------------------------------- stats


_SCORE_COLUMNS = ["technique", "probability", "dataset", "fold", "fscore_baseline", "fscore_aug"]


def cmd_stats(cfg: RunConfig, args: argparse.Namespace) -> int:
    header, rows = _read_csv_rows(Path(args.scores))
    missing_cols = [c for c in _SCORE_COLUMNS if c not in header]
    if missing_cols:
        raise ValidationError(f"{args.scores}: missing columns {missing_cols}")
    if not rows:
        raise ValidationError(f"{args.scores}: no score rows")

    grouped: dict[tuple, list[dict]] = {}
    for row in rows:
        key = (row["technique"], row["probability"], row["dataset"])
        grouped.setdefault(key, []).append(row)

    pairs_by_key = {}
    for key, members in grouped.items():
        members = sorted(members, key=lambda r: r["fold"])
        try:
            x = [float(m["fscore_baseline"]) for m in members]
            y = [float(m["fscore_aug"]) for m in members]
        except ValueError as exc:
            raise ValidationError(f"{args.scores}: non-numeric score: {exc}") from exc
        pairs_by_key[key] = stats.PairedScores(x=tuple(x), y=tuple(y))

    cells = stats.significance_table(pairs_by_key, alpha=args.alpha)
    out = cfg.output_root
    out.mkdir(parents=True, exist_ok=True)
    out_csv = out / "significance.csv"
    with open(out_csv, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["technique", "probability", "dataset", "n_effective", "w_plus",
             "p_value", "reject_null", "method", "warning"]
        )
        for cell in cells:
            if cell.result is None:
                writer.writerow([*cell.key, "", "", "", "", "", cell.warning])
            else:
                r = cell.result
                writer.writerow(
                    [*cell.key, r.n_effective, r.w_plus, f"{r.p_value:.10g}",
                     str(r.reject_null).lower(), r.method, ""]
                )
        fh.write(_footer(cfg) + "\n")

    print(f"{'technique':24s} {'p':>5s} {'dataset':12s} {'p_value':>12s} flag")
    for cell in cells:
        tech, prob, ds = cell.key
        if cell.result is None:
            print(f"{tech:24s} {prob:>5s} {ds:12s} {'-':>12s} warn: {cell.warning}")
        else:
            flag = "significant" if cell.highlight else ""
            print(f"{tech:24s} {prob:>5s} {ds:12s} {cell.result.p_value:12.6f} {flag}")
    print(f"stats: wrote {out_csv}")
    return 0


# ---------------------------------------------------------------- report


def cmd_report(cfg: RunConfig, args: argparse.Namespace) -> int:
    _, eval_rows = _read_csv_rows(Path(args.eval_csv))
    _, sig_rows = _read_csv_rows(Path(args.stats_csv))
    if not eval_rows:
        raise ValidationError(f"{args.eval_csv}: no rows")

    sig_lookup = {
        (r["technique"], r["probability"], r["dataset"]): r.get("reject_null") == "true"
        for r in sig_rows
    }
    datasets = sorted({r["dataset"] for r in eval_rows})
    by_key: dict[tuple[str, str], dict[str, dict]] = {}
    for r in eval_rows:
        tech = r.get("technique", "")
        prob = r.get("probability", "")
        by_key.setdefault((tech, prob), {})[r["dataset"]] = r

    best_f = {ds: max(float(r["fscore"]) for r in eval_rows if r["dataset"] == ds) for ds in datasets}
    best_i = {ds: max(float(r["iou"]) for r in eval_rows if r["dataset"] == ds) for ds in datasets}

    out = cfg.output_root
    out.mkdir(parents=True, exist_ok=True)
    lines = []
    header = f"{'technique':24s} {'p':>5s} " + " ".join(f"{ds:>22s}" for ds in datasets)
    lines.append(header)
    for (tech, prob) in sorted(by_key):
        cells = []
        for ds in datasets:
            row = by_key[(tech, prob)].get(ds)
            if row is None:
                cells.append(f"{'-':>22s}")
                continue
            f, i = float(row["fscore"]), float(row["iou"])
            marks = ""
            if f == best_f[ds]:
                marks += "F"  # best F-score in this dataset column
            if i == best_i[ds]:
                marks += "I"  # best IoU
            if sig_lookup.get((tech, prob, ds), False):
                marks += "*"  # significant vs baseline
            cells.append(f"{f:.4f}/{i:.4f} {marks:<4s}".rjust(22))
        lines.append(f"{tech:24s} {prob:>5s} " + " ".join(cells))
    lines.append("marks: F best F-score, I best IoU, * p < alpha")
    text = "\n".join(lines)
    print(text)
    with open(out / "report.txt", "w", encoding="utf-8") as fh:
        fh.write(text + "\n" + _footer(cfg) + "\n")

    with open(out / "report.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["technique", "probability", "dataset", "fscore", "iou",
                         "best_fscore", "best_iou", "significant"])
        for (tech, prob) in sorted(by_key):
            for ds in datasets:
                row = by_key[(tech, prob)].get(ds)
                if row is None:
                    continue
                f, i = float(row["fscore"]), float(row["iou"])
                writer.writerow(
                    [tech, prob, ds, f"{f:.6f}", f"{i:.6f}",
                     str(f == best_f[ds]).lower(), str(i == best_i[ds]).lower(),
                     str(sig_lookup.get((tech, prob, ds), False)).lower()]
                )
        fh.write(_footer(cfg) + "\n")
    print(f"report: wrote {out / 'report.txt'} and {out / 'report.csv'}")
    return 0


# ---------------------------------------------------------------- entry


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems are validation errors (exit 1)
        raise ValidationError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ctaug", description=__doc__)
    parser.add_argument("--config", help="JSON run configuration")
    parser.add_argument("--seed", type=int, help="master seed (overrides config)")
    parser.add_argument("--jobs", type=int, help="worker threads for per-sample work")
    parser.add_argument("--data-root", help="dataset root directory")
    parser.add_argument("--out", help="output root directory")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("prepare", help="filter, split, fold, and balance datasets")

    p_aug = sub.add_parser("augment", help="online preview or offline expansion")
    p_aug.add_argument("--manifest", required=True)
    p_aug.add_argument("--plan", help="transform config file")
    p_aug.add_argument("--technique", help="kind name when the plan lists several")
    p_aug.add_argument("--probability", type=float, help="override plan probability")
    p_aug.add_argument("--mode", choices=["online-preview", "offline"], default="offline")
    p_aug.add_argument("--batches", type=int, default=4, help="batches to materialize in preview")
    p_aug.add_argument("--epoch", type=int, default=0)

    p_comp = sub.add_parser("compose", help="transplant lesions into generated healthy lungs")
    p_comp.add_argument("--manifest", required=True)
    p_comp.add_argument("--healthy-pool", help="directory with images/ and lungmasks/")
    p_comp.add_argument("--healthy-source", choices=["starganv2", "stylegan2ada", "other"],
                        default="other")
    p_comp.add_argument("--lung-root", help="predicted lung masks for the lesion datasets")
    p_comp.add_argument("--fraction", type=float, required=True)
    p_comp.add_argument("--flip", action="store_true", help="horizontally flip lesions first")
    p_comp.add_argument("--tolerance", type=float, default=compositor.DEFAULT_SIZE_TOLERANCE)

    p_eval = sub.add_parser("eval", help="score predictions against ground truth")
    p_eval.add_argument("--manifest", required=True)
    p_eval.add_argument("--pred-root", required=True)

    p_stats = sub.add_parser("stats", help="Wilcoxon significance over fold scores")
    p_stats.add_argument("--scores", required=True, help="CSV of per-fold paired scores")
    p_stats.add_argument("--alpha", type=float, default=stats.DEFAULT_ALPHA)

    p_rep = sub.add_parser("report", help="render the combined results table")
    p_rep.add_argument("--eval-csv", required=True)
    p_rep.add_argument("--stats-csv", required=True)
    return parser


_COMMANDS = {
    "prepare": cmd_prepare,
    "augment": cmd_augment,
    "compose": cmd_compose,
    "eval": cmd_eval,
    "stats": cmd_stats,
    "report": cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = load_config(args.config, args)
        return _COMMANDS[args.command](cfg, args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
