import csv
import json
from pathlib import Path

import numpy as np
import pytest

from ctaug.cli import main
from ctaug.core import read_manifest
from ctaug.core.io import read_raster, write_raster
from fixtures import build_workspace


@pytest.fixture
def workspace(tmp_path):
    return build_workspace(
        tmp_path,
        datasets={
            "alpha": {"n": 30, "n_empty": 3, "n_lung_only": 2},
            "beta": {"n": 12, "n_empty": 1, "n_lung_only": 0},
        },
    )


def run(*argv):
    return main([str(a) for a in argv])


def test_prepare_writes_manifests_and_reports(workspace, capsys):
    assert run("--config", workspace["config"], "prepare") == 0
    out = workspace["out"]
    removals = json.loads((out / "reports" / "removals.json").read_text())
    assert removals["alpha"]["removed"] == 5
    assert removals["beta"]["removed"] == 1
    assert len(removals["alpha"]["removed_ids"]) == 5

    train = read_manifest(out / "manifests" / "alpha_train.jsonl")
    test = read_manifest(out / "manifests" / "alpha_test.jsonl")
    assert len(train) == 20 and len(test) == 5  # ceil(0.8 * 25)
    folds = [r.fold for r in train]
    sizes = [folds.count(k) for k in range(5)]
    assert max(sizes) - min(sizes) <= 1 and sum(sizes) == 20
    assert all(r.fold is None for r in test)

    balance = json.loads((out / "reports" / "balance.json").read_text())
    rows = {r["dataset_id"]: r for r in balance["datasets"]}
    assert rows["alpha"]["factor"] == 1
    # beta: 9 kept -> ceil(0.8*11)=9 train; alpha train 20 -> factor ceil(20/9)=3
    assert rows["beta"]["factor"] == -(-rows["alpha"]["replicated_size"] // rows["beta"]["size"])
    unified = read_manifest(out / "manifests" / "unified_train.jsonl")
    assert len(unified) == sum(r["replicated_size"] for r in rows.values())


def test_prepare_is_deterministic(workspace, tmp_path):
    assert run("--config", workspace["config"], "prepare") == 0
    first = (workspace["out"] / "manifests" / "alpha_train.jsonl").read_text()
    assert run("--config", workspace["config"], "prepare") == 0
    assert (workspace["out"] / "manifests" / "alpha_train.jsonl").read_text() == first


def write_plan(path: Path, kind="Flip", probability=1.0, params=None):
    rec = {"kind": kind, "probability": probability}
    if params:
        rec["params"] = params
    path.write_text(json.dumps([rec]))
    return path


def test_augment_offline_p0_keeps_manifest(workspace, tmp_path):
    run("--config", workspace["config"], "prepare")
    plan = write_plan(tmp_path / "plan.json", probability=0.0)
    manifest = workspace["out"] / "manifests" / "alpha_train.jsonl"
    before = read_manifest(manifest)
    assert run("--config", workspace["config"], "augment", "--manifest", manifest,
               "--plan", plan, "--mode", "offline") == 0
    after = read_manifest(workspace["out"] / "manifests" / "augmented_train.jsonl")
    assert after == before


def test_augment_offline_expands_by_fraction(workspace, tmp_path):
    run("--config", workspace["config"], "prepare")
    plan = write_plan(tmp_path / "plan.json", kind="Rotate", probability=0.2)
    manifest = workspace["out"] / "manifests" / "alpha_train.jsonl"
    assert run("--config", workspace["config"], "augment", "--manifest", manifest,
               "--plan", plan) == 0
    after = read_manifest(workspace["out"] / "manifests" / "augmented_train.jsonl")
    assert len(after) == 24  # 20 + floor(0.2 * 20)
    new = after[20:]
    for rec in new:
        assert Path(rec.image_path).is_file() and Path(rec.mask_path).is_file()


def test_augment_online_preview_deterministic(workspace, tmp_path):
    run("--config", workspace["config"], "prepare")
    plan = write_plan(tmp_path / "plan.json", kind="ShiftScaleRotate", probability=0.5)
    manifest = workspace["out"] / "manifests" / "alpha_train.jsonl"
    assert run("--config", workspace["config"], "augment", "--manifest", manifest,
               "--plan", plan, "--mode", "online-preview", "--batches", "3") == 0
    first = {
        p.name: p.read_bytes() for p in (workspace["out"] / "preview" / "images").iterdir()
    }
    assert len(first) == 12
    assert run("--config", workspace["config"], "augment", "--manifest", manifest,
               "--plan", plan, "--mode", "online-preview", "--batches", "3") == 0
    second = {
        p.name: p.read_bytes() for p in (workspace["out"] / "preview" / "images").iterdir()
    }
    assert first == second


def test_compose_expands_records(workspace):
    run("--config", workspace["config"], "prepare")
    manifest = workspace["out"] / "manifests" / "alpha_train.jsonl"
    assert run("--config", workspace["config"], "compose", "--manifest", manifest,
               "--fraction", "0.2", "--tolerance", "0.5") == 0
    after = read_manifest(workspace["out"] / "manifests" / "composed_train.jsonl")
    assert len(after) == 24
    composites = [r for r in after if r.dataset_id.startswith("composite:")]
    assert len(composites) == 4
    sidecar = (workspace["out"] / "reports" / "composites.jsonl").read_text().strip().splitlines()
    assert len(sidecar) == 4
    rec = json.loads(sidecar[0])
    assert {"healthy_id", "lesion_id", "flip", "offset", "blend_weight"} == set(rec)
    # containment: every composite lesion pixel sits inside its healthy lung
    pool_dir = workspace["pool"]
    for r in composites:
        mask = read_raster(r.mask_path)
        healthy_id = json.loads(sidecar[composites.index(r)])["healthy_id"]
        lung = read_raster(pool_dir / "lungmasks" / f"{healthy_id}.png") > 0
        assert not (mask > 0)[~lung].any()


def test_eval_perfect_and_empty_predictions(workspace):
    run("--config", workspace["config"], "prepare")
    manifest_path = workspace["out"] / "manifests" / "alpha_test.jsonl"
    records = read_manifest(manifest_path)
    pred_root = workspace["out"] / "pred"
    lesion_classes = (120, 180)
    for rec in records:
        raw = read_raster(rec.mask_path)
        pred = (np.isin(raw, lesion_classes)).astype(np.uint8) * 255
        write_raster(pred, pred_root / rec.dataset_id / "masks" / Path(rec.mask_path).name)
    assert run("--config", workspace["config"], "eval", "--manifest", manifest_path,
               "--pred-root", pred_root) == 0
    with open(workspace["out"] / "eval_per_image.csv") as fh:
        rows = [r for r in csv.DictReader(ln for ln in fh if not ln.startswith("#"))]
    assert len(rows) == len(records)
    assert all(float(r["fscore"]) == 1.0 and float(r["iou"]) == 1.0 for r in rows)

    # all-zero predictions -> fscore 0
    for rec in records:
        write_raster(np.zeros((64, 64), np.uint8),
                     pred_root / rec.dataset_id / "masks" / Path(rec.mask_path).name)
    assert run("--config", workspace["config"], "eval", "--manifest", manifest_path,
               "--pred-root", pred_root) == 0
    with open(workspace["out"] / "eval_per_image.csv") as fh:
        rows = [r for r in csv.DictReader(ln for ln in fh if not ln.startswith("#"))]
    assert all(float(r["fscore"]) == 0.0 for r in rows)


def test_eval_known_counts(workspace, tmp_path):
    # fixture with tp=1, fp=1, fn=1 -> fscore 0.5, iou 1/3
    run("--config", workspace["config"], "prepare")
    manifest_path = workspace["out"] / "manifests" / "beta_test.jsonl"
    records = read_manifest(manifest_path)
    rec = records[0]
    raw = read_raster(rec.mask_path)
    truth = np.isin(raw, (120, 180))
    ys, xs = np.nonzero(truth)
    pred = np.zeros_like(raw)
    pred[ys[0], xs[0]] = 255  # the single tp
    bg = np.argwhere(~truth)
    pred[bg[0][0], bg[0][1]] = 255  # one fp
    # remaining truth pixels become fn
    pred_root = workspace["out"] / "pred2"
    write_raster(pred, pred_root / rec.dataset_id / "masks" / Path(rec.mask_path).name)
    single_manifest = tmp_path / "single.jsonl"
    single_manifest.write_text(
        json.dumps(
            {
                "image_path": rec.image_path,
                "mask_path": rec.mask_path,
                "dataset_id": rec.dataset_id,
                "split": "test",
                "fold": None,
                "replicate_index": 0,
            }
        )
        + "\n"
    )
    assert truth.sum() >= 2
    assert run("--config", workspace["config"], "eval", "--manifest", single_manifest,
               "--pred-root", pred_root) == 0
    with open(workspace["out"] / "eval_per_image.csv") as fh:
        rows = [r for r in csv.DictReader(ln for ln in fh if not ln.startswith("#"))]
    tp, fp, fn = int(rows[0]["tp"]), int(rows[0]["fp"]), int(rows[0]["fn"])
    assert tp == 1 and fp == 1 and fn == int(truth.sum()) - 1
    expected_f = tp / (tp + (fp + fn) / 2)
    assert float(rows[0]["fscore"]) == pytest.approx(expected_f, abs=1e-6)


def test_eval_missing_prediction_exits_2(workspace):
    run("--config", workspace["config"], "prepare")
    manifest_path = workspace["out"] / "manifests" / "alpha_test.jsonl"
    pred_root = workspace["out"] / "empty_pred"
    pred_root.mkdir(parents=True)
    assert run("--config", workspace["config"], "eval", "--manifest", manifest_path,
               "--pred-root", pred_root) == 2


def test_stats_and_report_flow(workspace, tmp_path):
    scores = tmp_path / "scores.csv"
    with open(scores, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["technique", "probability", "dataset", "fold",
                         "fscore_baseline", "fscore_aug"])
        for fold in range(5):
            writer.writerow(["ElasticTransform", "0.3", "zen", fold, 0.80 + fold * 0.001,
                             0.85 + fold * 0.002])
            writer.writerow(["Flip", "0.1", "zen", fold, 0.80, 0.80])
    assert run("--config", workspace["config"], "stats", "--scores", scores) == 0
    sig = workspace["out"] / "significance.csv"
    with open(sig) as fh:
        rows = [r for r in csv.DictReader(ln for ln in fh if not ln.startswith("#"))]
    by_tech = {r["technique"]: r for r in rows}
    assert by_tech["ElasticTransform"]["reject_null"] == "true"
    assert by_tech["ElasticTransform"]["p_value"] == "0.03125"
    assert by_tech["Flip"]["warning"] != ""

    eval_csv = tmp_path / "eval.csv"
    with open(eval_csv, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["technique", "probability", "dataset", "fscore", "iou"])
        writer.writerow(["ElasticTransform", "0.3", "zen", "0.85", "0.75"])
        writer.writerow(["Flip", "0.1", "zen", "0.80", "0.70"])
    assert run("--config", workspace["config"], "report", "--eval-csv", eval_csv,
               "--stats-csv", sig) == 0
    report = (workspace["out"] / "report.csv").read_text()
    assert "true" in report

    empty = tmp_path / "empty.csv"
    empty.write_text("")
    assert run("--config", workspace["config"], "stats", "--scores", empty) == 1


def test_unknown_flag_is_validation_error(workspace):
    assert run("--config", workspace["config"], "prepare", "--bogus") == 1


def test_missing_config_is_validation_error(tmp_path):
    assert run("--config", tmp_path / "nope.json", "prepare") == 1
