"""Synthetic dataset fixtures shared by the CLI and acceptance tests."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ctaug.core.io import write_raster


def disk(h, w, cy, cx, r):
    yy, xx = np.ogrid[:h, :w]
    return ((yy - cy) ** 2 + (xx - cx) ** 2) <= r * r


def build_dataset(root: Path, dataset_id: str, n: int, seed: int, size: int = 64,
                  n_empty: int = 0, n_lung_only: int = 0) -> None:
    """Write a tiny dataset: raw masks use 0=bg, 60=lung, 120=GGO, 180=consolidation."""
    rng = np.random.default_rng(seed)
    img_dir = root / dataset_id / "images"
    mask_dir = root / dataset_id / "masks"
    img_dir.mkdir(parents=True, exist_ok=True)
    mask_dir.mkdir(parents=True, exist_ok=True)
    for i in range(n):
        img = rng.integers(20, 230, (size, size), dtype=np.uint8)
        mask = np.zeros((size, size), dtype=np.uint8)
        lung = disk(size, size, size // 2, size // 2, size // 3)
        mask[lung] = 60
        if i < n_empty:
            mask[:] = 0
        elif i < n_empty + n_lung_only:
            pass  # lung label only, no lesion
        else:
            cy = rng.integers(size // 3, 2 * size // 3)
            cx = rng.integers(size // 3, 2 * size // 3)
            lesion = disk(size, size, cy, cx, max(2, size // 10)) & lung
            mask[lesion] = 120 if i % 2 == 0 else 180
            if not (mask >= 120).any():
                mask[size // 2, size // 2] = 120
        write_raster(img, img_dir / f"{dataset_id}_{i:04d}.png")
        write_raster(mask, mask_dir / f"{dataset_id}_{i:04d}.png")


def write_label_map(path: Path, dataset_id: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    obj = {
        "dataset_id": dataset_id,
        "raw_to_class": {"0": 0, "60": 1, "120": 2, "180": 3},
        "lesion_classes": [2, 3],
        "lung_only_classes": [1],
    }
    path.write_text(json.dumps(obj, indent=2))
    return path


def build_healthy_pool(root: Path, n: int, seed: int, size: int = 64) -> None:
    rng = np.random.default_rng(seed)
    (root / "images").mkdir(parents=True, exist_ok=True)
    (root / "lungmasks").mkdir(parents=True, exist_ok=True)
    for i in range(n):
        img = rng.integers(20, 230, (size, size), dtype=np.uint8)
        lung = disk(size, size, size // 2, size // 2, size // 3).astype(np.uint8) * 255
        write_raster(img, root / "images" / f"gen_{i:04d}.png")
        write_raster(lung, root / "lungmasks" / f"gen_{i:04d}.png")


def build_workspace(base: Path, datasets: dict[str, dict], pool_n: int = 6) -> dict:
    """Create data root, label maps, healthy pool, and a run config."""
    data_root = base / "data"
    cfg_dir = base / "cfg"
    label_maps = {}
    for i, (ds, kwargs) in enumerate(sorted(datasets.items())):
        build_dataset(data_root, ds, seed=1000 + i, **kwargs)
        label_maps[ds] = str(write_label_map(cfg_dir / f"{ds}.json", ds))
    pool_dir = base / "pool"
    build_healthy_pool(pool_dir, pool_n, seed=77)
    config = {
        "data_root": str(data_root),
        "output_root": str(base / "out"),
        "master_seed": 42,
        "label_maps": label_maps,
        "k_folds": 5,
        "unified": True,
        "healthy_pool": str(pool_dir),
        "batch_size": 4,
    }
    cfg_path = base / "config.json"
    cfg_path.write_text(json.dumps(config, indent=2))
    return {"config": cfg_path, "data_root": data_root, "pool": pool_dir, "out": base / "out"}
