"""Benchmark the compiled kernels against the pure-NumPy fallback.

Runs each hot kernel on a 512x512 raster, times both backends, and checks
that their outputs are byte-identical while at it.

    python benchmarks/bench_kernels.py [--size 512] [--repeat 5]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from ctaug.kernels import _fallback


def _timeit(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--size", type=int, default=512)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    try:
        from ctaug.kernels import _kernels
    except ImportError:
        print("compiled kernels not built; nothing to compare")
        return 1

    n = args.size
    rng = np.random.default_rng(0)
    img = rng.integers(0, 256, (n, n), dtype=np.uint8)
    img_f = np.ascontiguousarray(img, dtype=np.float64)
    mx = np.ascontiguousarray(rng.uniform(-2, n + 1, (n, n)))
    my = np.ascontiguousarray(rng.uniform(-2, n + 1, (n, n)))
    gauss = np.exp(-np.linspace(-3, 3, 7) ** 2 / 2)
    gauss /= gauss.sum()
    k3 = np.ascontiguousarray(rng.uniform(-1, 1, (3, 3)))
    tiles, tile = 8, n // 8
    luts = np.ascontiguousarray(np.floor(rng.uniform(0, 256, (tiles, tiles, 256))))

    cases = [
        ("warp_bilinear_u8", lambda m: m.warp_bilinear_u8(img, mx, my, 0)),
        ("warp_nearest_u8", lambda m: m.warp_nearest_u8(img, mx, my, 0)),
        ("sepconv2d_f64 (7 taps)", lambda m: m.sepconv2d_f64(img_f, gauss)),
        ("conv3x3_f64", lambda m: m.conv3x3_f64(img_f, k3)),
        ("median_filter_u8 (5x5)", lambda m: m.median_filter_u8(img, 5)),
        ("clahe_interp_u8 (8x8 tiles)", lambda m: m.clahe_interp_u8(img, luts, tile, tile)),
    ]

    print(f"raster {n}x{n}, best of {args.repeat} runs")
    print(f"{'kernel':30s} {'fallback':>12s} {'compiled':>12s} {'speedup':>9s}  equal")
    for name, call in cases:
        out_fb = call(_fallback)
        out_ck = call(_kernels)
        equal = np.array_equal(out_fb, out_ck)
        t_fb = _timeit(lambda: call(_fallback), args.repeat)
        t_ck = _timeit(lambda: call(_kernels), args.repeat)
        print(
            f"{name:30s} {t_fb * 1e3:10.2f}ms {t_ck * 1e3:10.2f}ms "
            f"{t_fb / t_ck:8.1f}x  {equal}"
        )
        if not equal:
            print(f"  !! backend outputs differ for {name}")
            return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
