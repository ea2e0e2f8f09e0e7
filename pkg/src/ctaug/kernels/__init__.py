"""Hot pixel kernels with a compiled core and a pure-NumPy fallback.

The compiled extension (Cython) is preferred when it imported cleanly; both
backends produce bytewise-identical results, so everything downstream is
backend-agnostic. Selection can be forced with the ``CTAUG_KERNELS``
environment variable (``auto`` | ``compiled`` | ``fallback``), read once at
import time.
"""

from __future__ import annotations

import os

from . import _fallback

_requested = os.environ.get("CTAUG_KERNELS", "auto")
if _requested not in ("auto", "compiled", "fallback"):
    raise RuntimeError(f"CTAUG_KERNELS must be auto|compiled|fallback, got {_requested!r}")

if _requested == "fallback":
    _impl = _fallback
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        if _requested == "compiled":
            raise
        _impl = _fallback

BACKEND: str = _impl.BACKEND

warp_bilinear_u8 = _impl.warp_bilinear_u8
warp_nearest_u8 = _impl.warp_nearest_u8
sepconv2d_f64 = _impl.sepconv2d_f64
conv3x3_f64 = _impl.conv3x3_f64
median_filter_u8 = _impl.median_filter_u8
clahe_interp_u8 = _impl.clahe_interp_u8

__all__ = [
    "BACKEND",
    "warp_bilinear_u8",
    "warp_nearest_u8",
    "sepconv2d_f64",
    "conv3x3_f64",
    "median_filter_u8",
    "clahe_interp_u8",
]
