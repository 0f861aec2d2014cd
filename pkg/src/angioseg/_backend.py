"""Kernel backend selection.

The compiled extension (``angioseg._kernels``) is used when it was built;
otherwise the pure numpy/scipy fallback takes over transparently.  Set
``ANGIOSEG_KERNELS=pure`` or ``=compiled`` to force a choice (``compiled``
raises if the extension is missing).
"""

import math
import os

import numpy as np

from . import _kernels_py

_choice = os.environ.get("ANGIOSEG_KERNELS", "").strip().lower()

if _choice in ("pure", "python"):
    _impl = _kernels_py
    BACKEND = "pure"
elif _choice in ("", "compiled", "native"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        if _choice:
            raise
        _impl = _kernels_py
        BACKEND = "pure"
else:
    raise RuntimeError(f"unknown ANGIOSEG_KERNELS value: {_choice!r}")


def disk_half_widths(radius):
    """Horizontal run half-widths of the discrete disk, for dy = -r..r."""
    if radius < 1:
        raise ValueError("disk radius must be >= 1")
    r2 = radius * radius
    return np.array([math.isqrt(r2 - dy * dy) for dy in range(-radius, radius + 1)],
                    dtype=np.int64)


def slic_assign(intensity, centers, s, weight):
    intensity = np.ascontiguousarray(intensity, dtype=np.float64)
    centers = np.ascontiguousarray(centers, dtype=np.float64)
    return _impl.slic_assign(intensity, centers, float(s), float(weight))


def disk_erode(img, radius):
    img = np.ascontiguousarray(img, dtype=np.float64)
    return _impl.disk_filter(img, disk_half_widths(radius), True)


def disk_dilate(img, radius):
    img = np.ascontiguousarray(img, dtype=np.float64)
    return _impl.disk_filter(img, disk_half_widths(radius), False)


def box_sum(img, r):
    if r < 1:
        raise ValueError("box radius must be >= 1")
    img = np.ascontiguousarray(img, dtype=np.float64)
    return _impl.box_sum(img, int(r))


def best_profile_angle(img, points, offsets):
    img = np.ascontiguousarray(img, dtype=np.float64)
    points = np.ascontiguousarray(points, dtype=np.int64)
    offsets = np.ascontiguousarray(offsets, dtype=np.float64)
    if points.ndim != 2 or points.shape[1] != 2:
        raise ValueError("points must have shape (n, 2)")
    return _impl.best_profile_angle(img, points, offsets)
