"""Core image operations: convolution, Gaussian-derivative filtering,
grayscale disk morphology, and rasterization primitives.

Conventions used throughout the package:

* a grayscale image is a 2-D float64 array indexed ``[row, col]`` with
  intensities nominally in [0, 1];
* a binary mask is a bool array of the same shape;
* the "x" axis is axis 0 (rows, vertical) and the "y" axis is axis 1
  (columns, horizontal), matching the derivative naming in the vesselness
  code; angles are measured from the row axis toward the column axis, so a
  horizontal direction is 90 degrees;
* every filter uses replicate (edge) borders so frame boundaries do not
  manufacture spurious valleys.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from . import _backend

GAUSS_TRUNCATE_SIGMAS = 4.0  # kernel support +-ceil(4 sigma): <1e-4 mass loss


def as_image(data):
    """Validate and convert to the canonical float64 image layout."""
    img = np.asarray(data, dtype=np.float64)
    if img.ndim != 2 or img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError(f"image must be 2-D and non-empty, got shape {img.shape}")
    if not np.all(np.isfinite(img)):
        raise ValueError("image contains non-finite values")
    return img


@dataclass(frozen=True)
class DiskSE:
    """Disk structuring element: the set {(dy, dx): dy^2 + dx^2 <= radius^2}."""

    radius: int

    def __post_init__(self):
        if self.radius < 1:
            raise ValueError("structuring element radius must be >= 1")

    def footprint(self):
        dy, dx = np.ogrid[-self.radius:self.radius + 1, -self.radius:self.radius + 1]
        return dy * dy + dx * dx <= self.radius * self.radius


def convolve(img, kernel):
    """2-D convolution with replicate borders.

    The kernel must have odd dimensions so the output stays centered.
    """
    img = as_image(img)
    kernel = np.asarray(kernel, dtype=np.float64)
    if kernel.ndim != 2:
        raise ValueError("kernel must be 2-D")
    if kernel.shape[0] % 2 == 0 or kernel.shape[1] % 2 == 0:
        raise ValueError(f"kernel dimensions must be odd, got {kernel.shape}")
    return ndimage.convolve(img, kernel, mode="nearest")


def gaussian_kernel_1d(sigma, order):
    """Sampled 1-D Gaussian (order 0) or its first/second derivative,
    truncated at +-ceil(4 sigma).  The order-0 kernel is normalized to unit
    sum so constants pass through unchanged."""
    if sigma <= 0:
        raise ValueError("sigma must be > 0")
    if order not in (0, 1, 2):
        raise ValueError("derivative order must be 0, 1 or 2")
    half = int(math.ceil(GAUSS_TRUNCATE_SIGMAS * sigma))
    x = np.arange(-half, half + 1, dtype=np.float64)
    s2 = sigma * sigma
    g = np.exp(-(x * x) / (2.0 * s2)) / (sigma * math.sqrt(2.0 * math.pi))
    if order == 0:
        g /= g.sum()
        g[half] += 1.0 - g.sum()  # force exact unit sum in float64
        return g
    if order == 1:
        k = -x / s2 * g
    else:
        k = (x * x - s2) / (s2 * s2) * g
    # truncation leaves a tiny DC component; remove it so derivative
    # responses are exactly invariant under constant intensity offsets
    k -= k.mean()
    k[half] -= k.sum()
    # calibrate the moment response: a unit ramp (order 1) or unit-curvature
    # parabola (order 2) must produce exactly 1 in the interior
    if order == 1:
        k /= -(x * k).sum()
    else:
        k /= 0.5 * (x * x * k).sum()
    return k


def gaussian_derivative(img, sigma, dx=0, dy=0, l=1):
    """Scale-normalized Gaussian derivative: sigma**l * (G_deriv * img).

    ``dx`` differentiates along axis 0 (rows) and ``dy`` along axis 1
    (columns); dx + dy must be at most 2.  ``l`` is the normalization
    exponent (1 in this pipeline).
    """
    img = as_image(img)
    if sigma <= 0:
        raise ValueError("sigma must be > 0")
    if dx < 0 or dy < 0 or dx + dy > 2:
        raise ValueError("derivative orders must be >= 0 with dx + dy <= 2")
    kx = gaussian_kernel_1d(sigma, dx)
    ky = gaussian_kernel_1d(sigma, dy)
    # convolution = correlation with the flipped kernel
    out = ndimage.correlate1d(img, kx[::-1], axis=0, mode="nearest")
    out = ndimage.correlate1d(out, ky[::-1], axis=1, mode="nearest")
    if l:
        out *= sigma ** l
    return out


def morph_erode(img, se):
    img = as_image(img)
    return _backend.disk_erode(img, se.radius)


def morph_dilate(img, se):
    img = as_image(img)
    return _backend.disk_dilate(img, se.radius)


def morph_open(img, se):
    """Grayscale opening: dilation of the erosion (anti-extensive)."""
    return morph_dilate(morph_erode(img, se), se)


def morph_close(img, se):
    """Grayscale closing: erosion of the dilation (extensive)."""
    return morph_erode(morph_dilate(img, se), se)


def raster_line(p0, p1):
    """8-connected Bresenham line between two (row, col) pixels, inclusive."""
    r0, c0 = int(p0[0]), int(p0[1])
    r1, c1 = int(p1[0]), int(p1[1])
    dr = abs(r1 - r0)
    dc = abs(c1 - c0)
    sr = 1 if r1 >= r0 else -1
    sc = 1 if c1 >= c0 else -1
    err = dr - dc
    pts = []
    r, c = r0, c0
    while True:
        pts.append((r, c))
        if r == r1 and c == c1:
            break
        e2 = 2 * err
        if e2 > -dc:
            err -= dc
            r += sr
        if e2 < dr:
            err += dr
            c += sc
    return pts


def fill_circle(center, radius, shape):
    """Discrete disk of the given radius around (row, col), clipped to shape."""
    h, w = shape
    mask = np.zeros((h, w), dtype=bool)
    cr, cc = center
    ir = int(math.floor(radius))
    r0 = max(0, int(cr) - ir)
    r1 = min(h - 1, int(cr) + ir)
    c0 = max(0, int(cc) - ir)
    c1 = min(w - 1, int(cc) + ir)
    if r1 < r0 or c1 < c0:
        return mask
    rr = np.arange(r0, r1 + 1)[:, None] - cr
    cc_ = np.arange(c0, c1 + 1)[None, :] - cc
    mask[r0:r1 + 1, c0:c1 + 1] = rr * rr + cc_ * cc_ <= radius * radius
    return mask
