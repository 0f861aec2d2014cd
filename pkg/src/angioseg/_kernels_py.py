"""Pure numpy/scipy implementations of the hot kernels.

These are the reference semantics for the compiled core in ``_kernels.pyx``;
``angioseg._backend`` picks whichever is importable.  Both implementations
keep the same floating-point evaluation order so results agree to the last
few ulps (labels and morphology agree exactly).
"""

import numpy as np
from scipy.ndimage import maximum_filter1d, minimum_filter1d


def slic_assign(intensity, centers, s, weight):
    """One SLIC assignment sweep over all cluster centers.

    Parameters
    ----------
    intensity : (H, W) float64
        Image intensities in [0, 1].
    centers : (k, 3) float64
        Per-center rows of (mean intensity, row, col).
    s : float
        Grid interval S; each center claims pixels within +-S of its position.
    weight : float
        Spatial weight (m / S)**2 applied to the squared spatial distance.

    Returns
    -------
    labels : (H, W) int32
        Index of the distance-minimal center (-1 if no window covers a pixel).
    dist2 : (H, W) float64
        Squared combined distance to the assigned center.
    """
    h, w = intensity.shape
    labels = np.full((h, w), -1, dtype=np.int32)
    best = np.full((h, w), np.inf, dtype=np.float64)
    for ci in range(centers.shape[0]):
        lc, cy, cx = centers[ci]
        y0 = max(0, int(np.floor(cy - s)))
        y1 = min(h - 1, int(np.floor(cy + s)))
        x0 = max(0, int(np.floor(cx - s)))
        x1 = min(w - 1, int(np.floor(cx + s)))
        if y1 < y0 or x1 < x0:
            continue
        win = intensity[y0:y1 + 1, x0:x1 + 1]
        dl = win - lc
        dy = np.arange(y0, y1 + 1, dtype=np.float64)[:, None] - cy
        dx = np.arange(x0, x1 + 1, dtype=np.float64)[None, :] - cx
        d2 = dl * dl + (dy * dy + dx * dx) * weight
        sub = best[y0:y1 + 1, x0:x1 + 1]
        better = d2 < sub  # strict: earlier (lower) center index wins ties
        sub[better] = d2[better]
        labels[y0:y1 + 1, x0:x1 + 1][better] = ci
    return labels, best


def disk_filter(img, half_widths, take_min):
    """Erosion (take_min) or dilation over a discrete disk, replicate border.

    The disk {(dy, dx): dy^2 + dx^2 <= r^2} is decomposed into horizontal
    runs; ``half_widths[dy + r]`` is the run half-width for each row offset.
    Each run is a 1-D sliding min/max, then rows are combined across offsets.
    """
    h = img.shape[0]
    radius = (len(half_widths) - 1) // 2
    filt = minimum_filter1d if take_min else maximum_filter1d
    combine = np.minimum if take_min else np.maximum
    by_width = {}
    for wx in set(int(v) for v in half_widths):
        by_width[wx] = img if wx == 0 else filt(img, 2 * wx + 1, axis=1, mode="nearest")
    out = None
    rows = np.arange(h)
    for dy in range(-radius, radius + 1):
        src = by_width[int(half_widths[dy + radius])]
        shifted = src[np.clip(rows + dy, 0, h - 1)]
        out = shifted.copy() if out is None else combine(out, shifted, out=out)
    return out


def box_sum(img, r):
    """Sum of img over the (2r+1)^2 window around each pixel, clipped at
    the borders (windows shrink; nothing is replicated)."""
    h, w = img.shape
    ii = np.zeros((h + 1, w + 1), dtype=np.float64)
    ii[1:, 1:] = np.cumsum(np.cumsum(img, axis=0), axis=1)
    y0 = np.maximum(np.arange(h) - r, 0)
    y1 = np.minimum(np.arange(h) + r, h - 1) + 1
    x0 = np.maximum(np.arange(w) - r, 0)
    x1 = np.minimum(np.arange(w) + r, w - 1) + 1
    a = ii[np.ix_(y1, x1)]
    b = ii[np.ix_(y0, x1)]
    c = ii[np.ix_(y1, x0)]
    d = ii[np.ix_(y0, x0)]
    return a - b - c + d


def bilinear_sample(img, rows, cols):
    """Bilinear interpolation at float (row, col) positions.

    Positions must satisfy 0 <= row <= H-1 and 0 <= col <= W-1.  The
    incremental form a + f*(b - a) is exact on locally constant data, so
    flat regions produce exact ties.
    """
    h, w = img.shape
    r0 = np.minimum(np.floor(rows).astype(np.int64), h - 2) if h > 1 else np.zeros_like(rows, np.int64)
    c0 = np.minimum(np.floor(cols).astype(np.int64), w - 2) if w > 1 else np.zeros_like(cols, np.int64)
    r0 = np.maximum(r0, 0)
    c0 = np.maximum(c0, 0)
    fr = rows - r0
    fc = cols - c0
    r1 = np.minimum(r0 + 1, h - 1)
    c1 = np.minimum(c0 + 1, w - 1)
    v00 = img[r0, c0]
    v01 = img[r0, c1]
    v10 = img[r1, c0]
    v11 = img[r1, c1]
    top = v00 + fc * (v01 - v00)
    bot = v10 + fc * (v11 - v10)
    return top + fr * (bot - top)


def best_profile_angle(img, points, offsets):
    """Index of the sampling direction with the highest mean intensity.

    Parameters
    ----------
    img : (H, W) float64
    points : (n, 2) int64
        In-bounds (row, col) centers.
    offsets : (n_angles, d, 2) float64
        Per angle, per sample (drow, dcol) displacements along a diameter.

    Returns
    -------
    (n,) int32 argmax angle index per point; ties pick the smallest index.
    Samples are bilinear; positions outside the image are dropped from the
    mean (clipped diameters near the border).
    """
    h, w = img.shape
    n = points.shape[0]
    na, d = offsets.shape[0], offsets.shape[1]
    out = np.empty(n, dtype=np.int32)
    for i in range(n):
        rr = points[i, 0] + offsets[:, :, 0]
        cc = points[i, 1] + offsets[:, :, 1]
        ok = (rr >= 0.0) & (rr <= h - 1) & (cc >= 0.0) & (cc <= w - 1)
        vals = np.where(ok, bilinear_sample(img, np.where(ok, rr, 0.0), np.where(ok, cc, 0.0)), 0.0)
        counts = ok.sum(axis=1)  # >= 1: the zero offset hits the center pixel
        sums = np.zeros(na, dtype=np.float64)
        for t in range(d):  # sequential over samples: same order as the C core
            sums += vals[:, t]
        means = sums / counts
        out[i] = int(np.argmax(means))
    return out
