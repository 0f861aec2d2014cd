"""Catheter detection and tracking.

The catheter is the longest smooth ridge curve in the pre-injection first
frame: Hough voting finds the longest straight segments on the ridge map,
the connected ridge component carrying the most segments is selected, and a
second-order polynomial is fit to it.  Subsequent frames are tracked by a
local grid search over the polynomial coefficients, scoring each candidate
by the number of curve samples that land on (within 1 px of) a ridge pixel.
"""

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import ndimage


class DetectionFailed(RuntimeError):
    """No usable catheter ridge in the first frame."""


class FitFailed(ValueError):
    """Not enough points to fit the quadratic model."""


class TrackingLost(RuntimeError):
    """Best candidate curve has too little ridge support."""


@dataclass(frozen=True)
class Poly2:
    """Quadratic curve dep = a*t^2 + b*t + c.

    ``axis`` names the independent coordinate: "col" means row = f(col),
    "row" the transpose for near-vertical catheters.
    """

    a: float
    b: float
    c: float
    axis: str = "col"

    def __post_init__(self):
        if self.axis not in ("col", "row"):
            raise ValueError("axis must be 'col' or 'row'")
        if not all(math.isfinite(v) for v in (self.a, self.b, self.c)):
            raise ValueError("coefficients must be finite")

    def __call__(self, t):
        return self.a * t * t + self.b * t + self.c


@dataclass(frozen=True)
class LineSegment:
    """Straight ridge segment: endpoints, member pixels, on-ridge length."""

    p0: tuple
    p1: tuple
    pixels: np.ndarray
    length: int


@dataclass(frozen=True)
class TrackState:
    poly: Poly2
    frame_index: int
    search_window: tuple = (5e-4, 0.1, 10.0)
    fit_support: int = 0
    lost: bool = False


def sample_curve(poly, shape, step=1.0):
    """Curve samples at unit arc spacing, restricted to the image.

    Returns an (n, 2) float array of (row, col) positions whose rounded
    pixel falls inside ``shape``.
    """
    h, w = shape
    extent = (w if poly.axis == "col" else h) - 1
    if extent <= 0:
        return np.empty((0, 2))
    dense_t = np.arange(0.0, extent + 1e-9, 0.5)
    dep = poly(dense_t)
    if poly.axis == "col":
        rows, cols = dep, dense_t
    else:
        rows, cols = dense_t, dep
    arc = np.concatenate([[0.0], np.cumsum(np.hypot(np.diff(rows), np.diff(cols)))])
    targets = np.arange(0.0, arc[-1] + 1e-9, step)
    sel = np.searchsorted(arc, targets)
    sel = np.unique(np.minimum(sel, len(dense_t) - 1))
    rr, cc = rows[sel], cols[sel]
    ok = (np.floor(rr + 0.5) >= 0) & (np.floor(rr + 0.5) <= h - 1) & \
         (np.floor(cc + 0.5) >= 0) & (np.floor(cc + 0.5) <= w - 1)
    return np.column_stack([rr[ok], cc[ok]])


def _fit_one(indep, dep):
    if len(np.unique(indep)) < 3:
        return None
    coeffs = np.polyfit(indep, dep, 2)
    resid = float(np.sum((np.polyval(coeffs, indep) - dep) ** 2))
    return coeffs, resid


def fit_poly2(points, force_axis=None):
    """Least-squares quadratic fit of (row, col) points.

    The independent axis is chosen by fit residual (catheters are roughly
    monotone, so the correct parameterization has a far lower residual);
    ``force_axis`` pins it during tracking.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] < 3:
        raise FitFailed("quadratic fit needs at least 3 points")
    candidates = {}
    if force_axis in (None, "col"):
        fit = _fit_one(pts[:, 1], pts[:, 0])
        if fit is not None:
            candidates["col"] = fit
    if force_axis in (None, "row"):
        fit = _fit_one(pts[:, 0], pts[:, 1])
        if fit is not None:
            candidates["row"] = fit
    if not candidates:
        raise FitFailed("points are degenerate along both axes")
    if len(candidates) == 1:
        axis = next(iter(candidates))
    else:
        r_col = candidates["col"][1]
        r_row = candidates["row"][1]
        axis = "col" if r_col <= r_row else "row"
    coeffs = candidates[axis][0]
    return Poly2(float(coeffs[0]), float(coeffs[1]), float(coeffs[2]), axis)


def hough_line_segments(ridge, top_n=10, gap=3.0, min_len=20, rho_res=1.0):
    """Longest straight segments fit on the ridge map.

    Standard (rho, theta) Hough voting over ridge pixels at 1 degree
    resolution; winning lines are traced along their direction, split at
    gaps larger than ``gap`` pixels, and the pixels of each extracted run
    are removed from the accumulator before the next round.  Segments come
    back sorted by on-ridge length, at most ``top_n`` of them.
    """
    pts = np.argwhere(np.asarray(ridge, dtype=bool))
    if len(pts) == 0:
        return []
    thetas = np.deg2rad(np.arange(180))
    cos_t = np.cos(thetas)
    sin_t = np.sin(thetas)
    rho = pts[:, 0:1] * cos_t[None, :] + pts[:, 1:2] * sin_t[None, :]
    offset = int(np.ceil(np.abs(rho).max() / rho_res)) + 1
    rho_idx = (np.floor(rho / rho_res + 0.5) + offset).astype(np.int64)
    n_rho = 2 * offset + 1
    acc = np.zeros((180, n_rho), dtype=np.int64)
    for t in range(180):
        acc[t] += np.bincount(rho_idx[:, t], minlength=n_rho)
    active = np.ones(len(pts), dtype=bool)

    segments = []
    while len(segments) < top_n:
        flat = int(np.argmax(acc))
        votes = int(acc.flat[flat])
        if votes < min_len:
            break
        ti, ri = divmod(flat, n_rho)
        rho_line = (ri - offset) * rho_res
        cand = active & (np.abs(rho[:, ti] - rho_line) <= rho_res)
        idx = np.nonzero(cand)[0]
        if len(idx) == 0:
            acc[ti, ri] = 0
            continue
        along = -pts[idx, 0] * sin_t[ti] + pts[idx, 1] * cos_t[ti]
        order = np.argsort(along, kind="stable")
        idx = idx[order]
        along = along[order]
        breaks = np.nonzero(np.diff(along) > gap)[0]
        runs = np.split(np.arange(len(idx)), breaks + 1)
        best_run = max(runs, key=len)
        if len(best_run) >= min_len:
            run_idx = idx[best_run]
            seg_pts = pts[run_idx]
            segments.append(LineSegment(
                p0=tuple(int(v) for v in seg_pts[0]),
                p1=tuple(int(v) for v in seg_pts[-1]),
                pixels=seg_pts,
                length=len(seg_pts),
            ))
            active[run_idx] = False
            for t in range(180):
                np.subtract.at(acc[t], rho_idx[run_idx, t], 1)
        else:
            acc[ti, ri] = 0
    segments.sort(key=lambda s: -s.length)
    return segments[:top_n]


def select_catheter_ridge(ridge, segments):
    """Connected ridge component carrying the most Hough segments.

    A segment counts toward the component holding the majority of its
    pixels; ties go to the component with the longest counted segment,
    then to the smallest component id.  Returns the component mask.
    """
    ridge = np.asarray(ridge, dtype=bool)
    comp, n_comp = ndimage.label(ridge, structure=np.ones((3, 3), dtype=bool))
    if n_comp == 0:
        raise DetectionFailed("ridge map has no connected components")
    if not segments:
        raise DetectionFailed("no line segments to vote with")
    counts = np.zeros(n_comp + 1, dtype=np.int64)
    longest = np.zeros(n_comp + 1, dtype=np.int64)
    for seg in segments:
        ids = comp[seg.pixels[:, 0], seg.pixels[:, 1]]
        vals, cnts = np.unique(ids, return_counts=True)
        j = int(np.argmax(cnts))
        if 2 * cnts[j] > len(ids) and vals[j] > 0:
            counts[vals[j]] += 1
            longest[vals[j]] = max(longest[vals[j]], seg.length)
    if counts.max() == 0:
        # no majority anywhere: fall back to the component holding the
        # plurality of the longest segment
        ids = comp[segments[0].pixels[:, 0], segments[0].pixels[:, 1]]
        vals, cnts = np.unique(ids, return_counts=True)
        chosen = int(vals[np.argmax(cnts)])
    else:
        chosen = 0
        for cid in range(1, n_comp + 1):
            if chosen == 0 or (counts[cid], longest[cid]) > (counts[chosen], longest[chosen]):
                chosen = cid
    return comp == chosen


def _support_mask(ridge):
    # pixels within 1 px (euclidean) of a ridge pixel
    plus = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)
    return ndimage.binary_dilation(ridge, structure=plus)


def _count_support(poly, support):
    pts = sample_curve(poly, support.shape)
    if len(pts) == 0:
        return 0
    rr = np.floor(pts[:, 0] + 0.5).astype(np.int64)
    cc = np.floor(pts[:, 1] + 0.5).astype(np.int64)
    return int(support[rr, cc].sum())


def track_step(prev, ridge, min_support=30):
    """Track the catheter into the next frame.

    Grid search over coefficients within the previous state's window,
    scoring by curve samples within 1 px of a ridge pixel; the winner is
    refined by refitting on its inlier ridge pixels.  Raises TrackingLost
    when the best support falls below ``min_support``.
    """
    ridge = np.asarray(ridge, dtype=bool)
    support = _support_mask(ridge)
    da, db, dc = prev.search_window
    a_vals = np.linspace(prev.poly.a - da, prev.poly.a + da, 11)
    b_vals = np.linspace(prev.poly.b - db, prev.poly.b + db, 11)
    c_vals = np.linspace(prev.poly.c - dc, prev.poly.c + dc, 21)
    best_n = -1
    best_poly = None
    for a in a_vals:
        for b in b_vals:
            for c in c_vals:
                poly = Poly2(a, b, c, prev.poly.axis)
                n = _count_support(poly, support)
                if n > best_n:
                    best_n = n
                    best_poly = poly
    if best_n < min_support:
        raise TrackingLost(f"best ridge support {best_n} < {min_support}")
    curve_mask = np.zeros(ridge.shape, dtype=bool)
    pts = sample_curve(best_poly, ridge.shape)
    rr = np.floor(pts[:, 0] + 0.5).astype(np.int64)
    cc = np.floor(pts[:, 1] + 0.5).astype(np.int64)
    curve_mask[rr, cc] = True
    inliers = np.argwhere(ridge & _support_mask(curve_mask))
    try:
        refined = fit_poly2(inliers, force_axis=prev.poly.axis)
    except FitFailed:
        refined = best_poly
    return TrackState(poly=refined, frame_index=prev.frame_index + 1,
                      search_window=prev.search_window, fit_support=best_n)


def detect_first_frame(ridge, top_n=10, gap=3.0, min_len=20,
                       search_window=(5e-4, 0.1, 10.0)):
    """Detect the catheter in the (pre-injection) first frame."""
    segments = hough_line_segments(ridge, top_n=top_n, gap=gap, min_len=min_len)
    component = select_catheter_ridge(ridge, segments)
    pts = np.argwhere(component)
    try:
        poly = fit_poly2(pts)
    except FitFailed as exc:
        raise DetectionFailed(str(exc)) from exc
    return TrackState(poly=poly, frame_index=0, search_window=search_window,
                      fit_support=len(pts))


def track_sequence(ridge_frames, top_n=10, gap=3.0, min_len=20,
                   search_window=(5e-4, 0.1, 10.0), min_support=30):
    """Detect in frame 1 and fold track_step over the remaining frames.

    Frames where tracking is lost keep the previous curve and are flagged;
    tracking resumes from that curve on later frames.
    """
    frames = list(ridge_frames)
    if not frames:
        raise ValueError("need at least one frame")
    states = [detect_first_frame(frames[0], top_n=top_n, gap=gap,
                                 min_len=min_len, search_window=search_window)]
    for i, ridge in enumerate(frames[1:], start=1):
        prev = states[-1]
        if prev.lost:
            prev = replace(prev, lost=False)
        try:
            states.append(track_step(prev, ridge, min_support=min_support))
        except TrackingLost:
            states.append(replace(prev, frame_index=i, lost=True, fit_support=0))
    return states


def catheter_mask(poly, width=3, shape=None):
    """Rasterize the curve and thicken it to ``width`` pixels."""
    if width < 1:
        raise ValueError("mask width must be >= 1")
    if shape is None:
        raise ValueError("shape is required")
    mask = np.zeros(shape, dtype=bool)
    pts = sample_curve(poly, shape)
    if len(pts) == 0:
        return mask
    rr = np.floor(pts[:, 0] + 0.5).astype(np.int64)
    cc = np.floor(pts[:, 1] + 0.5).astype(np.int64)
    mask[rr, cc] = True
    radius = (int(width) - 1) // 2
    if radius >= 1:
        dy, dx = np.ogrid[-radius:radius + 1, -radius:radius + 1]
        disk = dy * dy + dx * dx <= radius * radius
        mask = ndimage.binary_dilation(mask, structure=disk)
    return mask
