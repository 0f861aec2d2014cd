"""Superpixel artery segmentation, orthogonal-profile refinement, and
centerline extraction.

Per superpixel scale: SLIC on the contrast-enhanced image, a vesselness
probability per superpixel (mean vesselness minus mean intensity, min-max
normalized), thresholding, and ridge-based augmentation.  The three scales
are combined by per-pixel majority vote.  Refinement walks the
high-threshold ridge pixels inside the voted mask, finds the diameter
orthogonal to the vessel, tests the intensity profile for a valley of
sufficient depth, locates the two vessel boundaries, and stamps a disk of
the boundary-limited radius; the refined mask is the union of stamped
disks intersected with the voted mask.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import ndimage

from . import _backend
from ._kernels_py import bilinear_sample
from .imgcore import as_image
from .superpix import SlicParams, slic

EIGHT_CONN = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class SuperpixelStats:
    """Per-label means and the normalized vesselness probability."""

    n_ce: np.ndarray
    n_v: np.ndarray
    rho: np.ndarray
    pixel_count: np.ndarray


@dataclass(frozen=True)
class RefineParams:
    d: int = 25  # profile diameter, forced odd
    t_d: float = 0.2  # minimum profile depth
    boundary_thresholds: tuple = (0.2, 0.1, 0.05, 0.02, 0.0)
    profile_smooth_width: int = 3
    rescue_on_intensity: bool = False  # True: literal bright-pixel rescue on I_ce

    def __post_init__(self):
        if self.d < 3:
            raise ValueError("profile diameter must be >= 3")
        if self.d % 2 == 0:
            object.__setattr__(self, "d", self.d + 1)
        if not 0.0 < self.t_d < 1.0:
            raise ValueError("profile depth threshold must be in (0, 1)")
        if not self.boundary_thresholds or self.boundary_thresholds[-1] != 0.0:
            raise ValueError("boundary threshold ladder must end with 0")
        if self.profile_smooth_width < 1:
            raise ValueError("profile smoothing width must be >= 1")


@dataclass(frozen=True)
class SegmentationResult:
    artery_mask: np.ndarray
    centerline_mask: np.ndarray
    initial_masks: tuple  # per-scale masks after ridge augmentation
    voted_mask: np.ndarray


def superpixel_stats(label_map, i_ce, i_v):
    """Per-superpixel mean intensity/vesselness and vesselness probability.

    rho_raw = n_v - n_ce is min-max normalized across labels; if every label
    has the same rho_raw (no contrast anywhere) all probabilities are 0.
    """
    i_ce = as_image(i_ce)
    i_v = as_image(i_v)
    labels = label_map.labels
    if labels.shape != i_ce.shape or labels.shape != i_v.shape:
        raise ValueError("label map and images must share dimensions")
    k = label_map.k_actual
    flat = labels.ravel()
    counts = np.bincount(flat, minlength=k).astype(np.float64)
    n_ce = np.bincount(flat, weights=i_ce.ravel(), minlength=k) / counts
    n_v = np.bincount(flat, weights=i_v.ravel(), minlength=k) / counts
    rho_raw = n_v - n_ce
    lo = rho_raw.min()
    hi = rho_raw.max()
    if hi - lo < 1e-12:
        rho = np.zeros_like(rho_raw)
    else:
        rho = (rho_raw - lo) / (hi - lo)
    return SuperpixelStats(n_ce=n_ce, n_v=n_v, rho=rho,
                           pixel_count=counts.astype(np.int64))


def initial_mask(stats, label_map, t):
    """Pixels of superpixels whose vesselness probability reaches t."""
    if not 0.0 < t < 1.0:
        raise ValueError("superpixel threshold must be in (0, 1)")
    vessel = stats.rho >= t
    return vessel[label_map.labels]


def augment_with_ridges(mask, ridge_low, label_map):
    """Add every superpixel lying on a ridge component that overlaps the mask."""
    mask = np.asarray(mask, dtype=bool)
    ridge_low = np.asarray(ridge_low, dtype=bool)
    if mask.shape != ridge_low.shape:
        raise ValueError("mask and ridge map must share dimensions")
    comp, n = ndimage.label(ridge_low, structure=EIGHT_CONN)
    if n == 0:
        return mask.copy()
    hit = np.unique(comp[mask])
    hit = hit[hit > 0]
    if len(hit) == 0:
        return mask.copy()
    on_hit_ridge = np.isin(comp, hit)
    touched = np.unique(label_map.labels[on_hit_ridge])
    lut = np.zeros(label_map.k_actual, dtype=bool)
    lut[touched] = True
    return mask | lut[label_map.labels]


def majority_vote(m1, m2, m3):
    """Per-pixel vote: set where at least 2 of the 3 masks are set."""
    m1 = np.asarray(m1, dtype=bool)
    m2 = np.asarray(m2, dtype=bool)
    m3 = np.asarray(m3, dtype=bool)
    if m1.shape != m2.shape or m1.shape != m3.shape:
        raise ValueError("masks must share dimensions")
    return (m1.astype(np.int8) + m2.astype(np.int8) + m3.astype(np.int8)) >= 2


@lru_cache(maxsize=8)
def _diameter_offsets(d):
    """(180, d, 2) displacements along diameters at 1..180 degrees.

    Angles are measured from the row axis toward the column axis, so the
    diameter at 90 degrees runs horizontally.
    """
    ts = np.arange(d, dtype=np.float64) - (d - 1) / 2.0
    out = np.zeros((180, d, 2))
    for i in range(180):
        th = math.radians(i + 1)
        out[i, :, 0] = ts * math.cos(th)
        out[i, :, 1] = ts * math.sin(th)
    return out


def orthogonal_direction(i_ce, center, d):
    """Angle (degrees, 1..180) of the diameter with the highest mean
    intensity around a ridge pixel; ties pick the smallest angle.

    Crossing the dark vessel perpendicular minimizes the dark mass on the
    diameter, so the returned angle is orthogonal to the vessel axis.
    """
    i_ce = as_image(i_ce)
    if d % 2 == 0:
        d += 1
    pts = np.array([center], dtype=np.int64)
    idx = _backend.best_profile_angle(i_ce, pts, _diameter_offsets(d))
    return int(idx[0]) + 1


def extract_profile(i_ce, center, angle_deg, d):
    """Intensity profile along the diameter at the given angle.

    Returns (values, center_index): bilinear samples at unit spacing with
    out-of-image samples dropped, and the index of the ridge pixel within
    the clipped profile.
    """
    i_ce = as_image(i_ce)
    h, w = i_ce.shape
    if d % 2 == 0:
        d += 1
    ts = np.arange(d, dtype=np.float64) - (d - 1) / 2.0
    th = math.radians(angle_deg)
    rr = center[0] + ts * math.cos(th)
    cc = center[1] + ts * math.sin(th)
    ok = (rr >= 0.0) & (rr <= h - 1) & (cc >= 0.0) & (cc <= w - 1)
    values = bilinear_sample(i_ce, rr[ok], cc[ok])
    center_index = int(ok[:(d - 1) // 2 + 1].sum()) - 1
    return values, center_index


def _smooth_profile(profile, width):
    if width <= 1 or len(profile) == 1:
        return np.asarray(profile, dtype=np.float64)
    kernel = np.ones(width) / width
    return ndimage.correlate1d(np.asarray(profile, dtype=np.float64), kernel,
                               mode="nearest")


def _central_min(profile):
    n = len(profile)
    lo = n // 3
    hi = max(lo + 1, n - n // 3)
    return lo + int(np.argmin(profile[lo:hi]))


def profile_test(profile, params, rescue_level=0.0, rescue_threshold=math.inf):
    """Vessel-profile test: keep the ridge pixel when both side maxima rise
    at least t_d above the central minimum, or when the rescue value
    reaches the adaptive rescue threshold.

    Returns (keep, l1, l2) where l1/l2 are the left/right depth margins of
    the smoothed profile.
    """
    smoothed = _smooth_profile(profile, params.profile_smooth_width)
    m = _central_min(smoothed)
    l1 = float(np.max(smoothed[:m + 1]) - smoothed[m])
    l2 = float(np.max(smoothed[m:]) - smoothed[m])
    keep = min(l1, l2) >= params.t_d or rescue_level >= rescue_threshold
    return keep, l1, l2


def find_boundaries(profile, thresholds):
    """Boundary indices on both sides of the profile valley.

    Scanning inward from each end, the first position whose step toward the
    valley is at least the current threshold is the boundary; failing scans
    retry with the next lower threshold.  The ladder ends at 0, and a fully
    rising profile degenerates to the profile end.
    """
    profile = np.asarray(profile, dtype=np.float64)
    n = len(profile)
    m = _central_min(profile)
    left = 0
    for t in thresholds:
        found = False
        for i in range(0, m):
            if profile[i] - profile[i + 1] >= t:
                left = i
                found = True
                break
        if found:
            break
    right = n - 1
    for t in thresholds:
        found = False
        for i in range(n - 1, m, -1):
            if profile[i] - profile[i - 1] >= t:
                right = i
                found = True
                break
        if found:
            break
    return left, right


def _stamp_disk(mask, center, radius):
    h, w = mask.shape
    ir = int(radius)
    r0 = max(0, center[0] - ir)
    r1 = min(h - 1, center[0] + ir)
    c0 = max(0, center[1] - ir)
    c1 = min(w - 1, center[1] + ir)
    rr = np.arange(r0, r1 + 1)[:, None] - center[0]
    cc = np.arange(c0, c1 + 1)[None, :] - center[1]
    mask[r0:r1 + 1, c0:c1 + 1] |= rr * rr + cc * cc <= radius * radius


def refine(initial, ridge_high, i_ce, params, rescue_image=None):
    """Refine the voted mask with orthogonal profiles.

    ridge_high is filtered by the initial mask; every surviving ridge pixel
    gets an orthogonal profile, the depth test (with adaptive rescue on
    ``rescue_image``, the vesselness map in the full pipeline), a boundary
    search, and a stamped disk of radius min(distance to either boundary).
    The result is the union of disks intersected with the initial mask.
    """
    initial = np.asarray(initial, dtype=bool)
    ridge_high = np.asarray(ridge_high, dtype=bool)
    i_ce = as_image(i_ce)
    pts = np.argwhere(ridge_high & initial)
    out = np.zeros_like(initial)
    if len(pts) == 0:
        return out
    rescue_src = i_ce if rescue_image is None else as_image(rescue_image)
    rescue_vals = rescue_src[pts[:, 0], pts[:, 1]]
    srt = np.sort(rescue_vals)
    top_quarter = srt[(3 * len(srt)) // 4:]
    rescue_threshold = float(top_quarter.mean()) if len(top_quarter) else math.inf

    angles = _backend.best_profile_angle(i_ce, pts, _diameter_offsets(params.d)) + 1
    for (pr, pc), angle, rescue_level in zip(pts.tolist(), angles, rescue_vals):
        values, center_index = extract_profile(i_ce, (pr, pc), int(angle), params.d)
        if len(values) < 3:
            continue
        keep, _, _ = profile_test(values, params, float(rescue_level), rescue_threshold)
        if not keep:
            continue
        smoothed = _smooth_profile(values, params.profile_smooth_width)
        left, right = find_boundaries(smoothed, params.boundary_thresholds)
        r_d = min(center_index - left, right - center_index)
        if r_d >= 1:
            _stamp_disk(out, (pr, pc), float(r_d))
        else:
            out[pr, pc] = True
    return out & initial


def extract_centerline(artery_mask, ridge_low):
    """Centerlines: the low-threshold ridge restricted to the artery mask."""
    artery_mask = np.asarray(artery_mask, dtype=bool)
    ridge_low = np.asarray(ridge_low, dtype=bool)
    if artery_mask.shape != ridge_low.shape:
        raise ValueError("masks must share dimensions")
    return artery_mask & ridge_low


def scale_cluster_count(k, shape, reference=512 * 512):
    """Cluster counts are calibrated for 512x512 frames; scale by pixel count."""
    n = shape[0] * shape[1]
    return max(1, round(k * n / reference))


def segment_frame(i_ce, i_v, ridges, ks=(2000, 3000, 4000), t=0.5,
                  refine_params=RefineParams(), slic_m=0.1, slic_max_iter=10,
                  slic_conv_tol=0.25, scale_ks=True):
    """Full per-frame segmentation.

    Per scale: SLIC on I_ce, superpixel stats against I_v, threshold at t,
    ridge augmentation with the low map; majority vote across scales;
    orthogonal-profile refinement with the high map; centerline extraction
    with the low map.
    """
    i_ce = as_image(i_ce)
    i_v = as_image(i_v)
    initial = []
    for k in ks:
        k_eff = scale_cluster_count(k, i_ce.shape) if scale_ks else k
        label_map = slic(i_ce, SlicParams(k=k_eff, m=slic_m, max_iter=slic_max_iter,
                                          conv_tol=slic_conv_tol))
        stats = superpixel_stats(label_map, i_ce, i_v)
        mask = initial_mask(stats, label_map, t)
        initial.append(augment_with_ridges(mask, ridges.low, label_map))
    voted = majority_vote(*initial)
    refined = refine(voted, ridges.high, i_ce, refine_params, rescue_image=i_v)
    centerline = extract_centerline(refined, ridges.low)
    return SegmentationResult(artery_mask=refined, centerline_mask=centerline,
                              initial_masks=tuple(initial), voted_mask=voted)
