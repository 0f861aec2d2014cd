"""Valley response and thresholded ridge maps.

Arteries and the catheter are dark valleys; their axes show up as curves of
large positive cross-valley second derivative.  The valley response is the
positive principal Hessian eigenvalue, normalized by its image maximum so
the three fixed thresholds are comparable across frames, and thinned by
non-maximum suppression along the cross-valley direction.
"""

from dataclasses import dataclass

import numpy as np

from ._kernels_py import bilinear_sample
from .imgcore import as_image
from .vesselness import eigen2x2, hessian_at

DEFAULT_RIDGE_SIGMA = 2.0
DEFAULT_THRESHOLDS = (0.2, 0.25, 0.4)  # T_L, T_M, T_H


@dataclass(frozen=True)
class ValleyResponse:
    """Normalized valley strength plus the valley-axis angle (radians,
    measured from the row axis); the angle is meaningful where the
    response is positive."""

    response: np.ndarray
    direction: np.ndarray


@dataclass(frozen=True)
class RidgeMaps:
    """Ridge masks at the low/medium/high thresholds; high <= medium <= low."""

    low: np.ndarray
    medium: np.ndarray
    high: np.ndarray


def valley_response(smoothed, sigma=DEFAULT_RIDGE_SIGMA):
    """Valley response max(lambda2, 0), normalized by its maximum.

    The cross-valley direction is the eigenvector of lambda2; the stored
    direction is its perpendicular, i.e. the valley axis.
    """
    smoothed = as_image(smoothed)
    h = hessian_at(smoothed, sigma)
    lam1, lam2 = eigen2x2(h)
    resp = np.maximum(lam2, 0.0)
    peak = resp.max()
    # the floor guards flat images, whose lambda2 is convolution noise
    if peak > 1e-12:
        resp = resp / peak
    else:
        resp = np.zeros_like(resp)

    # eigenvector of lambda2: (ixy, lam2 - ixx) or its transpose partner,
    # whichever is better conditioned
    v1r = h.ixy
    v1c = lam2 - h.ixx
    v2r = lam2 - h.iyy
    v2c = h.ixy
    use_alt = v1r * v1r + v1c * v1c < v2r * v2r + v2c * v2c
    vr = np.where(use_alt, v2r, v1r)
    vc = np.where(use_alt, v2c, v1c)
    degenerate = vr * vr + vc * vc == 0.0
    vr = np.where(degenerate, 1.0, vr)
    vc = np.where(degenerate, 0.0, vc)
    cross_angle = np.arctan2(vc, vr)
    return ValleyResponse(response=resp, direction=cross_angle + 0.5 * np.pi)


def _nms_mask(v):
    """Pixels that are 1-pixel local maxima along the cross-valley axis.

    The comparison is >= on one side and > on the other, so flat plateaus
    keep a single ridge line.
    """
    resp = v.response
    h, w = resp.shape
    cross = v.direction - 0.5 * np.pi
    er = np.cos(cross)
    ec = np.sin(cross)
    rows, cols = np.mgrid[0:h, 0:w].astype(np.float64)
    fwd = bilinear_sample(resp, np.clip(rows + er, 0, h - 1), np.clip(cols + ec, 0, w - 1))
    bwd = bilinear_sample(resp, np.clip(rows - er, 0, h - 1), np.clip(cols - ec, 0, w - 1))
    return (resp >= fwd) & (resp > bwd)


def extract_ridges(v, mu_v):
    """Threshold the valley response and thin it with cross-valley NMS."""
    if not 0.0 < mu_v <= 1.0:
        raise ValueError("valley threshold must be in (0, 1]")
    return (v.response > mu_v) & _nms_mask(v)


def ridge_maps(smoothed, thresholds=DEFAULT_THRESHOLDS, sigma=DEFAULT_RIDGE_SIGMA):
    """Ridge masks at the three configured thresholds (low, medium, high)."""
    t_low, t_med, t_high = thresholds
    if not t_low <= t_med <= t_high:
        raise ValueError("thresholds must be ordered low <= medium <= high")
    v = valley_response(smoothed, sigma)
    nms = _nms_mask(v)
    return RidgeMaps(
        low=(v.response > t_low) & nms,
        medium=(v.response > t_med) & nms,
        high=(v.response > t_high) & nms,
    )
