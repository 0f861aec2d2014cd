"""Hessian-based vesselness.

Plain multi-scale Frangi filtering plus the directional variant: the image
is decomposed into orientation bands with frequency-domain wedge filters,
each band is illumination-corrected and filtered with a Hessian rotated to
the band orientation, and the per-band responses are averaged.  The
directional variant preserves junctions that plain Frangi suppresses.

Sign convention: arteries are dark valleys, so tubular structures have a
large positive cross-tube second derivative.  The vesselness response
therefore requires lambda2 >= 0 and is zero where lambda2 < 0 (bright
structures); this is algebraically identical to inverting the image and
running the bright-tube filter, since the measures depend only on
|lambda1|, |lambda2|.
"""

import math
from dataclasses import dataclass

import numpy as np

from .enhance import homomorphic
from .imgcore import as_image, gaussian_derivative


@dataclass(frozen=True)
class HessianField:
    """Second-derivative responses at one scale; symmetric by construction."""

    ixx: np.ndarray  # along axis 0 (rows)
    ixy: np.ndarray
    iyy: np.ndarray  # along axis 1 (columns)


@dataclass(frozen=True)
class FrangiParams:
    sigmas: tuple = (1.0, 2.0, 3.0, 4.0, 6.0, 8.0)
    beta: float = 0.5
    c: float = 0.08

    def __post_init__(self):
        if not self.sigmas:
            raise ValueError("sigma list must not be empty")
        if any(s <= 0 for s in self.sigmas):
            raise ValueError("sigmas must be > 0")
        if any(b <= a for a, b in zip(self.sigmas, self.sigmas[1:])):
            raise ValueError("sigmas must be strictly increasing")
        if self.beta <= 0 or self.c <= 0:
            raise ValueError("beta and c must be > 0")


@dataclass(frozen=True)
class DirectionalBank:
    """Uniform orientation bands partitioning [0, 180) degrees."""

    n_bands: int = 8

    def __post_init__(self):
        if self.n_bands < 1:
            raise ValueError("need at least one orientation band")

    @property
    def band_width(self):
        return 180.0 / self.n_bands

    @property
    def orientations(self):
        """Band center angles (theta_i,min + theta_i,max) / 2 in degrees."""
        w = self.band_width
        return tuple((i + 0.5) * w for i in range(self.n_bands))


def hessian_at(img, sigma):
    """Scale-normalized Hessian (l = 1 normalization per derivative)."""
    img = as_image(img)
    return HessianField(
        ixx=gaussian_derivative(img, sigma, dx=2, dy=0, l=1),
        ixy=gaussian_derivative(img, sigma, dx=1, dy=1, l=1),
        iyy=gaussian_derivative(img, sigma, dx=0, dy=2, l=1),
    )


def eigen2x2(h):
    """Eigenvalues of the symmetric 2x2 Hessian at every pixel, ordered so
    that |lambda1| <= |lambda2|."""
    mid = 0.5 * (h.ixx + h.iyy)
    diff = 0.5 * (h.ixx - h.iyy)
    rad = np.sqrt(diff * diff + h.ixy * h.ixy)
    ea = mid + rad
    eb = mid - rad
    swap = np.abs(ea) > np.abs(eb)
    lam1 = np.where(swap, eb, ea)
    lam2 = np.where(swap, ea, eb)
    return lam1, lam2


def _vesselness_from_eigen(lam1, lam2, beta, c):
    lam2_safe = np.where(lam2 == 0.0, 1.0, lam2)
    rb2 = np.where(lam2 == 0.0, 0.0, (lam1 / lam2_safe) ** 2)
    s2 = lam1 * lam1 + lam2 * lam2
    v = np.exp(-rb2 / (2.0 * beta * beta)) * (1.0 - np.exp(-s2 / (2.0 * c * c)))
    v[lam2 < 0.0] = 0.0
    v[(lam1 == 0.0) & (lam2 == 0.0)] = 0.0
    return v


def frangi(img, params=FrangiParams()):
    """Multi-scale Frangi vesselness for dark tubes, max over scales."""
    img = as_image(img)
    out = np.zeros_like(img)
    for s in params.sigmas:
        lam1, lam2 = eigen2x2(hessian_at(img, s))
        np.maximum(out, _vesselness_from_eigen(lam1, lam2, params.beta, params.c), out=out)
    return out


def rotate_hessian(h, theta_deg):
    """Hessian in coordinates rotated by theta (degrees, [0, 180)).

    Eigenvalues are invariant under this similarity transform; the rotation
    only re-expresses the matrix in band-aligned axes.
    """
    t = math.radians(theta_deg)
    c2 = math.cos(t) ** 2
    s2 = math.sin(t) ** 2
    s2t = math.sin(2.0 * t)
    c2t = math.cos(2.0 * t)
    return HessianField(
        ixx=h.ixx * c2 + h.ixy * s2t + h.iyy * s2,
        ixy=-0.5 * h.ixx * s2t + h.ixy * c2t + 0.5 * h.iyy * s2t,
        iyy=h.ixx * s2 - h.ixy * s2t + h.iyy * c2,
    )


def _wedge_weights(shape, center_deg, width_deg):
    """Raised-cosine frequency wedge passing spectral orientations within
    +-width of the center; adjacent wedges sum to one.  DC passes fully."""
    h, w = shape
    fr = np.fft.fftfreq(h) * h
    fc = np.fft.fftfreq(w) * w
    phi = np.mod(np.arctan2(fc[None, :], fr[:, None]), np.pi)  # [0, pi)
    center = math.radians(center_deg % 180.0)
    width = math.radians(width_deg)
    d = np.abs(phi - center)
    d = np.minimum(d, np.pi - d)  # angular distance mod 180
    weights = np.where(d < width, np.cos(0.5 * np.pi * d / width) ** 2, 0.0)
    weights[0, 0] = 1.0
    return weights


def decompose_directional(img, bank):
    """Split the image into orientation band images.

    A structure oriented at theta concentrates spectral energy at
    theta + 90, so each band's wedge is rotated accordingly.
    """
    img = as_image(img)
    spectrum = np.fft.fft2(img)
    bands = []
    for theta in bank.orientations:
        weights = _wedge_weights(img.shape, theta + 90.0, bank.band_width)
        bands.append(np.real(np.fft.ifft2(spectrum * weights)))
    return bands


def directional_vesselness(img, bank=DirectionalBank(), params=FrangiParams(),
                           cutoff=8.0, gain_low=0.05, gain_high=1.5):
    """Directional vesselness map in [0, 1].

    Bands are homomorphic-corrected, filtered per scale with the Hessian
    rotated to the band orientation, then band responses are averaged in
    fixed order and the result normalized by its maximum.
    """
    img = as_image(img)
    bands = decompose_directional(img, bank)
    total = np.zeros_like(img)
    for theta, band in zip(bank.orientations, bands):
        corrected = homomorphic(band, cutoff=cutoff, gain_low=gain_low,
                                gain_high=gain_high)
        # undo the [0, 1] stretch: restore the band's own dynamic range so
        # near-empty bands do not get their numerical leakage amplified
        lo, hi = band.min(), band.max()
        corrected = lo + (hi - lo) * corrected
        response = np.zeros_like(img)
        for s in params.sigmas:
            hs = rotate_hessian(hessian_at(corrected, s), theta)
            lam1, lam2 = eigen2x2(hs)
            np.maximum(response,
                       _vesselness_from_eigen(lam1, lam2, params.beta, params.c),
                       out=response)
        total += response
    total /= bank.n_bands
    peak = total.max()
    if peak > 0.0:
        total /= peak
    return total
