"""Brute-force reference implementations used only for verification.

Each oracle re-implements its fast counterpart by direct definition, with
per-pixel Python loops and no shared code, so agreement is meaningful.
They are intended for small instances (tests run them at <= 32x32).
"""

import math

import numpy as np


def brute_convolve(img, kernel):
    """Direct per-pixel 2-D convolution with replicate borders."""
    img = np.asarray(img, dtype=np.float64)
    kernel = np.asarray(kernel, dtype=np.float64)
    kh, kw = kernel.shape
    if kh % 2 == 0 or kw % 2 == 0:
        raise ValueError("kernel dimensions must be odd")
    h, w = img.shape
    hr, hc = kh // 2, kw // 2
    out = np.zeros_like(img)
    for y in range(h):
        for x in range(w):
            acc = 0.0
            for i in range(kh):
                for j in range(kw):
                    # convolution flips the kernel
                    yy = min(max(y + hr - i, 0), h - 1)
                    xx = min(max(x + hc - j, 0), w - 1)
                    acc += kernel[i, j] * img[yy, xx]
            out[y, x] = acc
    return out


def brute_guided_filter(guide, src, r, eps):
    """Literal guided filter: per-window coefficients from explicit sums,
    output averaged over every window covering each pixel."""
    guide = np.asarray(guide, dtype=np.float64)
    src = np.asarray(src, dtype=np.float64)
    h, w = guide.shape
    alpha = np.zeros((h, w))
    beta = np.zeros((h, w))
    for ky in range(h):
        for kx in range(w):
            y0, y1 = max(0, ky - r), min(h - 1, ky + r)
            x0, x1 = max(0, kx - r), min(w - 1, kx + r)
            n = 0
            s_f = s_p = s_fp = s_ff = 0.0
            for y in range(y0, y1 + 1):
                for x in range(x0, x1 + 1):
                    f = guide[y, x]
                    p = src[y, x]
                    s_f += f
                    s_p += p
                    s_fp += f * p
                    s_ff += f * f
                    n += 1
            mu = s_f / n
            pbar = s_p / n
            var = s_ff / n - mu * mu
            a = (s_fp / n - mu * pbar) / (var + eps)
            alpha[ky, kx] = a
            beta[ky, kx] = pbar - a * mu
    out = np.zeros((h, w))
    cnt = np.zeros((h, w))
    for ky in range(h):
        for kx in range(w):
            y0, y1 = max(0, ky - r), min(h - 1, ky + r)
            x0, x1 = max(0, kx - r), min(w - 1, kx + r)
            for y in range(y0, y1 + 1):
                for x in range(x0, x1 + 1):
                    out[y, x] += alpha[ky, kx] * guide[y, x] + beta[ky, kx]
                    cnt[y, x] += 1.0
    return out / cnt


def brute_slic_assign(intensity, centers, s, m):
    """Per-pixel scan over every center whose search window covers the pixel,
    using the combined distance D = sqrt(dc^2 + (ds/S)^2 m^2)."""
    intensity = np.asarray(intensity, dtype=np.float64)
    h, w = intensity.shape
    labels = np.full((h, w), -1, dtype=np.int32)
    dist = np.full((h, w), np.inf)
    for y in range(h):
        for x in range(w):
            for ci in range(centers.shape[0]):
                lc, cy, cx = centers[ci]
                y0 = max(0, int(math.floor(cy - s)))
                y1 = min(h - 1, int(math.floor(cy + s)))
                x0 = max(0, int(math.floor(cx - s)))
                x1 = min(w - 1, int(math.floor(cx + s)))
                if not (y0 <= y <= y1 and x0 <= x <= x1):
                    continue
                dc2 = (intensity[y, x] - lc) ** 2
                ds2 = (y - cy) ** 2 + (x - cx) ** 2
                d = math.sqrt(dc2 + ds2 / (s * s) * (m * m))
                if d < dist[y, x]:
                    dist[y, x] = d
                    labels[y, x] = ci
    return labels, dist


def brute_disk_extreme(img, radius, take_min):
    """Direct min/max over the disk footprint with replicate borders."""
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape
    out = np.empty_like(img)
    pick = min if take_min else max
    for y in range(h):
        for x in range(w):
            best = None
            for dy in range(-radius, radius + 1):
                for dx in range(-radius, radius + 1):
                    if dy * dy + dx * dx > radius * radius:
                        continue
                    yy = min(max(y + dy, 0), h - 1)
                    xx = min(max(x + dx, 0), w - 1)
                    v = img[yy, xx]
                    best = v if best is None else pick(best, v)
            out[y, x] = best
    return out


def truth_table_vote(m1, m2, m3):
    """Majority vote by explicit per-pixel case enumeration."""
    m1 = np.asarray(m1, dtype=bool)
    m2 = np.asarray(m2, dtype=bool)
    m3 = np.asarray(m3, dtype=bool)
    h, w = m1.shape
    out = np.zeros((h, w), dtype=bool)
    for y in range(h):
        for x in range(w):
            votes = 0
            if m1[y, x]:
                votes += 1
            if m2[y, x]:
                votes += 1
            if m3[y, x]:
                votes += 1
            out[y, x] = votes >= 2
    return out
