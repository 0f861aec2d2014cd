# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernel core: the hot inner loops of the pipeline.

Mirrors ``_kernels_py`` function for function.  Floating-point evaluation
order matches the numpy fallback (the extension is compiled with
-ffp-contract=off) so both backends produce the same assignments.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport floor
from libc.stdlib cimport free, malloc

cnp.import_array()


def slic_assign(intensity, centers, double s, double weight):
    cdef double[:, ::1] img = np.ascontiguousarray(intensity, dtype=np.float64)
    cdef double[:, ::1] ctr = np.ascontiguousarray(centers, dtype=np.float64)
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1], k = ctr.shape[0]
    labels_arr = np.full((h, w), -1, dtype=np.int32)
    best_arr = np.full((h, w), np.inf, dtype=np.float64)
    cdef int[:, ::1] labels = labels_arr
    cdef double[:, ::1] best = best_arr
    cdef Py_ssize_t ci, y, x, y0, y1, x0, x1
    cdef double lc, cy, cx, dl, dy, dx, d2
    with nogil:
        for ci in range(k):
            lc = ctr[ci, 0]
            cy = ctr[ci, 1]
            cx = ctr[ci, 2]
            y0 = <Py_ssize_t>floor(cy - s)
            y1 = <Py_ssize_t>floor(cy + s)
            x0 = <Py_ssize_t>floor(cx - s)
            x1 = <Py_ssize_t>floor(cx + s)
            if y0 < 0:
                y0 = 0
            if y1 > h - 1:
                y1 = h - 1
            if x0 < 0:
                x0 = 0
            if x1 > w - 1:
                x1 = w - 1
            for y in range(y0, y1 + 1):
                dy = y - cy
                for x in range(x0, x1 + 1):
                    dx = x - cx
                    dl = img[y, x] - lc
                    d2 = dl * dl + (dy * dy + dx * dx) * weight
                    if d2 < best[y, x]:
                        best[y, x] = d2
                        labels[y, x] = <int>ci
    return labels_arr, best_arr


cdef void _row_extreme(const double* src, double* dst, double* pad,
                       double* g, double* e, Py_ssize_t n, Py_ssize_t wx,
                       bint take_min) nogil:
    # van Herk / Gil-Werman sliding window extreme, replicate border
    cdef Py_ssize_t m = n + 2 * wx
    cdef Py_ssize_t win = 2 * wx + 1
    cdef Py_ssize_t i, j
    cdef double a, b
    for i in range(m):
        j = i - wx
        if j < 0:
            j = 0
        elif j > n - 1:
            j = n - 1
        pad[i] = src[j]
    g[0] = pad[0]
    for i in range(1, m):
        if i % win == 0:
            g[i] = pad[i]
        else:
            a = g[i - 1]
            b = pad[i]
            g[i] = a if (a < b) == take_min else b
    e[m - 1] = pad[m - 1]
    for i in range(m - 2, -1, -1):
        if (i + 1) % win == 0:
            e[i] = pad[i]
        else:
            a = e[i + 1]
            b = pad[i]
            e[i] = a if (a < b) == take_min else b
    for j in range(n):
        a = e[j]
        b = g[j + win - 1]
        dst[j] = a if (a < b) == take_min else b


def disk_filter(img_in, half_widths, bint take_min):
    cdef double[:, ::1] img = np.ascontiguousarray(img_in, dtype=np.float64)
    cdef long[::1] hw = np.ascontiguousarray(half_widths, dtype=np.int64)
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1]
    cdef Py_ssize_t radius = (hw.shape[0] - 1) // 2

    uniq = sorted({int(v) for v in half_widths})
    cdef long[::1] width_index = np.array(
        [uniq.index(int(v)) for v in half_widths], dtype=np.int64)
    rf_arr = np.empty((len(uniq), h, w), dtype=np.float64)
    cdef double[:, :, ::1] rf = rf_arr
    cdef long[::1] uniq_v = np.array(uniq, dtype=np.int64)
    cdef Py_ssize_t nu = len(uniq)

    out_arr = np.empty((h, w), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t ui, y, x, dy, yy, wx
    cdef double a, b
    cdef Py_ssize_t maxpad = w + 2 * radius
    cdef double* pad = <double*>malloc(maxpad * sizeof(double))
    cdef double* g = <double*>malloc(maxpad * sizeof(double))
    cdef double* e = <double*>malloc(maxpad * sizeof(double))
    if pad == NULL or g == NULL or e == NULL:
        free(pad)
        free(g)
        free(e)
        raise MemoryError()
    try:
        with nogil:
            for ui in range(nu):
                wx = uniq_v[ui]
                for y in range(h):
                    if wx == 0:
                        for x in range(w):
                            rf[ui, y, x] = img[y, x]
                    else:
                        _row_extreme(&img[y, 0], &rf[ui, y, 0], pad, g, e,
                                     w, wx, take_min)
            for y in range(h):
                for x in range(w):
                    out[y, x] = rf[width_index[0], y - radius if y >= radius else 0, x]
            for dy in range(-radius + 1, radius + 1):
                ui = width_index[dy + radius]
                for y in range(h):
                    yy = y + dy
                    if yy < 0:
                        yy = 0
                    elif yy > h - 1:
                        yy = h - 1
                    for x in range(w):
                        a = out[y, x]
                        b = rf[ui, yy, x]
                        out[y, x] = a if (a < b) == take_min else b
    finally:
        free(pad)
        free(g)
        free(e)
    return out_arr


def box_sum(img_in, Py_ssize_t r):
    cdef double[:, ::1] img = np.ascontiguousarray(img_in, dtype=np.float64)
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1]
    ii_arr = np.zeros((h + 1, w + 1), dtype=np.float64)
    cdef double[:, ::1] ii = ii_arr
    cdef Py_ssize_t y, x, y0, y1, x0, x1
    with nogil:
        # cumsum along axis 0 then axis 1, same order as the numpy fallback
        for x in range(1, w + 1):
            for y in range(1, h + 1):
                ii[y, x] = ii[y - 1, x] + img[y - 1, x - 1]
        for y in range(1, h + 1):
            for x in range(1, w + 1):
                ii[y, x] = ii[y, x - 1] + ii[y, x]
    out_arr = np.empty((h, w), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    with nogil:
        for y in range(h):
            y0 = y - r
            if y0 < 0:
                y0 = 0
            y1 = y + r
            if y1 > h - 1:
                y1 = h - 1
            y1 += 1
            for x in range(w):
                x0 = x - r
                if x0 < 0:
                    x0 = 0
                x1 = x + r
                if x1 > w - 1:
                    x1 = w - 1
                x1 += 1
                out[y, x] = ii[y1, x1] - ii[y0, x1] - ii[y1, x0] + ii[y0, x0]
    return out_arr


cdef inline double _bilinear(const double[:, ::1] img, Py_ssize_t h,
                             Py_ssize_t w, double r, double c) nogil:
    # incremental form a + f*(b - a): exact on locally constant data
    cdef Py_ssize_t r0 = <Py_ssize_t>floor(r)
    cdef Py_ssize_t c0 = <Py_ssize_t>floor(c)
    if r0 > h - 2:
        r0 = h - 2
    if r0 < 0:
        r0 = 0
    if c0 > w - 2:
        c0 = w - 2
    if c0 < 0:
        c0 = 0
    cdef Py_ssize_t r1 = r0 + 1 if r0 + 1 <= h - 1 else h - 1
    cdef Py_ssize_t c1 = c0 + 1 if c0 + 1 <= w - 1 else w - 1
    cdef double fr = r - r0
    cdef double fc = c - c0
    cdef double v00 = img[r0, c0]
    cdef double v01 = img[r0, c1]
    cdef double v10 = img[r1, c0]
    cdef double v11 = img[r1, c1]
    cdef double top = v00 + fc * (v01 - v00)
    cdef double bot = v10 + fc * (v11 - v10)
    return top + fr * (bot - top)


def best_profile_angle(img_in, points_in, offsets_in):
    cdef double[:, ::1] img = np.ascontiguousarray(img_in, dtype=np.float64)
    cdef long[:, ::1] pts = np.ascontiguousarray(points_in, dtype=np.int64)
    cdef double[:, :, ::1] off = np.ascontiguousarray(offsets_in, dtype=np.float64)
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1]
    cdef Py_ssize_t n = pts.shape[0], na = off.shape[0], d = off.shape[1]
    out_arr = np.empty(n, dtype=np.int32)
    cdef int[::1] out = out_arr
    cdef Py_ssize_t i, a, t, cnt, best_a
    cdef double pr, pc, rr, cc, acc, mean, best_mean
    with nogil:
        for i in range(n):
            pr = pts[i, 0]
            pc = pts[i, 1]
            best_a = 0
            best_mean = -1.0
            for a in range(na):
                acc = 0.0
                cnt = 0
                for t in range(d):
                    rr = pr + off[a, t, 0]
                    cc = pc + off[a, t, 1]
                    if 0.0 <= rr <= h - 1 and 0.0 <= cc <= w - 1:
                        acc += _bilinear(img, h, w, rr, cc)
                        cnt += 1
                mean = acc / cnt
                if mean > best_mean:
                    best_mean = mean
                    best_a = a
            out[i] = <int>best_a
    return out_arr
