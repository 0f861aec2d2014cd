"""SLIC superpixel clustering with connectivity enforcement.

Centers are seeded on a regular grid at interval S = sqrt(N/k), nudged to
the lowest-gradient position in a 3x3 window, then assignment (combined
intensity/spatial distance, search restricted to 2Sx2S regions) and
center-update steps alternate until center movement converges.  A cleanup
pass merges fragments below S^2/4 into their largest adjacent region so
every label is 4-connected.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from . import _backend
from .imgcore import as_image


@dataclass(frozen=True)
class SlicParams:
    k: int
    m: float = 0.1  # compactness on [0, 1] intensities
    max_iter: int = 10
    conv_tol: float = 0.25  # mean center movement, pixels

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("superpixel count must be >= 1")
        if self.m <= 0:
            raise ValueError("compactness m must be > 0")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass(frozen=True)
class LabelMap:
    """Per-pixel superpixel ids 0..k_actual-1; every label is 4-connected."""

    labels: np.ndarray
    k_requested: int
    k_actual: int


def _seed_centers(img, k):
    """Grid seeds at interval ~S, perturbed to the lowest squared-gradient
    position within a 3x3 window (raster order breaks ties)."""
    h, w = img.shape
    s = math.sqrt(img.size / k)
    nr = max(1, round(math.sqrt(k * h / w)))
    nc = max(1, round(k / nr))
    rows = (np.arange(nr) + 0.5) * (h / nr)
    cols = (np.arange(nc) + 0.5) * (w / nc)

    gr = np.empty_like(img)
    gc = np.empty_like(img)
    gr[1:-1] = img[2:] - img[:-2]
    gr[0] = img[1] - img[0]
    gr[-1] = img[-1] - img[-2]
    gc[:, 1:-1] = img[:, 2:] - img[:, :-2]
    gc[:, 0] = img[:, 1] - img[:, 0]
    gc[:, -1] = img[:, -1] - img[:, -2]
    grad = gr * gr + gc * gc

    centers = []
    for r in rows:
        for c in cols:
            ri = min(int(r), h - 1)
            ci = min(int(c), w - 1)
            best = None
            for dr in (-1, 0, 1):
                for dc in (-1, 0, 1):
                    rr, cc = ri + dr, ci + dc
                    if 0 <= rr < h and 0 <= cc < w:
                        if best is None or grad[rr, cc] < grad[best]:
                            best = (rr, cc)
            centers.append((img[best], float(best[0]), float(best[1])))
    return np.array(centers, dtype=np.float64), s


def slic(img, params):
    """SLIC superpixels of a [0, 1] grayscale image."""
    img = as_image(img)
    if params.k > img.size:
        raise ValueError(f"requested {params.k} superpixels for {img.size} pixels")
    centers, s = _seed_centers(img, params.k)
    weight = (params.m / s) ** 2

    labels = None
    for _ in range(params.max_iter):
        labels, _ = _backend.slic_assign(img, centers, s, weight)
        new_centers = _update_centers(img, labels, centers)
        movement = np.hypot(new_centers[:, 1] - centers[:, 1],
                            new_centers[:, 2] - centers[:, 2]).mean()
        centers = new_centers
        if movement < params.conv_tol:
            break
    labels, _ = _backend.slic_assign(img, centers, s, weight)
    labels = _assign_orphans(img, labels, centers, weight)
    min_size = max(1, int(s * s / 4.0))
    return enforce_connectivity(LabelMap(labels, params.k, int(labels.max()) + 1),
                                min_size=min_size)


def _update_centers(img, labels, centers):
    """Move every center to the mean (intensity, row, col) of its pixels;
    empty clusters keep their previous center."""
    k = centers.shape[0]
    flat = labels.ravel()
    valid = flat >= 0
    idx = flat[valid]
    counts = np.bincount(idx, minlength=k).astype(np.float64)
    rows, cols = np.indices(img.shape)
    sum_l = np.bincount(idx, weights=img.ravel()[valid], minlength=k)
    sum_r = np.bincount(idx, weights=rows.ravel()[valid], minlength=k)
    sum_c = np.bincount(idx, weights=cols.ravel()[valid], minlength=k)
    out = centers.copy()
    nz = counts > 0
    out[nz, 0] = sum_l[nz] / counts[nz]
    out[nz, 1] = sum_r[nz] / counts[nz]
    out[nz, 2] = sum_c[nz] / counts[nz]
    return out


def _assign_orphans(img, labels, centers, weight):
    """Assign any pixel missed by every search window to its globally
    nearest center (rare: centers drifting away from a corner)."""
    missed = labels < 0
    if not missed.any():
        return labels
    labels = labels.copy()
    rows, cols = np.nonzero(missed)
    for r, c in zip(rows, cols):
        dl = img[r, c] - centers[:, 0]
        d2 = dl * dl + ((r - centers[:, 1]) ** 2 + (c - centers[:, 2]) ** 2) * weight
        labels[r, c] = int(np.argmin(d2))
    return labels


def _connected_components(labels):
    """4-connected components of equal-label regions, numbered by raster
    order of first occurrence."""
    h, w = labels.shape
    comp = np.full((h, w), -1, dtype=np.int64)
    structure = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)
    offset = 0
    # bounding boxes keep the per-label component pass O(label area)
    slices = ndimage.find_objects(labels + 1)
    for lab, sl in enumerate(slices):
        if sl is None:
            continue
        sub = labels[sl] == lab
        cc, n = ndimage.label(sub, structure=structure)
        comp[sl][sub] = cc[sub] + (offset - 1)
        offset += n
    # renumber by first occurrence so the result is independent of the
    # per-label processing order
    flat = comp.ravel()
    uniq, first = np.unique(flat, return_index=True)
    rank = np.empty_like(uniq)
    rank[np.argsort(first)] = np.arange(len(uniq))
    remap = np.empty(int(uniq.max()) + 1, dtype=np.int64)
    remap[uniq] = rank
    return remap[flat].reshape(h, w), len(uniq)


def enforce_connectivity(label_map, min_size):
    """Merge fragments smaller than min_size into their largest adjacent
    component and relabel densely.

    Components at or above min_size keep their identity (one output label
    per surviving component); ties on neighbor size pick the smaller
    component id, so the result is deterministic.
    """
    labels = label_map.labels
    h, w = labels.shape
    comp, n_comp = _connected_components(labels)
    sizes = np.bincount(comp.ravel(), minlength=n_comp).astype(np.int64)

    # adjacency from horizontal and vertical neighbor pairs
    chunks = []
    a, b = comp[:, :-1].ravel(), comp[:, 1:].ravel()
    diff = a != b
    chunks.append(np.stack([a[diff], b[diff]], axis=1))
    a, b = comp[:-1].ravel(), comp[1:].ravel()
    diff = a != b
    chunks.append(np.stack([a[diff], b[diff]], axis=1))
    raw = np.concatenate(chunks) if chunks else np.empty((0, 2), np.int64)
    lo = np.minimum(raw[:, 0], raw[:, 1])
    hi = np.maximum(raw[:, 0], raw[:, 1])
    keys = np.unique(lo * n_comp + hi)
    neighbors = [[] for _ in range(n_comp)]
    for key in keys.tolist():
        x, y = divmod(key, n_comp)
        neighbors[x].append(y)
        neighbors[y].append(x)

    parent = np.arange(n_comp, dtype=np.int64)

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    merged_size = sizes.copy()
    for cid in range(n_comp):
        if merged_size[find(cid)] >= min_size:
            continue
        root = find(cid)
        best = -1
        best_size = -1
        for nb in neighbors[cid]:
            nb_root = find(nb)
            if nb_root == root:
                continue
            if merged_size[nb_root] > best_size or (
                    merged_size[nb_root] == best_size and nb_root < best):
                best = nb_root
                best_size = merged_size[nb_root]
        if best >= 0:
            parent[root] = best
            merged_size[best] += merged_size[root]

    roots = np.array([find(c) for c in range(n_comp)], dtype=np.int64)
    final = roots[comp.ravel()]
    uniq, first = np.unique(final, return_index=True)
    rank = np.empty_like(uniq)
    rank[np.argsort(first)] = np.arange(len(uniq))
    remap = np.empty(int(uniq.max()) + 1, dtype=np.int64)
    remap[uniq] = rank
    out = remap[final].reshape(h, w).astype(np.int32)
    return LabelMap(out, label_map.k_requested, len(uniq))


def boundary_mask(labels):
    """Pixels whose right or lower 4-neighbor carries a different label."""
    edges = np.zeros(labels.shape, dtype=bool)
    edges[:, :-1] |= labels[:, :-1] != labels[:, 1:]
    edges[:-1, :] |= labels[:-1, :] != labels[1:, :]
    return edges
