"""Synthetic angiogram generator with exact ground truth, plus the
evaluation metrics used by the acceptance suite.

Frames mimic the imaging challenges the pipeline targets: dark
Gaussian-profile vessels on a brighter background, a catheter curve that
drifts frame to frame, multiplicative illumination gradients, and Gaussian
noise.  Vessel contrast ramps up over the sequence to mimic contrast
injection, with the first frame(s) showing the catheter only.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree


@dataclass(frozen=True)
class Tube:
    """One vessel branch: a polyline or quadratic Bezier axis plus radius."""

    path: tuple  # ((row, col), ...); 3 control points when kind == "bezier"
    radius: float
    kind: str = "polyline"

    def __post_init__(self):
        if self.radius < 1:
            raise ValueError("tube radius must be >= 1")
        if self.kind not in ("polyline", "bezier"):
            raise ValueError(f"unknown tube kind: {self.kind}")
        if self.kind == "bezier" and len(self.path) != 3:
            raise ValueError("bezier tubes need exactly 3 control points")
        if len(self.path) < 2:
            raise ValueError("tube path needs at least 2 points")


@dataclass(frozen=True)
class CatheterSpec:
    """Catheter curve row = a*col^2 + b*col + c, its half-width, contrast
    depth, and additive per-frame coefficient drift."""

    a: float
    b: float
    c: float
    radius: float = 2.0
    depth: float = 0.5
    drift: tuple = (0.0, 0.0, 0.0)


@dataclass(frozen=True)
class Blob:
    """Round dark decoy (vessel-mimicking background structure)."""

    row: float
    col: float
    radius: float
    depth: float


@dataclass(frozen=True)
class PhantomSpec:
    size: tuple = (512, 512)
    tubes: tuple = ()
    depth: float = 0.45
    background: float = 0.75
    catheter: CatheterSpec | None = None
    illumination: tuple = (0.0, 0.0, 0.0, 0.0)  # linear row/col, quadratic row/col
    noise_sigma: float = 0.02
    seed: int = 0
    injection_start: int = 1  # last 1-based frame with no vessel contrast
    ramp_frames: int = 4
    blobs: tuple = ()
    decoy_tubes: tuple = ()  # tissue-like dark bands, excluded from ground truth

    def __post_init__(self):
        if not 0.0 < self.depth < 1.0:
            raise ValueError("vessel depth must be in (0, 1)")
        if self.noise_sigma < 0:
            raise ValueError("noise sigma must be >= 0")


@dataclass(frozen=True)
class GroundTruth:
    vessel_mask: np.ndarray
    centerline_mask: np.ndarray
    catheter_mask: np.ndarray | None = None


def _axis_points(tube, step=0.25):
    """Dense sample points along the tube axis."""
    pts = np.asarray(tube.path, dtype=np.float64)
    if tube.kind == "bezier":
        p0, p1, p2 = pts
        # arc length upper bound from the control polygon
        n = max(2, int(math.ceil((np.linalg.norm(p1 - p0) + np.linalg.norm(p2 - p1)) / step)))
        t = np.linspace(0.0, 1.0, n)[:, None]
        return (1 - t) ** 2 * p0 + 2 * (1 - t) * t * p1 + t ** 2 * p2
    chunks = []
    for a, b in zip(pts, pts[1:]):
        n = max(2, int(math.ceil(np.linalg.norm(b - a) / step)))
        chunks.append(a + (b - a) * np.linspace(0.0, 1.0, n)[:, None])
    return np.concatenate(chunks)


def _polyline_distance(shape, pts):
    """Exact distance from every pixel to a polyline (min over segments)."""
    h, w = shape
    rows, cols = np.mgrid[0:h, 0:w].astype(np.float64)
    best = np.full(shape, np.inf)
    for a, b in zip(pts, pts[1:]):
        d = b - a
        len2 = d @ d
        if len2 == 0.0:
            dist = np.hypot(rows - a[0], cols - a[1])
        else:
            t = ((rows - a[0]) * d[0] + (cols - a[1]) * d[1]) / len2
            t = np.clip(t, 0.0, 1.0)
            dist = np.hypot(rows - (a[0] + t * d[0]), cols - (a[1] + t * d[1]))
        np.minimum(best, dist, out=best)
    return best


def _sampled_distance(shape, pts):
    """Distance to a densely sampled curve via a KD-tree (error bounded by
    half the sample spacing)."""
    h, w = shape
    rows, cols = np.mgrid[0:h, 0:w]
    grid = np.column_stack([rows.ravel(), cols.ravel()]).astype(np.float64)
    dist, _ = cKDTree(pts).query(grid, k=1)
    return dist.reshape(shape)


def tube_distance(shape, tube):
    if tube.kind == "polyline":
        return _polyline_distance(shape, np.asarray(tube.path, dtype=np.float64))
    return _sampled_distance(shape, _axis_points(tube))


def _rasterize_axis(shape, pts):
    h, w = shape
    rr = np.floor(pts[:, 0] + 0.5).astype(np.int64)
    cc = np.floor(pts[:, 1] + 0.5).astype(np.int64)
    ok = (rr >= 0) & (rr < h) & (cc >= 0) & (cc < w)
    mask = np.zeros(shape, dtype=bool)
    mask[rr[ok], cc[ok]] = True
    return mask


def _catheter_points(cath, shape, step=0.25):
    h, w = shape
    cols = np.arange(0.0, w - 1 + 1e-9, step)
    rows = cath.a * cols * cols + cath.b * cols + cath.c
    ok = (rows >= -2 * cath.radius) & (rows <= h - 1 + 2 * cath.radius)
    return np.column_stack([rows[ok], cols[ok]])


def _drifted(cath, frame_idx):
    da, db, dc = cath.drift
    return CatheterSpec(cath.a + da * frame_idx, cath.b + db * frame_idx,
                        cath.c + dc * frame_idx, cath.radius, cath.depth,
                        cath.drift)


def injection_ramp(frame, spec):
    """Vessel contrast scale for a 1-based frame index: zero through the
    pre-injection frames, then linear up to full over ramp_frames."""
    return min(1.0, max(0.0, (frame - spec.injection_start) / spec.ramp_frames))


@dataclass(frozen=True)
class _StaticFields:
    vessel_drop: np.ndarray
    vessel_mask: np.ndarray
    centerline_mask: np.ndarray
    illum: np.ndarray
    blob_drop: np.ndarray


def _static_fields(spec):
    h, w = spec.size
    vessel_drop = np.zeros((h, w))
    vessel_mask = np.zeros((h, w), dtype=bool)
    centerline = np.zeros((h, w), dtype=bool)
    for tube in spec.tubes:
        dist = tube_distance((h, w), tube)
        sigma = tube.radius / 2.0
        np.maximum(vessel_drop, spec.depth * np.exp(-dist * dist / (2.0 * sigma * sigma)),
                   out=vessel_drop)
        vessel_mask |= dist <= tube.radius
        centerline |= _rasterize_axis((h, w), _axis_points(tube))
    rows = (np.arange(h) / max(h - 1, 1) - 0.5)[:, None]
    cols = (np.arange(w) / max(w - 1, 1) - 0.5)[None, :]
    gr, gc, qr, qc = spec.illumination
    illum = 1.0 + gr * rows + gc * cols + qr * rows * rows + qc * cols * cols
    blob_drop = np.zeros((h, w))
    rr, cc = np.mgrid[0:h, 0:w].astype(np.float64)
    for blob in spec.blobs:
        d2 = (rr - blob.row) ** 2 + (cc - blob.col) ** 2
        s = blob.radius / 2.0
        np.maximum(blob_drop, blob.depth * np.exp(-d2 / (2.0 * s * s)), out=blob_drop)
    for tube, depth in spec.decoy_tubes:
        dist = tube_distance((h, w), tube)
        sigma = tube.radius / 2.0
        np.maximum(blob_drop, depth * np.exp(-dist * dist / (2.0 * sigma * sigma)),
                   out=blob_drop)
    return _StaticFields(vessel_drop, vessel_mask, centerline & vessel_mask, illum, blob_drop)


def generate(spec, n_frames=1):
    """Render the phantom sequence.

    Returns a list of (frame, GroundTruth) pairs.  Single-frame phantoms are
    rendered fully injected; sequences ramp vessel contrast up after
    ``injection_start`` so early frames show only the catheter.
    Deterministic for a fixed seed.
    """
    if n_frames < 1:
        raise ValueError("need at least one frame")
    fields = _static_fields(spec)
    rng = np.random.default_rng(spec.seed)
    h, w = spec.size
    out = []
    for i in range(1, n_frames + 1):
        ramp = 1.0 if n_frames == 1 else injection_ramp(i, spec)
        img = spec.background - ramp * fields.vessel_drop - fields.blob_drop
        cath_mask = None
        if spec.catheter is not None:
            cath = _drifted(spec.catheter, i - 1)
            pts = _catheter_points(cath, (h, w))
            if len(pts):
                dist = _sampled_distance((h, w), pts)
                s = cath.radius / 2.0
                img = img - cath.depth * np.exp(-dist * dist / (2.0 * s * s))
                cath_mask = dist <= cath.radius
            else:
                cath_mask = np.zeros((h, w), dtype=bool)
        img = img * fields.illum
        if spec.noise_sigma > 0:
            img = img + rng.normal(0.0, spec.noise_sigma, size=(h, w))
        img = np.clip(img, 0.0, 1.0)
        out.append((img, GroundTruth(fields.vessel_mask.copy(),
                                     fields.centerline_mask.copy(), cath_mask)))
    return out


def standard_suite_spec(seed, size=512):
    """The standard evaluation phantom: a Y-shaped vessel tree with a side
    twig, an illumination gradient, mild noise, and two vessel-mimicking
    decoys (a wide blob and a rib-like dark band) that exercise the
    false-positive removal stages."""
    f = size / 512.0
    return PhantomSpec(
        size=(size, size),
        tubes=(
            Tube(((40.0 * f, 200.0 * f), (250.0 * f, 250.0 * f),
                  (480.0 * f, 170.0 * f)), 5.0, "bezier"),
            Tube(((250.0 * f, 250.0 * f), (380.0 * f, 350.0 * f),
                  (470.0 * f, 430.0 * f)), 4.5),
            Tube(((330.0 * f, 310.0 * f), (420.0 * f, 260.0 * f)), 3.5),
        ),
        depth=0.5,
        illumination=(0.15, 0.08, 0.0, 0.0),
        noise_sigma=0.02,
        seed=seed,
        blobs=(Blob(120.0 * f, 420.0 * f, 22.0, 0.22),),
        decoy_tubes=((Tube(((400.0 * f, 40.0 * f), (470.0 * f, 150.0 * f)), 7.0), 0.22),),
    )


def catheter_suite_spec(seed, size=256, with_vessels=True):
    """Drifting-catheter sequence phantom: catheter visible from frame 1,
    vessel clutter ramping in from frame 4."""
    f = size / 256.0
    rng = np.random.default_rng(seed)
    drift = (float(rng.uniform(-2e-5, 2e-5)), float(rng.uniform(-0.006, 0.006)),
             float(rng.uniform(-1.0, 1.0)))
    tubes = ()
    if with_vessels:
        tubes = (
            Tube(((30.0 * f, 40.0 * f), (140.0 * f, 120.0 * f),
                  (230.0 * f, 100.0 * f)), 4.0, "bezier"),
            Tube(((140.0 * f, 120.0 * f), (220.0 * f, 220.0 * f)), 3.0),
        )
    return PhantomSpec(
        size=(size, size),
        tubes=tubes,
        depth=0.45,
        catheter=CatheterSpec(a=float(rng.uniform(0.0012, 0.0025)),
                              b=float(rng.uniform(-0.55, -0.35)),
                              c=float(rng.uniform(100.0, 140.0)) * f,
                              radius=2.0, depth=0.5, drift=drift),
        illumination=(0.1, 0.05, 0.0, 0.0),
        noise_sigma=0.02,
        seed=seed,
        injection_start=3,
    )


class PhantomSpecError(ValueError):
    def __init__(self, line_no, message):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def _parse_parts(value):
    """Split 'a=1; b=2; points=3:4 5:6' into a key->string dict."""
    out = {}
    for part in value.split(";"):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise ValueError(f"expected key=value part, got {part!r}")
        k, _, v = part.partition("=")
        out[k.strip()] = v.strip()
    return out


def _parse_points(text):
    pts = []
    for token in text.split():
        r, _, c = token.partition(":")
        pts.append((float(r), float(c)))
    return tuple(pts)


def _parse_tube(value):
    parts = _parse_parts(value)
    return Tube(path=_parse_points(parts["points"]),
                radius=float(parts["radius"]),
                kind=parts.get("kind", "polyline"))


def parse_phantom_spec(text):
    """Parse the plain-text phantom description.

    Scalar keys: size, depth, background, noise_sigma, seed, illumination
    (4 comma-separated coefficients), injection_start, ramp_frames.
    Repeatable structured keys: tube, blob, decoy, plus one catheter line.
    """
    scalars = {}
    tubes = []
    blobs = []
    decoys = []
    cath = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise PhantomSpecError(line_no, f"expected key=value, got {raw.strip()!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        try:
            if key == "size":
                dims = [int(v) for v in value.split(",")]
                scalars["size"] = (dims[0], dims[0]) if len(dims) == 1 else (dims[0], dims[1])
            elif key in ("depth", "background", "noise_sigma"):
                scalars[key] = float(value)
            elif key in ("seed", "injection_start", "ramp_frames"):
                scalars[key] = int(value)
            elif key == "illumination":
                coeffs = tuple(float(v) for v in value.split(","))
                if len(coeffs) != 4:
                    raise ValueError("illumination needs 4 coefficients")
                scalars["illumination"] = coeffs
            elif key == "tube":
                tubes.append(_parse_tube(value))
            elif key == "decoy":
                parts = _parse_parts(value)
                decoys.append((Tube(path=_parse_points(parts["points"]),
                                    radius=float(parts["radius"]),
                                    kind=parts.get("kind", "polyline")),
                               float(parts.get("depth", "0.2"))))
            elif key == "blob":
                parts = _parse_parts(value)
                blobs.append(Blob(row=float(parts["row"]), col=float(parts["col"]),
                                  radius=float(parts["radius"]),
                                  depth=float(parts["depth"])))
            elif key == "catheter":
                parts = _parse_parts(value)
                drift = tuple(float(v) for v in parts.get("drift", "0,0,0").split(","))
                cath = CatheterSpec(a=float(parts["a"]), b=float(parts["b"]),
                                    c=float(parts["c"]),
                                    radius=float(parts.get("radius", "2")),
                                    depth=float(parts.get("depth", "0.5")),
                                    drift=drift)
            else:
                raise ValueError(f"unknown key {key!r}")
        except PhantomSpecError:
            raise
        except (ValueError, KeyError) as exc:
            raise PhantomSpecError(line_no, f"{key}: {exc}") from exc
    try:
        return PhantomSpec(tubes=tuple(tubes), blobs=tuple(blobs),
                           decoy_tubes=tuple(decoys), catheter=cath, **scalars)
    except ValueError as exc:
        raise PhantomSpecError(0, str(exc)) from exc


def load_phantom_spec(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_phantom_spec(fh.read())


def dice(a, b):
    """Dice overlap 2|A&B| / (|A|+|B|); two empty masks count as 1."""
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    if a.shape != b.shape:
        raise ValueError(f"mask shapes differ: {a.shape} vs {b.shape}")
    total = int(a.sum()) + int(b.sum())
    if total == 0:
        return 1.0
    return 2.0 * int((a & b).sum()) / total


def mask_distance(mask):
    """Distance from every pixel to the nearest True pixel of the mask."""
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        return np.full(mask.shape, np.inf)
    return ndimage.distance_transform_edt(~mask)


def coverage_within(target, predicted, tol):
    """Fraction of target pixels within tol of a predicted pixel."""
    target = np.asarray(target, dtype=bool)
    n = int(target.sum())
    if n == 0:
        return 1.0
    return float((mask_distance(predicted)[target] <= tol).mean())


def catheter_precision(poly, gt_mask, tol=2.0):
    """Fraction of tracked-curve pixels within tol of the catheter mask:
    TP / (TP + FP) over the rasterized curve."""
    from .catheter import sample_curve

    gt_mask = np.asarray(gt_mask, dtype=bool)
    pts = sample_curve(poly, gt_mask.shape)
    if len(pts) == 0:
        raise ValueError("curve does not intersect the image")
    rr = np.floor(pts[:, 0] + 0.5).astype(np.int64)
    cc = np.floor(pts[:, 1] + 0.5).astype(np.int64)
    dist = mask_distance(gt_mask)
    return float((dist[rr, cc] <= tol).mean())
