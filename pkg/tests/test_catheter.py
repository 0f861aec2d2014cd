import numpy as np
import pytest

from angioseg import catheter
from angioseg.catheter import (DetectionFailed, FitFailed, Poly2, TrackingLost,
                               TrackState, catheter_mask, detect_first_frame,
                               fit_poly2, hough_line_segments, sample_curve,
                               select_catheter_ridge, track_sequence,
                               track_step)


def _parabola_ridge(shape, a, b, c, col0=5, col1=None):
    h, w = shape
    mask = np.zeros(shape, bool)
    poly = Poly2(a, b, c)
    pts = sample_curve(poly, shape)
    rr = np.floor(pts[:, 0] + 0.5).astype(int)
    cc = np.floor(pts[:, 1] + 0.5).astype(int)
    keep = (cc >= col0) & (cc < (w - 5 if col1 is None else col1))
    mask[rr[keep], cc[keep]] = True
    return mask


def test_fit_exact_parabola():
    xs = np.arange(-10, 11, dtype=float)
    pts = np.column_stack([xs ** 2, xs])
    p = fit_poly2(pts)
    assert p.axis == "col"
    assert abs(p.a - 1) < 1e-9 and abs(p.b) < 1e-9 and abs(p.c) < 1e-9


def test_fit_constant_line():
    pts = np.column_stack([np.full(20, 5.0), np.arange(20, dtype=float)])
    p = fit_poly2(pts)
    assert abs(p.a) < 1e-9 and abs(p.b) < 1e-9 and abs(p.c - 5.0) < 1e-9


def test_fit_noisy_parabola_within_5_percent():
    rng = np.random.default_rng(0)
    t = np.linspace(0, 100, 200)
    true = (0.004, -0.3, 60.0)
    pts = np.column_stack([true[0] * t * t + true[1] * t + true[2]
                           + rng.normal(0, 0.5, 200), t])
    p = fit_poly2(pts)
    assert abs(p.a - true[0]) <= 0.05 * abs(true[0])
    assert abs(p.b - true[1]) <= 0.05 * abs(true[1])
    assert abs(p.c - true[2]) <= 0.05 * abs(true[2])


def test_fit_near_vertical_uses_row_axis():
    ys = np.arange(0, 50, dtype=float)
    pts = np.column_stack([ys, 0.01 * ys * ys + 20.0])  # col = f(row)
    p = fit_poly2(pts)
    assert p.axis == "row"


def test_fit_too_few_points():
    with pytest.raises(FitFailed):
        fit_poly2(np.array([[0.0, 0.0], [1.0, 1.0]]))


def test_hough_empty_mask():
    assert hough_line_segments(np.zeros((32, 32), bool)) == []


def test_hough_single_line_covered():
    ridge = np.zeros((128, 128), bool)
    ridge[30, 10:110] = True
    segs = hough_line_segments(ridge)
    assert len(segs) == 1
    assert segs[0].length >= 95


def test_hough_orders_by_length():
    ridge = np.zeros((128, 128), bool)
    ridge[30, 10:110] = True
    ridge[80, 20:70] = True
    segs = hough_line_segments(ridge)
    assert [s.length for s in segs[:2]] == [100, 50]


def test_select_prefers_component_with_most_segments():
    # zig-zag component carrying 3 straight pieces vs one short line
    ridge = np.zeros((128, 128), bool)
    ridge[20, 10:50] = True
    ridge[20:60, 49] = True
    ridge[59, 49:90] = True
    ridge[100, 10:40] = True  # separate single-segment artifact
    segs = hough_line_segments(ridge, min_len=20)
    comp = select_catheter_ridge(ridge, segs)
    assert comp[20, 30] and comp[40, 49] and comp[59, 70]
    assert not comp[100, 20]


def test_select_tie_breaks_on_longest_line():
    ridge = np.zeros((128, 128), bool)
    ridge[20, 10:90] = True   # component A: one 80-px line
    ridge[80, 10:50] = True   # component B: one 40-px line
    segs = hough_line_segments(ridge, min_len=20)
    comp = select_catheter_ridge(ridge, segs)
    assert comp[20, 40] and not comp[80, 20]


def test_select_no_components_fails():
    with pytest.raises(DetectionFailed):
        select_catheter_ridge(np.zeros((16, 16), bool), [])


def test_track_step_stationary():
    ridge = _parabola_ridge((128, 128), 0.004, -0.4, 60.0)
    prev = TrackState(poly=Poly2(0.004, -0.4, 60.0), frame_index=0)
    state = track_step(prev, ridge)
    assert abs(state.poly.a - 0.004) <= 2e-4
    assert abs(state.poly.b + 0.4) <= 0.05
    assert abs(state.poly.c - 60.0) <= 2.0
    assert state.fit_support >= 50


def test_track_step_recovers_vertical_shift():
    ridge = _parabola_ridge((128, 128), 0.004, -0.4, 63.0)
    prev = TrackState(poly=Poly2(0.004, -0.4, 60.0), frame_index=0)
    state = track_step(prev, ridge)
    assert abs(state.poly.c - 63.0) <= 1.0


def test_track_step_lost_when_catheter_erased():
    prev = TrackState(poly=Poly2(0.004, -0.4, 60.0), frame_index=0)
    with pytest.raises(TrackingLost):
        track_step(prev, np.zeros((128, 128), bool))


def test_track_grid_argmax_matches_brute_force():
    ridge = _parabola_ridge((96, 96), 0.003, -0.3, 50.0)
    prev = TrackState(poly=Poly2(0.0028, -0.31, 48.0), frame_index=0,
                      search_window=(4e-4, 0.05, 6.0))
    support = catheter._support_mask(ridge)
    best = -1
    for a in np.linspace(prev.poly.a - 4e-4, prev.poly.a + 4e-4, 11):
        for b in np.linspace(prev.poly.b - 0.05, prev.poly.b + 0.05, 11):
            for c in np.linspace(prev.poly.c - 6.0, prev.poly.c + 6.0, 21):
                n = catheter._count_support(Poly2(a, b, c), support)
                if n > best:
                    best = n
    state = track_step(prev, ridge)
    assert state.fit_support == best


def test_detect_first_frame_on_curved_ridge():
    ridge = _parabola_ridge((128, 128), 0.002, -0.2, 70.0)
    state = detect_first_frame(ridge)
    assert abs(state.poly.a - 0.002) < 5e-4
    assert abs(state.poly.c - 70.0) < 3.0


def test_track_sequence_single_frame_detection_only():
    ridge = _parabola_ridge((128, 128), 0.002, -0.2, 70.0)
    states = track_sequence([ridge])
    assert len(states) == 1 and states[0].frame_index == 0


def test_track_sequence_flags_lost_frames_and_recovers():
    r0 = _parabola_ridge((128, 128), 0.002, -0.2, 70.0)
    r1 = np.zeros((128, 128), bool)
    states = track_sequence([r0, r1, r0])
    assert not states[0].lost
    assert states[1].lost
    assert states[1].poly == states[0].poly  # keeps the previous curve
    assert not states[2].lost


def test_catheter_mask_width_one_is_raster():
    poly = Poly2(0.0, 0.0, 40.0)
    mask = catheter_mask(poly, width=1, shape=(96, 96))
    assert mask[40].all()
    assert mask.sum() == 96


def test_catheter_mask_count_tracks_arc_length():
    poly = Poly2(0.001, -0.1, 50.0)
    pts = sample_curve(poly, (96, 96))
    arc = len(pts)  # unit-arc samples = curve length in pixels
    for width in (1, 3, 5):
        mask = catheter_mask(poly, width=width, shape=(96, 96))
        assert abs(mask.sum() - arc * width) <= 0.2 * arc * width


def test_catheter_mask_monotone_in_width():
    poly = Poly2(0.001, -0.1, 50.0)
    m1 = catheter_mask(poly, 1, (96, 96))
    m3 = catheter_mask(poly, 3, (96, 96))
    m5 = catheter_mask(poly, 5, (96, 96))
    assert (m1 <= m3).all() and (m3 <= m5).all()


def test_catheter_mask_out_of_bounds_curve_is_empty():
    poly = Poly2(0.0, 0.0, 500.0)
    assert not catheter_mask(poly, 3, (96, 96)).any()


def test_tracked_curve_stays_within_2px_of_ground_truth():
    # drifting catheter with vessel clutter appearing mid-sequence: the
    # tracked curve's mean distance to the true catheter stays within 2 px
    # on every frame
    from angioseg import enhance, phantom, ridgedet
    from angioseg.phantom import mask_distance

    spec = phantom.catheter_suite_spec(6, size=256)
    frames = phantom.generate(spec, n_frames=10)
    ridges = []
    for img, _ in frames:
        sm = enhance.guided_filter(img, img, enhance.GuidedParams(r=4, eps=0.01))
        ridges.append(ridgedet.ridge_maps(sm).medium)
    states = track_sequence(ridges)
    for i, state in enumerate(states):
        gt = frames[i][1].catheter_mask
        pts = sample_curve(state.poly, gt.shape)
        rr = np.floor(pts[:, 0] + 0.5).astype(int)
        cc = np.floor(pts[:, 1] + 0.5).astype(int)
        mean_dev = mask_distance(gt)[rr, cc].mean()
        assert mean_dev <= 2.0, f"frame {i + 1}: mean deviation {mean_dev:.2f}"


def test_poly2_validation():
    with pytest.raises(ValueError):
        Poly2(np.nan, 0.0, 0.0)
    with pytest.raises(ValueError):
        Poly2(0.0, 0.0, 0.0, axis="diag")
