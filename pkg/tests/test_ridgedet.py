import numpy as np
import pytest

from angioseg import phantom, ridgedet


def tube(center_col=64.3, width=4.0, depth=0.45, bg=0.75, size=128):
    cols = np.arange(size, dtype=np.float64)[None, :]
    sigma = width / 2.0
    return (bg - depth * np.exp(-(cols - center_col) ** 2 / (2 * sigma * sigma))) \
        * np.ones((size, 1))


def test_constant_image_zero_response():
    v = ridgedet.valley_response(np.full((32, 32), 0.5))
    assert v.response.max() == 0.0
    assert not ridgedet.extract_ridges(v, 0.2).any()


def test_tube_response_peaks_on_centerline():
    img = tube()
    v = ridgedet.valley_response(img)
    peak_cols = np.argmax(v.response, axis=1)
    assert np.all(np.abs(peak_cols - 64.3) <= 1.0)


def test_bright_tube_gives_zero_response():
    img = 0.25 + 0.45 * np.exp(-(np.arange(128)[None, :] - 64.0) ** 2 / (2 * 4.0)) \
        * np.ones((128, 1))
    v = ridgedet.valley_response(img)
    assert v.response[:, 62:67].max() == 0.0


def test_extract_at_threshold_one_is_empty():
    v = ridgedet.valley_response(tube())
    assert not ridgedet.extract_ridges(v, 1.0).any()


def test_threshold_monotonicity():
    v = ridgedet.valley_response(tube())
    low = ridgedet.extract_ridges(v, 0.2)
    med = ridgedet.extract_ridges(v, 0.25)
    high = ridgedet.extract_ridges(v, 0.4)
    assert (high <= med).all() and (med <= low).all()


def test_ridge_maps_counts_and_inclusion():
    maps = ridgedet.ridge_maps(tube())
    assert maps.low.sum() >= maps.medium.sum() >= maps.high.sum()
    assert (maps.high <= maps.medium).all()
    assert (maps.medium <= maps.low).all()


def test_flat_image_three_empty_maps():
    maps = ridgedet.ridge_maps(np.full((32, 32), 0.7))
    assert not maps.low.any() and not maps.medium.any() and not maps.high.any()


def test_phantom_ridge_covers_centerline():
    spec = phantom.standard_suite_spec(0, size=256)
    (img, gt), = phantom.generate(spec, 1)
    maps = ridgedet.ridge_maps(img)
    cov = phantom.coverage_within(gt.centerline_mask, maps.low, 1.0)
    assert cov >= 0.9


def test_catheter_and_artery_ridges_present_in_low_map():
    spec = phantom.catheter_suite_spec(1, size=256)
    frames = phantom.generate(spec, n_frames=8)
    img, gt = frames[-1]  # fully injected
    maps = ridgedet.ridge_maps(img)
    cath_axis = gt.catheter_mask & ~np.roll(gt.catheter_mask, 2, axis=0)
    assert phantom.coverage_within(gt.centerline_mask, maps.low, 2.0) >= 0.85
    assert phantom.coverage_within(cath_axis, maps.low, 2.0) >= 0.85


def test_ridges_are_thin():
    maps = ridgedet.ridge_maps(tube())
    # the vertical tube's ridge: at most one pixel per row
    assert maps.low.sum(axis=1).max() <= 2


def test_response_invariant_under_offset():
    img = tube()
    v1 = ridgedet.valley_response(img)
    v2 = ridgedet.valley_response(img + 0.1)
    assert np.abs(v1.response - v2.response).max() < 1e-9


def test_threshold_validation():
    v = ridgedet.valley_response(tube())
    with pytest.raises(ValueError):
        ridgedet.extract_ridges(v, 0.0)
    with pytest.raises(ValueError):
        ridgedet.ridge_maps(tube(), thresholds=(0.4, 0.25, 0.2))
