import numpy as np
import pytest

from angioseg import oracles, phantom
from angioseg.catheter import Poly2
from angioseg.phantom import (Blob, CatheterSpec, PhantomSpec, Tube,
                              catheter_precision, dice, generate,
                              parse_phantom_spec)


def test_flat_spec_constant_frames():
    spec = PhantomSpec(size=(32, 32), tubes=(), noise_sigma=0.0)
    frames = generate(spec, n_frames=3)
    for img, gt in frames:
        assert np.ptp(img) == 0.0
        assert not gt.vessel_mask.any()


def test_same_seed_bit_identical():
    spec = phantom.standard_suite_spec(7, size=96)
    a = generate(spec, n_frames=2)
    b = generate(spec, n_frames=2)
    for (ia, _), (ib, _) in zip(a, b):
        assert np.array_equal(ia, ib)


def test_vessel_mask_area_matches_analytic():
    r = 4
    tube = Tube(((10.0, 48.0), (86.0, 48.0)), float(r))
    spec = PhantomSpec(size=(96, 96), tubes=(tube,), noise_sigma=0.0)
    (_, gt), = generate(spec, 1)
    # discrete stadium: (L+1) pixel rows of width 2r+1 plus the two
    # end caps (disk pixels outside the central strip)
    disk = sum(1 for dy in range(-r, r + 1) for dx in range(-r, r + 1)
               if dy * dy + dx * dx <= r * r)
    analytic = (86 - 10 + 1) * (2 * r + 1) + (disk - (2 * r + 1))
    assert gt.vessel_mask.sum() == analytic
    continuous = (86 - 10) * 2 * r + np.pi * r * r
    assert abs(analytic - continuous) / continuous < 0.15


def test_centerline_inside_vessel_mask():
    spec = phantom.standard_suite_spec(0, size=128)
    (_, gt), = generate(spec, 1)
    assert (gt.centerline_mask <= gt.vessel_mask).all()
    assert gt.centerline_mask.any()


def test_injection_ramp_phases():
    # horizontal vessel at row 32, catheter line at row 10 (disjoint)
    spec = PhantomSpec(size=(64, 64),
                       tubes=(Tube(((32.0, 5.0), (32.0, 60.0)), 3.0),),
                       catheter=CatheterSpec(0.0, 0.0, 10.0),
                       noise_sigma=0.0, injection_start=1, ramp_frames=4)
    frames = generate(spec, n_frames=6)
    tube_px = frames[-1][1].vessel_mask
    depths = [float((spec.background - img)[tube_px].max()) for img, _ in frames]
    assert depths[0] < 0.01  # frame 1 pre-injection: catheter only
    assert depths[1] < depths[2] < depths[3]
    assert abs(depths[4] - depths[5]) < 0.01  # ramp saturated


def test_single_frame_is_fully_injected():
    spec = PhantomSpec(size=(64, 64),
                       tubes=(Tube(((5.0, 32.0), (60.0, 32.0)), 3.0),),
                       noise_sigma=0.0)
    (img, gt), = generate(spec, 1)
    depth = (spec.background - img)[gt.vessel_mask].max()
    assert depth == pytest.approx(spec.depth, rel=0.01)


def test_dice_basic_cases():
    a = np.zeros((8, 8), bool)
    a[:4] = True
    assert dice(a, a) == 1.0
    assert dice(a, ~a) == 0.0
    assert dice(np.zeros((4, 4), bool), np.zeros((4, 4), bool)) == 1.0
    half = np.zeros((8, 8), bool)
    half[:2] = True
    half[4:6] = True
    assert dice(a, half) == pytest.approx(0.5)
    assert dice(a, half) == dice(half, a)
    with pytest.raises(ValueError):
        dice(a, np.zeros((4, 4), bool))


def test_catheter_precision_cases():
    gt = np.zeros((64, 64), bool)
    gt[38:43, :] = True  # horizontal band around row 40
    on = Poly2(0.0, 0.0, 40.0)
    off = Poly2(0.0, 0.0, 10.0)
    assert catheter_precision(on, gt, tol=2.0) == 1.0
    assert catheter_precision(off, gt, tol=2.0) == 0.0
    with pytest.raises(ValueError):
        catheter_precision(Poly2(0.0, 0.0, 500.0), gt)


def test_catheter_precision_half_overlap():
    gt = np.zeros((64, 64), bool)
    gt[38:43, :32] = True  # band covers only the left half
    poly = Poly2(0.0, 0.0, 40.0)
    p = catheter_precision(poly, gt, tol=2.0)
    assert abs(p - 0.5) < 0.05


def test_oracle_self_consistency():
    rng = np.random.default_rng(0)
    img = rng.random((8, 8))
    assert np.allclose(oracles.brute_convolve(img, [[1.0]]), img)
    ones = np.ones((2, 2), bool)
    zeros = np.zeros((2, 2), bool)
    assert oracles.truth_table_vote(ones, ones, zeros).all()
    assert not oracles.truth_table_vote(ones, zeros, zeros).any()


def test_parse_phantom_spec_round_trip():
    text = """
size = 96
depth = 0.4
noise_sigma = 0.01
seed = 3
illumination = 0.1,0.05,0,0
tube = kind=polyline; radius=4; points=10:48 86:48
tube = kind=bezier; radius=3; points=10:10 48:60 86:20
blob = row=20; col=70; radius=10; depth=0.2
decoy = radius=6; depth=0.15; points=80:10 90:40
catheter = a=0.002; b=-0.4; c=48; radius=2; depth=0.5; drift=0,0,0.5
injection_start = 2
"""
    spec = parse_phantom_spec(text)
    assert spec.size == (96, 96)
    assert len(spec.tubes) == 2 and spec.tubes[1].kind == "bezier"
    assert spec.blobs[0].radius == 10.0
    assert spec.decoy_tubes[0][1] == 0.15
    assert spec.catheter.drift == (0.0, 0.0, 0.5)
    assert spec.injection_start == 2
    frames = generate(spec, n_frames=2)
    assert frames[0][1].catheter_mask is not None


def test_parse_phantom_spec_errors_carry_line_numbers():
    with pytest.raises(phantom.PhantomSpecError) as err:
        parse_phantom_spec("size = 64\nbogus_key = 1\n")
    assert err.value.line_no == 2
    with pytest.raises(phantom.PhantomSpecError) as err:
        parse_phantom_spec("tube = radius=4\n")
    assert err.value.line_no == 1


def test_tube_validation():
    with pytest.raises(ValueError):
        Tube(((0.0, 0.0),), 4.0)
    with pytest.raises(ValueError):
        Tube(((0.0, 0.0), (1.0, 1.0)), 0.5)
    with pytest.raises(ValueError):
        Tube(((0.0, 0.0), (1.0, 1.0)), 2.0, "bezier")
    with pytest.raises(ValueError):
        Blob(0, 0, 5, 0.2) and PhantomSpec(depth=1.5)
