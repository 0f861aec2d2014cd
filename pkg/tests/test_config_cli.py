import subprocess
import sys

import pytest

from angioseg import io, phantom
from angioseg.config import (ConfigError, PipelineConfig, parse_config,
                             serialize_config)


def test_empty_config_gives_published_defaults():
    cfg = parse_config("")
    assert cfg.ridge_t_low == 0.2
    assert cfg.ridge_t_medium == 0.25
    assert cfg.ridge_t_high == 0.4
    assert cfg.superpixel_ks == (2000, 3000, 4000)
    assert cfg.superpixel_t == 0.5
    assert cfg.guided_r == 8 and cfg.guided_eps == 0.2
    assert cfg.refine_t_d == 0.2 and cfg.refine_d == 25
    assert cfg.tophat_radii == (3, 5, 7, 9, 11, 13, 15, 17, 19)


def test_serialize_round_trips_and_contains_published_values():
    text = serialize_config(PipelineConfig())
    cfg = parse_config(text)
    assert cfg == PipelineConfig()
    for needle in ("0.2", "0.25", "0.4", "2000,3000,4000", "0.5", "25",
                   "3,5,7,9,11,13,15,17,19"):
        assert needle in text


def test_single_override():
    cfg = parse_config("superpixel_t = 0.7\n")
    assert cfg.superpixel_t == 0.7
    assert cfg.ridge_t_low == 0.2


def test_out_of_range_value_reports_line():
    with pytest.raises(ConfigError) as err:
        parse_config("# comment\nsuperpixel_t = 1.5\n")
    assert err.value.line_no == 2


def test_unknown_key_rejected():
    with pytest.raises(ConfigError) as err:
        parse_config("superpixel_q = 0.5\n")
    assert err.value.line_no == 1


def test_malformed_line_rejected():
    with pytest.raises(ConfigError):
        parse_config("this is not a config line\n")
    with pytest.raises(ConfigError):
        parse_config("slic_max_iter = soon\n")


def test_cross_field_ordering_checked():
    with pytest.raises(ConfigError):
        parse_config("ridge_t_low = 0.5\n")  # above the default medium
    cfg = parse_config("ridge_t_low = 0.5\nridge_t_medium = 0.6\nridge_t_high = 0.7\n")
    assert cfg.ridge_t_medium == 0.6


def _cli(*args):
    return subprocess.run([sys.executable, "-m", "angioseg.cli", *args],
                          capture_output=True, text=True)


@pytest.fixture(scope="module")
def phantom_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("frames")
    spec = phantom.catheter_suite_spec(2, size=128)
    frames = phantom.generate(spec, n_frames=5)
    for i, (img, gt) in enumerate(frames):
        io.write_image(str(out / f"frame_{i:03d}.pgm"), img)
        io.write_mask(str(out / f"gt_vessel_{i:03d}.pgm"), gt.vessel_mask)
        io.write_mask(str(out / f"gt_centerline_{i:03d}.pgm"), gt.centerline_mask)
        if gt.catheter_mask is not None:
            io.write_mask(str(out / f"gt_catheter_{i:03d}.pgm"), gt.catheter_mask)
    return out


def test_cli_run_sequence_with_ground_truth(phantom_dir, tmp_path):
    out = tmp_path / "out"
    res = _cli("run", "--input", str(phantom_dir), "--out", str(out),
               "--ground-truth", str(phantom_dir))
    assert res.returncode == 0, res.stderr
    assert (out / "metrics.txt").is_file()
    metrics = (out / "metrics.txt").read_text()
    assert "catheter_precision" in metrics
    assert "mean_catheter_precision" in metrics
    assert (out / "artery_000.pgm").is_file()
    assert (out / "overlay_000.png").is_file()
    assert (out / "catheter_000.pgm").is_file()
    # catheter subtraction: final artery mask disjoint from catheter mask
    artery = io.read_mask(str(out / "artery_004.pgm"))
    cath = io.read_mask(str(out / "catheter_004.pgm"))
    assert not (artery & cath).any()


def test_cli_run_single_frame_no_catheter_outputs(phantom_dir, tmp_path):
    out = tmp_path / "single"
    res = _cli("run", "--input", str(phantom_dir / "frame_004.pgm"),
               "--out", str(out), "--no-catheter")
    assert res.returncode == 0, res.stderr
    assert (out / "artery_000.pgm").is_file()
    assert not (out / "catheter_000.pgm").exists()


def test_cli_debug_artifacts(phantom_dir, tmp_path):
    out = tmp_path / "dbg"
    res = _cli("run", "--input", str(phantom_dir / "frame_004.pgm"),
               "--out", str(out), "--no-catheter", "--debug-artifacts")
    assert res.returncode == 0, res.stderr
    for name in ("debug_ice_000.pgm", "debug_iv_000.pgm",
                 "debug_smoothed_000.pgm", "debug_ridge_low_000.pgm",
                 "debug_voted_000.pgm", "debug_initial_000_s0.pgm",
                 "debug_superpixels_000.png"):
        assert (out / name).is_file(), name


def test_cli_missing_input_exits_2_without_outputs(tmp_path):
    out = tmp_path / "never"
    res = _cli("run", "--input", str(tmp_path / "nope.pgm"), "--out", str(out))
    assert res.returncode == 2
    assert not out.exists()


def test_cli_bad_config_exits_3(phantom_dir, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("superpixel_t = 2.0\n")
    res = _cli("run", "--config", str(cfg),
               "--input", str(phantom_dir / "frame_000.pgm"),
               "--out", str(tmp_path / "o"))
    assert res.returncode == 3
    assert "line 1" in res.stderr


def test_cli_phantom_generates_consumable_frames(tmp_path):
    out = tmp_path / "ph"
    res = _cli("phantom", "--preset", "catheter", "--frames", "2",
               "--size", "96", "--seed", "5", "--out", str(out))
    assert res.returncode == 0, res.stderr
    assert (out / "frame_001.pgm").is_file()
    assert (out / "gt_vessel_000.pgm").is_file()
    assert (out / "gt_catheter_000.pgm").is_file()


def test_cli_phantom_spec_file(tmp_path):
    spec = tmp_path / "spec.txt"
    spec.write_text("size = 64\n"
                    "noise_sigma = 0\n"
                    "tube = radius=3; points=5:32 60:32\n")
    out = tmp_path / "ph2"
    res = _cli("phantom", "--spec", str(spec), "--frames", "1", "--out", str(out))
    assert res.returncode == 0, res.stderr
    img = io.read_image(str(out / "frame_000.pgm"))
    assert img.shape == (64, 64)
    res = _cli("phantom", "--spec", str(tmp_path / "missing.txt"),
               "--out", str(out))
    assert res.returncode == 2


def test_cli_default_config_parses():
    res = _cli("default-config")
    assert res.returncode == 0
    assert parse_config(res.stdout) == PipelineConfig()


def test_pipeline_determinism_byte_identical(tmp_path):
    spec = phantom.standard_suite_spec(4, size=96)
    (img, _), = phantom.generate(spec, 1)
    src = tmp_path / "f.pgm"
    io.write_image(str(src), img)
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        res = _cli("run", "--input", str(src), "--out", str(out), "--no-catheter")
        assert res.returncode == 0, res.stderr
        outs.append((out / "artery_000.pgm").read_bytes())
    assert outs[0] == outs[1]
