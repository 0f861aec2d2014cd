"""Pipeline configuration: plain-text key=value files with '#' comments.

Every knob defaults to the published operating point; omitted keys keep
their defaults, unknown keys and out-of-range values are rejected with the
offending line number.
"""

from dataclasses import dataclass, fields


class ConfigError(ValueError):
    def __init__(self, line_no, message):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def _parse_bool(text):
    t = text.strip().lower()
    if t in ("true", "1", "yes", "on"):
        return True
    if t in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_int_list(text):
    return tuple(int(v) for v in text.split(","))


def _parse_float_list(text):
    return tuple(float(v) for v in text.split(","))


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ",".join(_fmt(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _unit_interval(name):
    def check(v):
        if not 0.0 < v < 1.0:
            raise ValueError(f"{name} must be in (0, 1), got {v}")
    return check


def _positive(name):
    def check(v):
        if v <= 0:
            raise ValueError(f"{name} must be > 0, got {v}")
    return check


def _at_least(name, lo):
    def check(v):
        if v < lo:
            raise ValueError(f"{name} must be >= {lo}, got {v}")
    return check


def _increasing_radii(v):
    if any(r < 1 for r in v) or any(b <= a for a, b in zip(v, v[1:])):
        raise ValueError("tophat_radii must be strictly increasing and >= 1")


def _three_counts(v):
    if len(v) != 3 or any(k < 1 for k in v):
        raise ValueError("superpixel_ks needs exactly 3 positive counts")


def _ladder(v):
    if not v or v[-1] != 0.0:
        raise ValueError("boundary_thresholds must end with 0")


def _sigmas(v):
    if any(s <= 0 for s in v) or any(b <= a for a, b in zip(v, v[1:])):
        raise ValueError("frangi_sigmas must be positive and increasing")


@dataclass(frozen=True)
class PipelineConfig:
    tophat_radii: tuple = (3, 5, 7, 9, 11, 13, 15, 17, 19)
    guided_r: int = 8
    guided_eps: float = 0.2
    ridge_t_low: float = 0.2
    ridge_t_medium: float = 0.25
    ridge_t_high: float = 0.4
    ridge_sigma: float = 2.0
    superpixel_ks: tuple = (2000, 3000, 4000)
    superpixel_t: float = 0.5
    slic_m: float = 0.1
    slic_max_iter: int = 10
    slic_conv_tol: float = 0.25
    refine_d: int = 25
    refine_t_d: float = 0.2
    boundary_thresholds: tuple = (0.2, 0.1, 0.05, 0.02, 0.0)
    profile_smooth_width: int = 3
    rescue_on_intensity: bool = False
    frangi_sigmas: tuple = (1.0, 2.0, 3.0, 4.0, 6.0, 8.0)
    frangi_beta: float = 0.5
    frangi_c: float = 0.08
    ddfb_bands: int = 8
    homomorphic_cutoff: float = 8.0
    homomorphic_gain_low: float = 0.05
    homomorphic_gain_high: float = 1.5
    catheter_enabled: bool = True
    hough_top_n: int = 10
    hough_gap: float = 3.0
    hough_min_len: int = 20
    track_da: float = 5e-4
    track_db: float = 0.1
    track_dc: float = 10.0
    track_min_support: int = 30
    catheter_mask_width: int = 3

    def validate(self):
        """Cross-field consistency (single-field ranges are checked at
        parse time so errors carry line numbers)."""
        if not self.ridge_t_low <= self.ridge_t_medium <= self.ridge_t_high:
            raise ValueError("ridge thresholds must be ordered low <= medium <= high")
        return self


# per-key (parser, range-check); range checks run at parse time
_FIELDS = {
    "tophat_radii": (_parse_int_list, _increasing_radii),
    "guided_r": (int, _at_least("guided_r", 1)),
    "guided_eps": (float, _positive("guided_eps")),
    "ridge_t_low": (float, _unit_interval("ridge_t_low")),
    "ridge_t_medium": (float, _unit_interval("ridge_t_medium")),
    "ridge_t_high": (float, _unit_interval("ridge_t_high")),
    "ridge_sigma": (float, _positive("ridge_sigma")),
    "superpixel_ks": (_parse_int_list, _three_counts),
    "superpixel_t": (float, _unit_interval("superpixel_t")),
    "slic_m": (float, _positive("slic_m")),
    "slic_max_iter": (int, _at_least("slic_max_iter", 1)),
    "slic_conv_tol": (float, _positive("slic_conv_tol")),
    "refine_d": (int, _at_least("refine_d", 3)),
    "refine_t_d": (float, _unit_interval("refine_t_d")),
    "boundary_thresholds": (_parse_float_list, _ladder),
    "profile_smooth_width": (int, _at_least("profile_smooth_width", 1)),
    "rescue_on_intensity": (_parse_bool, None),
    "frangi_sigmas": (_parse_float_list, _sigmas),
    "frangi_beta": (float, _positive("frangi_beta")),
    "frangi_c": (float, _positive("frangi_c")),
    "ddfb_bands": (int, _at_least("ddfb_bands", 1)),
    "homomorphic_cutoff": (float, _positive("homomorphic_cutoff")),
    "homomorphic_gain_low": (float, None),
    "homomorphic_gain_high": (float, None),
    "catheter_enabled": (_parse_bool, None),
    "hough_top_n": (int, _at_least("hough_top_n", 1)),
    "hough_gap": (float, _positive("hough_gap")),
    "hough_min_len": (int, _at_least("hough_min_len", 1)),
    "track_da": (float, _positive("track_da")),
    "track_db": (float, _positive("track_db")),
    "track_dc": (float, _positive("track_dc")),
    "track_min_support": (int, _at_least("track_min_support", 1)),
    "catheter_mask_width": (int, _at_least("catheter_mask_width", 1)),
}


def parse_config(text):
    """Parse key=value lines into a PipelineConfig.

    Raises ConfigError (with line number) for unknown keys, malformed
    values, and out-of-range values.
    """
    values = {}
    last_line = 0
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(line_no, f"expected key=value, got {raw.strip()!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _FIELDS:
            raise ConfigError(line_no, f"unknown key {key!r}")
        parser, check = _FIELDS[key]
        try:
            parsed = parser(value.strip())
            if check is not None:
                check(parsed)
        except ValueError as exc:
            raise ConfigError(line_no, str(exc)) from exc
        values[key] = parsed
        last_line = line_no
    cfg = PipelineConfig(**values)
    try:
        cfg.validate()
    except ValueError as exc:
        raise ConfigError(last_line, str(exc)) from exc
    return cfg


def serialize_config(cfg):
    """Emit the configuration as parseable key=value text."""
    lines = [f"{f.name} = {_fmt(getattr(cfg, f.name))}" for f in fields(cfg)]
    return "\n".join(lines) + "\n"


def load_config(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())
