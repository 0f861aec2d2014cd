"""Coronary X-ray angiogram analysis: contrast enhancement, directional
vesselness, ridge detection, superpixel artery segmentation with
orthogonal-profile refinement, catheter detection/tracking, and centerline
extraction, with a synthetic phantom suite for verification."""

from ._backend import BACKEND
from .config import PipelineConfig, load_config, parse_config, serialize_config
from .pipeline import process_frames

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "PipelineConfig",
    "load_config",
    "parse_config",
    "serialize_config",
    "process_frames",
    "__version__",
]
