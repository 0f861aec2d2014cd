"""Per-frame orchestration: preprocessing, catheter tracking, segmentation,
and catheter subtraction.

The flow per frame: top-hat contrast enhancement; a directional vesselness
map of the raw frame guiding the edge-preserving smoothing; ridge maps from
the smoothed image; a second directional vesselness map of the enhanced
image for the superpixel stage; then segmentation.  On sequences the
catheter is detected in frame 1 and tracked across the medium-threshold
ridge maps, and the tracked catheter mask is subtracted from the artery
and centerline masks.
"""

from dataclasses import dataclass

from . import catheter as cath
from . import enhance, ridgedet, segment, vesselness
from .config import PipelineConfig
from .imgcore import as_image


@dataclass(frozen=True)
class PreprocessedFrame:
    i_ce: object
    i_v_raw: object
    smoothed: object
    ridges: object
    i_v: object


@dataclass(frozen=True)
class FrameOutputs:
    index: int
    artery_mask: object
    centerline_mask: object
    catheter_mask: object  # None when the catheter path is off or failed
    segmentation: object
    preprocessed: object
    tracking_lost: bool = False


@dataclass(frozen=True)
class SequenceResult:
    frames: list
    catheter_states: list  # empty when the catheter path did not run
    warnings: list


def preprocess_frame(img, cfg=PipelineConfig()):
    img = as_image(img)
    bank = vesselness.DirectionalBank(cfg.ddfb_bands)
    fp = vesselness.FrangiParams(cfg.frangi_sigmas, cfg.frangi_beta, cfg.frangi_c)
    homo = dict(cutoff=cfg.homomorphic_cutoff, gain_low=cfg.homomorphic_gain_low,
                gain_high=cfg.homomorphic_gain_high)
    i_ce = enhance.multiscale_tophat(img, cfg.tophat_radii)
    i_v_raw = vesselness.directional_vesselness(img, bank, fp, **homo)
    smoothed = enhance.smooth_for_ridges(
        i_ce, i_v_raw, enhance.GuidedParams(cfg.guided_r, cfg.guided_eps))
    ridges = ridgedet.ridge_maps(
        smoothed, (cfg.ridge_t_low, cfg.ridge_t_medium, cfg.ridge_t_high),
        cfg.ridge_sigma)
    i_v = vesselness.directional_vesselness(i_ce, bank, fp, **homo)
    return PreprocessedFrame(i_ce, i_v_raw, smoothed, ridges, i_v)


def _segment_one(pre, cfg):
    return segment.segment_frame(
        pre.i_ce, pre.i_v, pre.ridges,
        ks=cfg.superpixel_ks, t=cfg.superpixel_t,
        refine_params=segment.RefineParams(
            d=cfg.refine_d, t_d=cfg.refine_t_d,
            boundary_thresholds=cfg.boundary_thresholds,
            profile_smooth_width=cfg.profile_smooth_width,
            rescue_on_intensity=cfg.rescue_on_intensity),
        slic_m=cfg.slic_m, slic_max_iter=cfg.slic_max_iter,
        slic_conv_tol=cfg.slic_conv_tol)


def process_frames(images, cfg=PipelineConfig(), catheter_enabled=None):
    """Run the pipeline over a frame sequence (or a single frame).

    The catheter path runs only on multi-frame sequences whose first frame
    is pre-injection; detection failure or lost tracking degrades to plain
    segmentation with a warning rather than an error.
    """
    images = [as_image(im) for im in images]
    if not images:
        raise ValueError("no frames to process")
    shape = images[0].shape
    if any(im.shape != shape for im in images):
        raise ValueError("all frames must share dimensions")
    if catheter_enabled is None:
        catheter_enabled = cfg.catheter_enabled

    pre = [preprocess_frame(im, cfg) for im in images]

    warnings = []
    states = []
    if catheter_enabled and len(images) > 1:
        try:
            states = cath.track_sequence(
                [p.ridges.medium for p in pre],
                top_n=cfg.hough_top_n, gap=cfg.hough_gap,
                min_len=cfg.hough_min_len,
                search_window=(cfg.track_da, cfg.track_db, cfg.track_dc),
                min_support=cfg.track_min_support)
            for s in states:
                if s.lost:
                    warnings.append(f"frame {s.frame_index + 1}: catheter tracking lost,"
                                    " keeping previous curve")
        except cath.DetectionFailed as exc:
            warnings.append(f"catheter detection failed on frame 1: {exc};"
                            " continuing without catheter subtraction")
            states = []
    elif catheter_enabled and len(images) == 1:
        warnings.append("single frame: catheter tracking skipped")

    frames = []
    for i, p in enumerate(pre):
        seg = _segment_one(p, cfg)
        cmask = None
        lost = False
        if states:
            state = states[i]
            lost = state.lost
            cmask = cath.catheter_mask(state.poly, cfg.catheter_mask_width, shape)
        artery = seg.artery_mask if cmask is None else seg.artery_mask & ~cmask
        centerline = seg.centerline_mask if cmask is None else seg.centerline_mask & ~cmask
        frames.append(FrameOutputs(index=i, artery_mask=artery,
                                   centerline_mask=centerline, catheter_mask=cmask,
                                   segmentation=seg, preprocessed=p,
                                   tracking_lost=lost))
    return SequenceResult(frames=frames, catheter_states=states, warnings=warnings)
