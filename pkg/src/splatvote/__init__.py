"""splatvote: influence-voting segmentation, affordance transfer, and
pruning for 3D Gaussian splat scenes on a deterministic software
rasterizer."""

from .affordance import (
    DEFAULT_KNN_K,
    ExemplarSet,
    FeatureMap,
    affordance_segment,
    affordance_votes,
    load_exemplars,
    load_feature_map,
    save_exemplars,
    save_feature_map,
    transfer_2d,
    transfer_patch_labels,
)
from .errors import DataError, DimensionError, FormatError, SplatVoteError, UsageError
from .evaluation import (
    EvalReport,
    evaluate_segmentation,
    iou,
    mask_from_render,
    miou,
    recall,
    recolor,
    split_frames,
    threshold_render,
)
from .pruning import PruneReport, prune, prune_votes, verify
from .scene import Camera, GaussianScene, LabelMap2D, Mask2D
from .scene_io import (
    load_cameras,
    load_gaussian_labels,
    load_gaussian_mask,
    load_label_map,
    load_mask,
    load_ply,
    save_cameras,
    save_gaussian_labels,
    save_gaussian_mask,
    save_image_png,
    save_label_map,
    save_mask,
    save_ply,
)
from .segmentation import (
    delete,
    extract,
    segment,
    segment_baseline1,
    segment_baseline2,
    segment_votes,
)
from .sh import SH_C0, dc_to_rgb, eval_sh, rgb_to_dc
from .splatting import (
    DEFAULT_CONFIG,
    RasterConfig,
    RenderedImage,
    Splats2D,
    accumulate_influence,
    accumulate_label_influence,
    images_equal,
    project,
    render,
)

__version__ = "0.1.0"
