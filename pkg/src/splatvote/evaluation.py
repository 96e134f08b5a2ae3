"""Metric protocol: render-and-threshold mask prediction, IoU/recall,
and the segmentation/evaluation frame split.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, UsageError
from .scene import Camera, GaussianScene, Mask2D
from .sh import num_coeffs, rgb_to_dc
from .splatting import DEFAULT_CONFIG, RasterConfig, render

GRAYSCALE_WEIGHTS = {
    "mean": np.array([1.0, 1.0, 1.0]) / 3.0,
    "luminance": np.array([0.299, 0.587, 0.114]),
}


@dataclass(frozen=True)
class EvalReport:
    per_frame_iou: list[float]
    miou: float
    recall: float | None
    frames_used: list[int] = field(default_factory=list)


def recolor(scene: GaussianScene, mask3d: np.ndarray,
            fg_rgb=(1.0, 1.0, 1.0), bg_rgb=(0.0, 0.0, 0.0)) -> GaussianScene:
    """Repaint mask-true Gaussians fg and the rest bg, zeroing all
    view-dependent bands. Opacity is untouched, so occlusion relationships
    match the original scene exactly."""
    mask3d = np.asarray(mask3d, dtype=bool)
    if mask3d.shape != (scene.count,):
        raise DimensionError(
            f"Gaussian mask length {mask3d.shape} does not match scene count {scene.count}")
    coeffs = np.zeros((scene.count, num_coeffs(scene.sh_degree), 3))
    coeffs[:, 0, :] = np.where(mask3d[:, None], rgb_to_dc(fg_rgb), rgb_to_dc(bg_rgb))
    return scene.replace_sh(coeffs)


def threshold_render(rgb: np.ndarray, threshold: float = 0.5,
                     grayscale: str = "mean") -> Mask2D:
    weights = GRAYSCALE_WEIGHTS.get(grayscale)
    if weights is None:
        raise UsageError(f"unknown grayscale mode '{grayscale}' "
                         f"(choose from {sorted(GRAYSCALE_WEIGHTS)})")
    gray = rgb @ weights
    return Mask2D(bits=gray >= threshold)


def mask_from_render(scene: GaussianScene, mask3d: np.ndarray, camera: Camera,
                     threshold: float = 0.5, grayscale: str = "mean",
                     config: RasterConfig = DEFAULT_CONFIG) -> Mask2D:
    """Predicted 2D mask: render the white-on-black recolored scene and
    threshold its grayscale. Rendering in-scene (not from an extracted
    object) keeps ground-truth occlusions intact."""
    recolored = recolor(scene, mask3d)
    image = render(recolored, camera, config)
    return threshold_render(image.rgb, threshold=threshold, grayscale=grayscale)


def _check_pair(pred: Mask2D, gt: Mask2D):
    if pred.bits.shape != gt.bits.shape:
        raise DimensionError(f"mask shapes differ: {pred.bits.shape} vs {gt.bits.shape}")


def miou(pred: Mask2D, gt: Mask2D) -> float:
    """Intersection over union of one mask pair (1.0 when both are empty).
    The report's mIoU is this averaged over evaluation frames."""
    _check_pair(pred, gt)
    union = int((pred.bits | gt.bits).sum())
    if union == 0:
        return 1.0
    return int((pred.bits & gt.bits).sum()) / union


iou = miou


def recall(pred: Mask2D, gt: Mask2D) -> float:
    """True-positive pixels over ground-truth pixels (1.0 when gt empty)."""
    _check_pair(pred, gt)
    total = int(gt.bits.sum())
    if total == 0:
        return 1.0
    return int((pred.bits & gt.bits).sum()) / total


def split_frames(n_frames: int, fraction: float, seed: int = 0) -> tuple[list[int], list[int]]:
    """Even-stride split: ceil(fraction * n) segmentation frames, the rest
    for evaluation. Disjoint, union complete. The seed is accepted for a
    jittered variant but stride sampling is deterministic and ignores it."""
    if n_frames <= 0:
        raise UsageError("cannot split zero frames")
    if not 0.0 < fraction < 1.0:
        raise UsageError(f"fraction must be in (0, 1), got {fraction}")
    k = math.ceil(fraction * n_frames)
    picked = sorted({(i * n_frames) // k for i in range(k)})
    eval_set = [i for i in range(n_frames) if i not in set(picked)]
    return picked, eval_set


def evaluate_segmentation(scene: GaussianScene, mask3d: np.ndarray,
                          frames: list[tuple[Camera, Mask2D]],
                          frame_indices: list[int] | None = None,
                          threshold: float = 0.5, grayscale: str = "mean",
                          with_recall: bool = True,
                          config: RasterConfig = DEFAULT_CONFIG) -> EvalReport:
    """Compare thresholded renders of the recolored full scene against
    ground-truth masks on the given evaluation frames."""
    if not frames:
        raise UsageError("evaluation requires at least one frame")
    recolored = recolor(scene, mask3d)
    ious, recalls = [], []
    for camera, gt in frames:
        if gt.height != camera.height or gt.width != camera.width:
            raise DimensionError(
                f"ground-truth mask {gt.width}x{gt.height} does not match "
                f"camera {camera.width}x{camera.height}")
        image = render(recolored, camera, config)
        pred = threshold_render(image.rgb, threshold=threshold, grayscale=grayscale)
        ious.append(miou(pred, gt))
        recalls.append(recall(pred, gt))
    return EvalReport(
        per_frame_iou=ious,
        miou=float(np.mean(ious)),
        recall=float(np.mean(recalls)) if with_recall else None,
        frames_used=list(frame_indices) if frame_indices is not None else list(range(len(frames))),
    )
