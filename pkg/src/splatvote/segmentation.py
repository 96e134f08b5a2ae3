"""Lift 2D masks to a per-Gaussian mask by signed influence voting,
plus the two simpler voting baselines and mask application.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, UsageError
from .scene import Camera, GaussianScene, LabelMap2D, Mask2D
from .splatting import DEFAULT_CONFIG, RasterConfig, accumulate_label_influence

BASELINE2_EPS = 1e-6


def _check_frames(scene, frames):
    if not frames:
        raise UsageError("segmentation requires at least one (camera, mask) frame")
    for i, (camera, mask) in enumerate(frames):
        if mask.height != camera.height or mask.width != camera.width:
            raise DimensionError(
                f"frame {i}: mask {mask.width}x{mask.height} does not match "
                f"camera {camera.width}x{camera.height}")


def segment_votes(scene: GaussianScene, frames: list[tuple[Camera, Mask2D]],
                  config: RasterConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Signed per-Gaussian vote: foreground influence minus background
    influence, summed over frames in index order."""
    _check_frames(scene, frames)
    votes = np.zeros(scene.count)
    for camera, mask in frames:
        fg_bg = accumulate_label_influence(
            scene, camera, LabelMap2D(labels=mask.bits.astype(np.uint8)), 2, config)
        votes += fg_bg[1] - fg_bg[0]
    return votes


def segment(scene: GaussianScene, frames: list[tuple[Camera, Mask2D]],
            config: RasterConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Per-Gaussian boolean mask: strictly positive signed vote.

    Gaussians never rendered accumulate zero and fall to background.
    """
    return segment_votes(scene, frames, config) > 0


def segment_baseline1(scene: GaussianScene, frames: list[tuple[Camera, Mask2D]],
                      config: RasterConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Center-projection voting: +1 when the projected Gaussian center
    pixel is inside the mask, -1 when on-image but outside. Ignores
    occlusion entirely, so hidden Gaussians still collect votes."""
    _check_frames(scene, frames)
    votes = np.zeros(scene.count)
    for camera, mask in frames:
        view = camera.to_view(scene.means)
        in_front = view[:, 2] > config.near_plane
        z = np.where(in_front, view[:, 2], 1.0)
        px = np.floor(camera.fx * view[:, 0] / z + camera.cx).astype(np.int64)
        py = np.floor(camera.fy * view[:, 1] / z + camera.cy).astype(np.int64)
        on_image = in_front & (px >= 0) & (px < camera.width) & (py >= 0) & (py < camera.height)
        inside = np.zeros(scene.count, dtype=bool)
        inside[on_image] = mask.bits[py[on_image], px[on_image]]
        votes += np.where(inside, 1.0, 0.0) - np.where(on_image & ~inside, 1.0, 0.0)
    return votes > 0


def segment_baseline2(scene: GaussianScene, frames: list[tuple[Camera, Mask2D]],
                      config: RasterConfig = DEFAULT_CONFIG,
                      eps: float = BASELINE2_EPS) -> np.ndarray:
    """Constant-magnitude voting: per frame, +1 if foreground influence
    exceeds eps and -1 if background influence does (both can fire)."""
    _check_frames(scene, frames)
    votes = np.zeros(scene.count)
    for camera, mask in frames:
        fg_bg = accumulate_label_influence(
            scene, camera, LabelMap2D(labels=mask.bits.astype(np.uint8)), 2, config)
        votes += np.where(fg_bg[1] > eps, 1.0, 0.0) - np.where(fg_bg[0] > eps, 1.0, 0.0)
    return votes > 0


def extract(scene: GaussianScene, mask3d: np.ndarray) -> GaussianScene:
    """Keep only mask-true Gaussians, all attributes carried over."""
    mask3d = _check_mask(scene, mask3d)
    return scene.select(mask3d)


def delete(scene: GaussianScene, mask3d: np.ndarray) -> GaussianScene:
    """Remove mask-true Gaussians; the complement of extract."""
    mask3d = _check_mask(scene, mask3d)
    return scene.select(~mask3d)


def _check_mask(scene, mask3d):
    mask3d = np.asarray(mask3d, dtype=bool)
    if mask3d.shape != (scene.count,):
        raise DimensionError(
            f"Gaussian mask length {mask3d.shape} does not match scene count {scene.count}")
    return mask3d
