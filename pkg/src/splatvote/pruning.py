"""Remove Gaussians that never contribute to any supplied viewpoint and
verify the renders are unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import UsageError
from .scene import Camera, GaussianScene, Mask2D
from .splatting import DEFAULT_CONFIG, RasterConfig, accumulate_influence, images_equal, render


@dataclass(frozen=True)
class PruneReport:
    original_count: int
    pruned_count: int          # Gaussians remaining after pruning
    removed_fraction: float    # percent removed
    max_abs_pixel_error: float
    per_camera_errors: list[float] = field(default_factory=list)


def prune_votes(scene: GaussianScene, cameras: list[Camera],
                config: RasterConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Total whole-image influence per Gaussian over all cameras."""
    if not cameras:
        raise UsageError("pruning requires at least one camera")
    votes = np.zeros(scene.count)
    for camera in cameras:
        full = Mask2D(bits=np.ones((camera.height, camera.width), dtype=bool))
        votes += accumulate_influence(scene, camera, full, config)
    return votes


def prune(scene: GaussianScene, cameras: list[Camera],
          config: RasterConfig = DEFAULT_CONFIG) -> tuple[GaussianScene, PruneReport]:
    """Keep strictly-positive-vote Gaussians and verify every camera's
    render is unchanged.

    Skipped splats contribute an exact float zero, so no epsilon is needed
    and the expected verification error is exactly 0 for the pruning
    cameras (novel viewpoints carry no such guarantee).
    """
    votes = prune_votes(scene, cameras, config)
    keep = votes > 0
    pruned = scene.select(keep)
    errors = verify_per_camera(scene, pruned, cameras, config)
    report = PruneReport(
        original_count=scene.count,
        pruned_count=pruned.count,
        removed_fraction=100.0 * (1.0 - pruned.count / scene.count) if scene.count else 0.0,
        max_abs_pixel_error=max(errors) if errors else 0.0,
        per_camera_errors=errors,
    )
    return pruned, report


def verify_per_camera(original: GaussianScene, pruned: GaussianScene,
                      cameras: list[Camera],
                      config: RasterConfig = DEFAULT_CONFIG) -> list[float]:
    return [images_equal(render(original, camera, config), render(pruned, camera, config))
            for camera in cameras]


def verify(original: GaussianScene, pruned: GaussianScene, cameras: list[Camera],
           config: RasterConfig = DEFAULT_CONFIG) -> float:
    """Maximum absolute pixel error between float renders over all cameras."""
    errors = verify_per_camera(original, pruned, cameras, config)
    return max(errors) if errors else 0.0
