"""Core domain types: Gaussian scenes, cameras, and 2D masks/label maps.

All containers are immutable after construction (their numpy arrays are
marked read-only), so they can be shared freely across worker threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, DimensionError

QUAT_NORM_TOL = 1e-6
ROT_ORTHO_TOL = 1e-5


def _frozen(a: np.ndarray, dtype, shape_tail=None) -> np.ndarray:
    out = np.ascontiguousarray(np.asarray(a, dtype=dtype))
    if shape_tail is not None and out.shape[1:] != shape_tail:
        raise DimensionError(f"expected trailing shape {shape_tail}, got {out.shape[1:]}")
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class GaussianScene:
    """A 3D Gaussian splat scene with post-activation parameters.

    means: (N, 3) world positions.
    rotations: (N, 4) unit quaternions, (w, x, y, z).
    scales: (N, 3) strictly positive standard deviations, world units.
    opacities: (N,) in [0, 1].
    sh_coeffs: (N, K, 3) spherical-harmonic RGB coefficients, K = (sh_degree+1)^2.
    """

    means: np.ndarray
    rotations: np.ndarray
    scales: np.ndarray
    opacities: np.ndarray
    sh_coeffs: np.ndarray
    sh_degree: int

    def __post_init__(self):
        n = len(self.means)
        object.__setattr__(self, "means", _frozen(self.means, np.float64, (3,)))
        object.__setattr__(self, "rotations", _frozen(self.rotations, np.float64, (4,)))
        object.__setattr__(self, "scales", _frozen(self.scales, np.float64, (3,)))
        object.__setattr__(self, "opacities", _frozen(np.reshape(self.opacities, (n,)), np.float64))
        object.__setattr__(self, "sh_coeffs", _frozen(self.sh_coeffs, np.float64))
        for name in ("rotations", "scales", "opacities", "sh_coeffs"):
            if len(getattr(self, name)) != n:
                raise DimensionError(f"{name} has {len(getattr(self, name))} rows, expected {n}")
        if not 0 <= self.sh_degree <= 3:
            raise DataError(f"sh_degree must be in 0..3, got {self.sh_degree}")
        k = (self.sh_degree + 1) ** 2
        if self.sh_coeffs.shape[1:] != (k, 3):
            raise DimensionError(
                f"sh_coeffs shape {self.sh_coeffs.shape[1:]} does not match degree "
                f"{self.sh_degree} (expected ({k}, 3))"
            )
        if n == 0:
            return
        for name in ("means", "rotations", "scales", "opacities", "sh_coeffs"):
            arr = getattr(self, name)
            if not np.isfinite(arr).all():
                idx = int(np.argwhere(~np.isfinite(arr).reshape(n, -1).all(axis=1))[0, 0])
                raise DataError(f"non-finite {name} at Gaussian {idx}")
        norms = np.linalg.norm(self.rotations, axis=1)
        if np.abs(norms - 1.0).max() > QUAT_NORM_TOL:
            idx = int(np.argmax(np.abs(norms - 1.0)))
            raise DataError(f"quaternion {idx} not normalized (norm {norms[idx]:.8f})")
        if self.scales.min() <= 0:
            idx = int(np.argwhere((self.scales <= 0).any(axis=1))[0, 0])
            raise DataError(f"non-positive scale at Gaussian {idx}")
        if self.opacities.min() < 0 or self.opacities.max() > 1:
            idx = int(np.argmax((self.opacities < 0) | (self.opacities > 1)))
            raise DataError(f"opacity outside [0, 1] at Gaussian {idx}")

    @property
    def count(self) -> int:
        return len(self.means)

    def replace_sh(self, sh_coeffs: np.ndarray, sh_degree: int | None = None) -> "GaussianScene":
        """New scene with different colors; geometry and opacity untouched."""
        return GaussianScene(
            means=self.means,
            rotations=self.rotations,
            scales=self.scales,
            opacities=self.opacities,
            sh_coeffs=sh_coeffs,
            sh_degree=self.sh_degree if sh_degree is None else sh_degree,
        )

    def select(self, keep: np.ndarray) -> "GaussianScene":
        """Subset scene by boolean mask or index array, preserving order."""
        keep = np.asarray(keep)
        if keep.dtype == bool and len(keep) != self.count:
            raise DimensionError(f"mask length {len(keep)} != scene count {self.count}")
        return GaussianScene(
            means=self.means[keep],
            rotations=self.rotations[keep],
            scales=self.scales[keep],
            opacities=self.opacities[keep],
            sh_coeffs=self.sh_coeffs[keep],
            sh_degree=self.sh_degree,
        )


def quaternions_to_rotations(q: np.ndarray) -> np.ndarray:
    """(N, 4) unit quaternions (w, x, y, z) -> (N, 3, 3) rotation matrices."""
    q = np.asarray(q, dtype=np.float64)
    w, x, y, z = q[:, 0], q[:, 1], q[:, 2], q[:, 3]
    xx, yy, zz = x * x, y * y, z * z
    wx, wy, wz = w * x, w * y, w * z
    xy, xz, yz = x * y, x * z, y * z
    r = np.empty((len(q), 3, 3), dtype=np.float64)
    r[:, 0, 0] = 1 - 2 * (yy + zz)
    r[:, 0, 1] = 2 * (xy - wz)
    r[:, 0, 2] = 2 * (xz + wy)
    r[:, 1, 0] = 2 * (xy + wz)
    r[:, 1, 1] = 1 - 2 * (xx + zz)
    r[:, 1, 2] = 2 * (yz - wx)
    r[:, 2, 0] = 2 * (xz - wy)
    r[:, 2, 1] = 2 * (yz + wx)
    r[:, 2, 2] = 1 - 2 * (xx + yy)
    return r


@dataclass(frozen=True)
class Camera:
    """Pinhole camera: intrinsics in pixels plus a world-to-camera rigid
    transform with OpenCV axes (+z forward, +y down)."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int
    world_to_camera: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "world_to_camera", _frozen(self.world_to_camera, np.float64))
        if self.world_to_camera.shape != (4, 4):
            raise DimensionError(f"world_to_camera must be 4x4, got {self.world_to_camera.shape}")
        if self.fx <= 0 or self.fy <= 0:
            raise DataError(f"focal lengths must be positive, got fx={self.fx}, fy={self.fy}")
        if self.width < 1 or self.height < 1:
            raise DataError(f"image size must be >= 1, got {self.width}x{self.height}")
        r = self.rotation
        if np.abs(r @ r.T - np.eye(3)).max() > ROT_ORTHO_TOL:
            raise DataError("world_to_camera rotation block is not orthonormal")

    @property
    def rotation(self) -> np.ndarray:
        return self.world_to_camera[:3, :3]

    @property
    def translation(self) -> np.ndarray:
        return self.world_to_camera[:3, 3]

    @property
    def center(self) -> np.ndarray:
        """Camera position in world coordinates."""
        return -self.rotation.T @ self.translation

    def to_view(self, points: np.ndarray) -> np.ndarray:
        """(N, 3) world points -> (N, 3) camera-space points."""
        return points @ self.rotation.T + self.translation


@dataclass(frozen=True)
class Mask2D:
    """Boolean pixel mask paired with a camera of the same size."""

    bits: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "bits", _frozen(self.bits, bool))
        if self.bits.ndim != 2:
            raise DimensionError(f"mask must be 2D, got shape {self.bits.shape}")

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    def __invert__(self) -> "Mask2D":
        return Mask2D(bits=~self.bits)


@dataclass(frozen=True)
class LabelMap2D:
    """Per-pixel small-integer label ids; 0 is reserved for background."""

    labels: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "labels", _frozen(self.labels, np.uint8))
        if self.labels.ndim != 2:
            raise DimensionError(f"label map must be 2D, got shape {self.labels.shape}")

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    def mask_for(self, label_id: int) -> Mask2D:
        return Mask2D(bits=self.labels == label_id)
