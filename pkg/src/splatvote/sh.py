"""Real spherical-harmonic color evaluation for splat scenes.

Coefficients are stored band-major: index 0 is the view-independent DC
term, indices 1..3 band 1, 4..8 band 2, 9..15 band 3.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError

SH_C0 = 0.28209479177387814
SH_C1 = 0.4886025119029199
SH_C2 = (
    1.0925484305920792,
    -1.0925484305920792,
    0.31539156525252005,
    -1.0925484305920792,
    0.5462742152960396,
)
SH_C3 = (
    -0.5900435899266435,
    2.890611442640554,
    -0.4570457994644658,
    0.3731763325901154,
    -0.4570457994644658,
    1.445305721320277,
    -0.5900435899266435,
)


def num_coeffs(degree: int) -> int:
    return (degree + 1) ** 2


def eval_sh(coeffs: np.ndarray, dirs: np.ndarray) -> np.ndarray:
    """Evaluate SH color at unit view directions.

    coeffs: (N, K, 3) with K in {1, 4, 9, 16}; dirs: (N, 3) unit vectors.
    Returns (N, 3) rgb = clamp(sum_b Y_b(dir) * coeffs[b] + 0.5, 0, 1).
    """
    coeffs = np.asarray(coeffs, dtype=np.float64)
    dirs = np.asarray(dirs, dtype=np.float64)
    k = coeffs.shape[1]
    if k not in (1, 4, 9, 16):
        raise DimensionError(f"coefficient count {k} is not (degree+1)^2 for degree 0..3")

    out = SH_C0 * coeffs[:, 0, :]
    if k > 1:
        x = dirs[:, 0:1]
        y = dirs[:, 1:2]
        z = dirs[:, 2:3]
        out = out - SH_C1 * y * coeffs[:, 1] + SH_C1 * z * coeffs[:, 2] - SH_C1 * x * coeffs[:, 3]
    if k > 4:
        xx, yy, zz = x * x, y * y, z * z
        xy, yz, xz = x * y, y * z, x * z
        out = (
            out
            + SH_C2[0] * xy * coeffs[:, 4]
            + SH_C2[1] * yz * coeffs[:, 5]
            + SH_C2[2] * (2.0 * zz - xx - yy) * coeffs[:, 6]
            + SH_C2[3] * xz * coeffs[:, 7]
            + SH_C2[4] * (xx - yy) * coeffs[:, 8]
        )
    if k > 9:
        out = (
            out
            + SH_C3[0] * y * (3.0 * xx - yy) * coeffs[:, 9]
            + SH_C3[1] * xy * z * coeffs[:, 10]
            + SH_C3[2] * y * (4.0 * zz - xx - yy) * coeffs[:, 11]
            + SH_C3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy) * coeffs[:, 12]
            + SH_C3[4] * x * (4.0 * zz - xx - yy) * coeffs[:, 13]
            + SH_C3[5] * z * (xx - yy) * coeffs[:, 14]
            + SH_C3[6] * x * (xx - 3.0 * yy) * coeffs[:, 15]
        )
    return np.clip(out + 0.5, 0.0, 1.0)


def rgb_to_dc(rgb) -> np.ndarray:
    """Inverse of the DC-only evaluation: dc such that eval_sh yields rgb."""
    return (np.asarray(rgb, dtype=np.float64) - 0.5) / SH_C0


def dc_to_rgb(dc) -> np.ndarray:
    return np.asarray(dc, dtype=np.float64) * SH_C0 + 0.5
