"""Software splat rasterizer: perspective projection, depth-sorted
front-to-back alpha blending, and per-Gaussian influence accumulation.

A pixel's color is the usual transmittance-weighted sum over splats
sorted by view depth; blending a splat contributes alpha * T at each
covered pixel, and exactly that product is what influence accumulation
records. Both paths share one traversal, so a Gaussian has nonzero
influence if and only if it was blended somewhere.

The blending order is total (depth, then Gaussian index) and tile results
are merged in a fixed order, so outputs are bit-identical for any worker
count and any tile size.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .scene import Camera, GaussianScene, LabelMap2D, Mask2D, quaternions_to_rotations
from .sh import eval_sh


@dataclass(frozen=True)
class RasterConfig:
    """Rasterizer constants; defaults follow common splatting practice."""

    near_plane: float = 0.01
    lowpass: float = 0.3          # px^2 added to the 2D covariance diagonal
    alpha_clamp: float = 0.99     # per-pixel opacity ceiling
    alpha_skip: float = 1.0 / 255.0
    transmittance_min: float = 1e-4  # pixel terminates once T drops below
    radius_sigma: float = 3.0     # splat extent bound in standard deviations
    tile_size: int = 16
    workers: int = 1


DEFAULT_CONFIG = RasterConfig()


@dataclass(frozen=True)
class Splats2D:
    """Projected, culled, unsorted screen-space splats (struct-of-arrays).

    conic rows are (a, b, c) of the inverse 2D covariance [[a, b], [b, c]];
    radius is the 3-sigma pixel extent bound.
    """

    gaussian_index: np.ndarray
    mean2d: np.ndarray
    conic: np.ndarray
    depth: np.ndarray
    rgb: np.ndarray
    base_opacity: np.ndarray
    radius: np.ndarray
    culled_count: int = 0

    @property
    def count(self) -> int:
        return len(self.gaussian_index)


@dataclass(frozen=True)
class RenderedImage:
    """Float RGB in [0, 1] plus the per-pixel final transmittance."""

    rgb: np.ndarray
    final_transmittance: np.ndarray

    @property
    def height(self) -> int:
        return self.rgb.shape[0]

    @property
    def width(self) -> int:
        return self.rgb.shape[1]


def project(scene: GaussianScene, camera: Camera,
            config: RasterConfig = DEFAULT_CONFIG) -> Splats2D:
    """Project Gaussians to screen space.

    View-space covariance follows the EWA construction: cov3d = R S S^T R^T
    rotated into camera axes and mapped through the local perspective
    Jacobian, then low-pass filtered. Gaussians behind the near plane or
    whose 3-sigma box misses the image are culled.
    """
    n = scene.count
    if n == 0:
        return _empty_splats(0)

    view = camera.to_view(scene.means)
    x, y, z = view[:, 0], view[:, 1], view[:, 2]
    front = z > config.near_plane
    if not front.any():
        return _empty_splats(n)

    idx = np.nonzero(front)[0]
    x, y, z = x[idx], y[idx], z[idx]

    rot = quaternions_to_rotations(scene.rotations[idx])
    m = rot * scene.scales[idx][:, None, :]
    cov3d = m @ m.transpose(0, 2, 1)

    inv_z = 1.0 / z
    jw = np.empty((len(idx), 2, 3))
    j_rows = np.zeros((len(idx), 2, 3))
    j_rows[:, 0, 0] = camera.fx * inv_z
    j_rows[:, 0, 2] = -camera.fx * x * inv_z * inv_z
    j_rows[:, 1, 1] = camera.fy * inv_z
    j_rows[:, 1, 2] = -camera.fy * y * inv_z * inv_z
    jw = j_rows @ camera.rotation
    cov2d = jw @ cov3d @ jw.transpose(0, 2, 1)

    a = cov2d[:, 0, 0] + config.lowpass
    b = cov2d[:, 0, 1]
    c = cov2d[:, 1, 1] + config.lowpass
    det = a * c - b * b
    conic = np.stack([c / det, -b / det, a / det], axis=1)

    mid = 0.5 * (a + c)
    lam_max = mid + np.sqrt(np.maximum(mid * mid - det, 0.0))
    radius = np.ceil(config.radius_sigma * np.sqrt(lam_max))

    mean2d = np.stack([camera.fx * x * inv_z + camera.cx,
                       camera.fy * y * inv_z + camera.cy], axis=1)

    x0, x1, y0, y1 = _pixel_bounds(mean2d, radius, camera.width, camera.height)
    visible = (x0 < x1) & (y0 < y1)
    keep = idx[visible]

    dirs = scene.means[keep] - camera.center[None, :]
    dirs = dirs / np.linalg.norm(dirs, axis=1, keepdims=True)
    rgb = eval_sh(scene.sh_coeffs[keep], dirs)

    return Splats2D(
        gaussian_index=keep,
        mean2d=mean2d[visible],
        conic=conic[visible],
        depth=z[visible],
        rgb=rgb,
        base_opacity=scene.opacities[keep],
        radius=radius[visible],
        culled_count=n - len(keep),
    )


def _empty_splats(culled: int) -> Splats2D:
    return Splats2D(
        gaussian_index=np.zeros(0, dtype=np.int64),
        mean2d=np.zeros((0, 2)), conic=np.zeros((0, 3)), depth=np.zeros(0),
        rgb=np.zeros((0, 3)), base_opacity=np.zeros(0), radius=np.zeros(0),
        culled_count=culled,
    )


def _pixel_bounds(mean2d, radius, width, height):
    """Integer pixel index ranges [x0, x1) x [y0, y1) whose centers fall
    inside the splat's radius box. Tile-size independent by construction."""
    x0 = np.ceil(mean2d[:, 0] - radius - 0.5).astype(np.int64)
    x1 = np.floor(mean2d[:, 0] + radius - 0.5).astype(np.int64) + 1
    y0 = np.ceil(mean2d[:, 1] - radius - 0.5).astype(np.int64)
    y1 = np.floor(mean2d[:, 1] + radius - 0.5).astype(np.int64) + 1
    return (np.clip(x0, 0, width), np.clip(x1, 0, width),
            np.clip(y0, 0, height), np.clip(y1, 0, height))


def _blend_tile(rect, ids, mean2d, conic, rgb, opac, bounds, labels, num_labels, config):
    """Blend one tile front to back; returns its image/transmittance
    patches and, when labels are given, per-splat per-label weight sums."""
    px0, px1, py0, py1 = rect
    x0, x1, y0, y1 = bounds
    h, w = py1 - py0, px1 - px0
    xs = np.arange(px0, px1, dtype=np.float64) + 0.5
    ys = np.arange(py0, py1, dtype=np.float64) + 0.5
    t_buf = np.ones((h, w))
    rgb_buf = np.zeros((h, w, 3))
    contrib = np.zeros((len(ids), num_labels)) if labels is not None else None
    tmin = config.transmittance_min

    for j, s in enumerate(ids):
        ax0 = max(px0, x0[s])
        ax1 = min(px1, x1[s])
        ay0 = max(py0, y0[s])
        ay1 = min(py1, y1[s])
        if ax0 >= ax1 or ay0 >= ay1:
            continue
        lx = slice(ax0 - px0, ax1 - px0)
        ly = slice(ay0 - py0, ay1 - py0)
        dx = xs[lx] - mean2d[s, 0]
        dy = ys[ly] - mean2d[s, 1]
        a, b, c = conic[s]
        power = (-0.5 * a) * dx[None, :] ** 2 + (-0.5 * c) * dy[:, None] ** 2 \
            - b * dy[:, None] * dx[None, :]
        alpha = np.minimum(opac[s] * np.exp(power), config.alpha_clamp)
        t_sub = t_buf[ly, lx]
        blend = (power <= 0.0) & (alpha >= config.alpha_skip) & (t_sub >= tmin)
        if not blend.any():
            continue
        weight = np.where(blend, alpha * t_sub, 0.0)
        rgb_buf[ly, lx] += weight[:, :, None] * rgb[s]
        if contrib is not None:
            sel = labels[ay0:ay1, ax0:ax1][blend]
            contrib[j] = np.bincount(sel, weights=weight[blend], minlength=num_labels)
        t_buf[ly, lx] = np.where(blend, t_sub * (1.0 - alpha), t_sub)
        if not (t_buf >= tmin).any():
            break
    return rgb_buf, t_buf, contrib


def _rasterize(scene, camera, config, labels=None, num_labels=0):
    height, width = camera.height, camera.width
    image = np.zeros((height, width, 3))
    transmittance = np.ones((height, width))
    influence = np.zeros((num_labels, scene.count)) if labels is not None else None

    splats = project(scene, camera, config)
    if splats.count == 0:
        return image, transmittance, influence

    order = np.lexsort((splats.gaussian_index, splats.depth))
    gidx = splats.gaussian_index[order]
    mean2d = splats.mean2d[order]
    conic = splats.conic[order]
    rgb = splats.rgb[order]
    opac = splats.base_opacity[order]
    radius = splats.radius[order]
    bounds = _pixel_bounds(mean2d, radius, width, height)
    x0, x1, y0, y1 = bounds

    ts = config.tile_size
    ntx = (width + ts - 1) // ts
    nty = (height + ts - 1) // ts
    tile_ids: list[list[int]] = [[] for _ in range(ntx * nty)]
    tx0, tx1 = x0 // ts, (x1 - 1) // ts
    ty0, ty1 = y0 // ts, (y1 - 1) // ts
    for s in range(len(order)):
        for ty in range(ty0[s], ty1[s] + 1):
            row = ty * ntx
            for tx in range(tx0[s], tx1[s] + 1):
                tile_ids[row + tx].append(s)

    def run_tile(t):
        ids = tile_ids[t]
        ty, tx = divmod(t, ntx)
        rect = (tx * ts, min((tx + 1) * ts, width), ty * ts, min((ty + 1) * ts, height))
        if not ids:
            return rect, None, None, None
        rgb_buf, t_buf, contrib = _blend_tile(
            rect, ids, mean2d, conic, rgb, opac, bounds, labels, num_labels, config)
        return rect, rgb_buf, t_buf, contrib

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(run_tile, range(len(tile_ids))))
    else:
        results = [run_tile(t) for t in range(len(tile_ids))]

    for t, (rect, rgb_buf, t_buf, contrib) in enumerate(results):
        if rgb_buf is None:
            continue
        px0, px1, py0, py1 = rect
        image[py0:py1, px0:px1] = rgb_buf
        transmittance[py0:py1, px0:px1] = t_buf
        if influence is not None:
            influence[:, gidx[tile_ids[t]]] += contrib.T
    return image, transmittance, influence


def render(scene: GaussianScene, camera: Camera,
           config: RasterConfig = DEFAULT_CONFIG) -> RenderedImage:
    """Render the scene over a black background."""
    image, transmittance, _ = _rasterize(scene, camera, config)
    return RenderedImage(rgb=image, final_transmittance=transmittance)


def accumulate_influence(scene: GaussianScene, camera: Camera, mask: Mask2D,
                         config: RasterConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Per-Gaussian sum of alpha * T over mask-true pixels.

    Runs the identical traversal as render (same culling, sorting, skips,
    termination), so the result reflects exactly what blending used.
    """
    _check_dims(mask.height, mask.width, camera)
    labels = mask.bits.astype(np.uint8)
    _, _, influence = _rasterize(scene, camera, config, labels=labels, num_labels=2)
    return influence[1]


def accumulate_label_influence(scene: GaussianScene, camera: Camera,
                               label_map: LabelMap2D, num_labels: int,
                               config: RasterConfig = DEFAULT_CONFIG) -> np.ndarray:
    """(num_labels, N) matrix of alpha * T sums, partitioned by the pixel's
    label id; row L equals accumulate_influence with the mask labels == L."""
    _check_dims(label_map.height, label_map.width, camera)
    if label_map.labels.size and int(label_map.labels.max()) >= num_labels:
        raise DimensionError(
            f"label map contains id {int(label_map.labels.max())} >= num_labels {num_labels}")
    _, _, influence = _rasterize(scene, camera, config,
                                 labels=label_map.labels, num_labels=num_labels)
    return influence


def images_equal(a: RenderedImage, b: RenderedImage) -> float:
    """Maximum absolute per-channel pixel difference."""
    if a.rgb.shape != b.rgb.shape:
        raise DimensionError(f"image shapes differ: {a.rgb.shape} vs {b.rgb.shape}")
    if a.rgb.size == 0:
        return 0.0
    return float(np.abs(a.rgb - b.rgb).max())


def _check_dims(height, width, camera):
    if height != camera.height or width != camera.width:
        raise DimensionError(
            f"mask size {width}x{height} does not match camera {camera.width}x{camera.height}")
