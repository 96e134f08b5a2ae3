"""Shared synthetic-scene builders for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from splatvote import Camera, GaussianScene
from splatvote.sh import SH_C1, rgb_to_dc


def random_unit_quaternions(rng, n):
    q = rng.normal(size=(n, 4))
    return q / np.linalg.norm(q, axis=1, keepdims=True)


def make_scene(means, rgb, opacities, scales, rotations=None, sh_degree=0,
               band1=None) -> GaussianScene:
    """Scene from per-Gaussian arrays; colors given as target rgb in (0, 1)."""
    means = np.atleast_2d(np.asarray(means, dtype=np.float64))
    n = len(means)
    k = (sh_degree + 1) ** 2
    coeffs = np.zeros((n, k, 3))
    coeffs[:, 0, :] = rgb_to_dc(np.broadcast_to(np.asarray(rgb, dtype=np.float64), (n, 3)))
    if band1 is not None:
        coeffs[:, 1:4, :] = band1
    if rotations is None:
        rotations = np.tile([1.0, 0.0, 0.0, 0.0], (n, 1))
    return GaussianScene(
        means=means,
        rotations=rotations,
        scales=np.broadcast_to(np.asarray(scales, dtype=np.float64), (n, 3)).copy()
        if np.ndim(scales) <= 1 else np.asarray(scales, dtype=np.float64),
        opacities=np.broadcast_to(np.asarray(opacities, dtype=np.float64), (n,)).copy(),
        sh_coeffs=coeffs,
        sh_degree=sh_degree,
    )


def random_scene(rng, n, sh_degree=0, box=1.0, z_range=(2.0, 6.0),
                 scale_range=(0.02, 0.12), opacity_range=(0.15, 0.9)) -> GaussianScene:
    """Random valid scene in front of an identity camera.

    Colors are kept well inside (0, 1) for every view direction so the
    rendered color is linear in the DC coefficients.
    """
    means = np.column_stack([
        rng.uniform(-box, box, size=n),
        rng.uniform(-box, box, size=n),
        rng.uniform(*z_range, size=n),
    ])
    k = (sh_degree + 1) ** 2
    coeffs = np.zeros((n, k, 3))
    coeffs[:, 0, :] = rgb_to_dc(rng.uniform(0.2, 0.8, size=(n, 3)))
    if sh_degree >= 1:
        # band-1 contribution bounded by 3 * SH_C1 * amp < 0.15
        amp = 0.1 / SH_C1 / 3.0
        coeffs[:, 1:4, :] = rng.uniform(-amp, amp, size=(n, 3, 3))
    return GaussianScene(
        means=means,
        rotations=random_unit_quaternions(rng, n),
        scales=rng.uniform(*scale_range, size=(n, 3)),
        opacities=rng.uniform(*opacity_range, size=n),
        sh_coeffs=coeffs,
        sh_degree=sh_degree,
    )


def look_at_camera(position, target=(0.0, 0.0, 0.0), up=(0.0, 0.0, 1.0),
                   width=96, height=96, fx=None, fy=None) -> Camera:
    """OpenCV-convention camera (+z forward, +y down) looking at target."""
    position = np.asarray(position, dtype=np.float64)
    forward = np.asarray(target, dtype=np.float64) - position
    forward = forward / np.linalg.norm(forward)
    right = np.cross(forward, np.asarray(up, dtype=np.float64))
    nr = np.linalg.norm(right)
    if nr < 1e-9:  # looking straight along up: pick an arbitrary right
        right = np.cross(forward, np.array([1.0, 0.0, 0.0]))
        nr = np.linalg.norm(right)
    right = right / nr
    down = np.cross(forward, right)
    rot = np.stack([right, down, forward])
    w2c = np.eye(4)
    w2c[:3, :3] = rot
    w2c[:3, 3] = -rot @ position
    if fx is None:
        fx = 0.9 * width
    if fy is None:
        fy = fx
    return Camera(fx=fx, fy=fy, cx=width / 2.0, cy=height / 2.0,
                  width=width, height=height, world_to_camera=w2c)


def ring_cameras(n, radius=6.0, z=1.5, target=(0.0, 0.0, 0.0),
                 width=96, height=96, fx=None, arc=2.0 * np.pi, start=0.0):
    """n cameras on a (partial) circle around target, all looking at it."""
    cams = []
    for i in range(n):
        ang = start + arc * i / n
        pos = np.array([radius * np.cos(ang), radius * np.sin(ang), z])
        cams.append(look_at_camera(pos, target=target, width=width, height=height, fx=fx))
    return cams


def gaussian_ball(rng, center, n, cluster_radius, splat_scale, opacity, rgb) -> GaussianScene:
    """Isotropic blob of splats around a center point."""
    offsets = rng.normal(size=(n, 3))
    offsets *= cluster_radius / np.maximum(np.linalg.norm(offsets, axis=1, keepdims=True), 1e-9)
    offsets *= rng.uniform(0.0, 1.0, size=(n, 1)) ** (1.0 / 3.0)
    return make_scene(
        means=np.asarray(center) + offsets,
        rgb=rgb,
        opacities=opacity,
        scales=splat_scale,
        rotations=random_unit_quaternions(rng, n),
    )


def concatenate_scenes(*scenes) -> GaussianScene:
    degree = scenes[0].sh_degree
    assert all(s.sh_degree == degree for s in scenes)
    return GaussianScene(
        means=np.concatenate([s.means for s in scenes]),
        rotations=np.concatenate([s.rotations for s in scenes]),
        scales=np.concatenate([s.scales for s in scenes]),
        opacities=np.concatenate([s.opacities for s in scenes]),
        sh_coeffs=np.concatenate([s.sh_coeffs for s in scenes]),
        sh_degree=degree,
    )


def slab(rng, center, half_y, half_z, layers, per_layer, alpha, rgb, scale, gap=0.05):
    """Thick multi-sheet wall of splats facing +x; dense enough layers
    drive transmittance below the termination threshold behind it."""
    parts = []
    for i in range(layers):
        x = center[0] - i * gap
        pts = np.column_stack([
            np.full(per_layer, x) + rng.normal(0, 0.008, per_layer),
            center[1] + rng.uniform(-half_y, half_y, per_layer),
            center[2] + rng.uniform(-half_z, half_z, per_layer),
        ])
        parts.append(make_scene(pts, rgb, alpha, scale,
                                rotations=random_unit_quaternions(rng, per_layer)))
    return concatenate_scenes(*parts)


def dilate_mask(bits, r=2):
    """Binary dilation by a (2r+1)-square structuring element."""
    out = bits.copy()
    for dy in range(-r, r + 1):
        for dx in range(-r, r + 1):
            if dx == 0 and dy == 0:
                continue
            shifted = np.zeros_like(bits)
            ys = slice(max(dy, 0), bits.shape[0] + min(dy, 0))
            yd = slice(max(-dy, 0), bits.shape[0] + min(-dy, 0))
            xs = slice(max(dx, 0), bits.shape[1] + min(dx, 0))
            xd = slice(max(-dx, 0), bits.shape[1] + min(-dx, 0))
            shifted[yd, xd] = bits[ys, xs]
            out |= shifted
    return out


def build_two_cluster(n_per_cluster=500, n_cameras=20, width=128, seed=7):
    """Two well-separated blobs plus a surrounding camera ring; ground
    truth is cluster A's index set."""
    rng = np.random.default_rng(seed)
    a = gaussian_ball(rng, (-2.0, 0, 0), n_per_cluster, 0.35, 0.04, 0.85, (0.8, 0.3, 0.2))
    b = gaussian_ball(rng, (2.0, 0, 0), n_per_cluster, 0.35, 0.04, 0.85, (0.2, 0.3, 0.8))
    scene = concatenate_scenes(a, b)
    gt = np.zeros(scene.count, dtype=bool)
    gt[:n_per_cluster] = True
    cams = ring_cameras(n_cameras, radius=6.0, z=1.5, width=width, height=width, fx=110.0)
    return scene, gt, cams


def build_ordering_scene():
    """Scene exercising the failure modes that separate the voters:

    - A: plain opaque ball (every method should keep it).
    - P: dense near-opaque plate; D: distractor ball fully hidden behind it
      (rays terminate inside the plate, so D never blends anywhere).
    - S: translucent shell; W: small ball behind it that shines through the
      shell inside the mask from head-on views but is exposed as background
      at grazing angles.

    Ground truth is the constructed A/P/S membership restricted to members
    that actually blend somewhere (deep plate sheets never visible from the
    camera arc cannot be recovered by any influence-based method).
    """
    import splatvote as sv
    from splatvote import Mask2D
    from splatvote.pruning import prune_votes

    rng = np.random.default_rng(42)
    shell = concatenate_scenes(*[
        gaussian_ball(rng, (0.6, 0.0, 0), 60, 0.33, 0.07, 0.6, (0.3, 0.5, 0.9))
        for _ in range(2)])
    ball = gaussian_ball(rng, (0, -1.8, 0), 300, 0.42, 0.06, 0.75, (0.8, 0.3, 0.2))
    plate = slab(rng, (0.1, 1.8, 0.0), 0.7, 0.45, 6, 200, 0.995, (0.4, 0.7, 0.3), 0.09)
    distractor = gaussian_ball(rng, (-0.5, 1.8, 0), 100, 0.15, 0.03, 0.8, (0.9, 0.9, 0.2))
    wall = gaussian_ball(rng, (-0.6, 0.0, 0), 70, 0.14, 0.03, 0.85, (0.6, 0.6, 0.6))

    scene = concatenate_scenes(ball, plate, distractor, shell, wall)
    n = [ball.count, plate.count, distractor.count, shell.count, wall.count]
    edges = np.cumsum([0] + n)
    parts = {name: slice(edges[i], edges[i + 1])
             for i, name in enumerate(["ball", "plate", "distractor", "shell", "wall"])}

    fg = np.zeros(scene.count, dtype=bool)
    fg[parts["ball"]] = True
    fg[parts["plate"]] = True
    fg[parts["shell"]] = True

    cams = ring_cameras(18, radius=6.0, z=0.0, width=128, height=128, fx=115.0,
                        arc=np.deg2rad(70), start=-np.deg2rad(35))
    total_blend = prune_votes(scene, cams)
    gt = fg & (total_blend > 0)
    frames = [(c, Mask2D(bits=dilate_mask(sv.mask_from_render(scene, gt, c).bits.copy(), 2)))
              for c in cams]
    return {"scene": scene, "gt": gt, "frames": frames, "cameras": cams,
            "parts": parts, "total_blend": total_blend}


def build_prune_scene(seed=3):
    """Visible ball + dense wall + a ball fully hidden behind the wall from
    every camera on a one-sided arc."""
    rng = np.random.default_rng(seed)
    visible = gaussian_ball(rng, (0.0, -1.5, 0), 150, 0.4, 0.06, 0.8, (0.7, 0.4, 0.2))
    wall = slab(rng, (0.3, 0.5, 0.0), 0.9, 0.6, 6, 220, 0.995, (0.3, 0.6, 0.4), 0.09)
    hidden = gaussian_ball(rng, (-0.6, 0.5, 0), 60, 0.2, 0.04, 0.8, (0.9, 0.9, 0.1))
    scene = concatenate_scenes(visible, wall, hidden)
    cams = ring_cameras(6, radius=6.0, z=0.0, width=112, height=112, fx=105.0,
                        arc=np.deg2rad(50), start=-np.deg2rad(25))
    hidden_slice = slice(visible.count + wall.count, scene.count)
    return scene, cams, hidden_slice


def build_part_scene(n_per_part=150, seed=11):
    """Two colored parts side by side; per-Gaussian part ids are ground
    truth for label transfer (0 background, 1, 2)."""
    rng = np.random.default_rng(seed)
    part1 = gaussian_ball(rng, (0, -0.8, 0), n_per_part, 0.4, 0.05, 0.8, (0.9, 0.2, 0.2))
    part2 = gaussian_ball(rng, (0, 0.8, 0), n_per_part, 0.4, 0.05, 0.8, (0.2, 0.2, 0.9))
    scene = concatenate_scenes(part1, part2)
    gt_labels = np.concatenate([np.ones(n_per_part, dtype=int),
                                np.full(n_per_part, 2, dtype=int)])
    cams = ring_cameras(20, radius=6.0, z=1.2, width=96, height=96, fx=88.0)
    return scene, gt_labels, cams


def clean_patch_grid(scene, part_masks, camera, patch_px):
    """Reference patch labels: majority part silhouette per patch (0 where
    no part covers the patch)."""
    import splatvote as sv
    sils = [sv.mask_from_render(scene, pm, camera) for pm in part_masks]
    gh = (camera.height + patch_px - 1) // patch_px
    gw = (camera.width + patch_px - 1) // patch_px
    grid = np.zeros((gh, gw), dtype=np.uint8)
    for py in range(gh):
        for px in range(gw):
            region = (slice(py * patch_px, (py + 1) * patch_px),
                      slice(px * patch_px, (px + 1) * patch_px))
            counts = [int(s.bits[region].sum()) for s in sils]
            if max(counts) > 0:
                grid[py, px] = 1 + int(np.argmax(counts))
    return grid


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture(scope="session")
def ordering_scene():
    return build_ordering_scene()


@pytest.fixture(scope="session")
def two_cluster_small():
    return build_two_cluster(n_per_cluster=120, n_cameras=8, width=96, seed=5)
