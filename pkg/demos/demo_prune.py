"""Prune Gaussians that never influence any of the given viewpoints.

A ball hides behind a dense wall for every camera on a one-sided arc:
whole-image influence votes are exactly zero for the hidden Gaussians, so
pruning drops them while every render stays bit-identical (max abs pixel
error 0).
"""

from pathlib import Path

import numpy as np

import splatvote as sv
from splatvote.pruning import prune
from splatvote.sh import rgb_to_dc

out = Path("demo_output")
out.mkdir(exist_ok=True)
rng = np.random.default_rng(2)


def scene_part(means, rgb, opacity, scale):
    n = len(means)
    coeffs = np.zeros((n, 1, 3))
    coeffs[:, 0, :] = rgb_to_dc(rgb)
    quats = rng.normal(size=(n, 4))
    quats /= np.linalg.norm(quats, axis=1, keepdims=True)
    return dict(means=means, rotations=quats, scales=np.full((n, 3), scale),
                opacities=np.full(n, opacity), sh_coeffs=coeffs)


front = rng.normal(size=(150, 3)) * 0.25 + [0.0, -1.2, 0.0]
wall = np.column_stack([
    np.repeat(np.linspace(0.3, 0.0, 6), 200) + rng.normal(0, 0.01, 1200),
    rng.uniform(-0.6, 1.6, 1200),
    rng.uniform(-0.6, 0.6, 1200)])
hidden = rng.normal(size=(80, 3)) * 0.12 + [-0.7, 0.5, 0.0]

parts = [scene_part(front, (0.7, 0.4, 0.2), 0.8, 0.06),
         scene_part(wall, (0.3, 0.6, 0.4), 0.995, 0.09),
         scene_part(hidden, (0.9, 0.9, 0.1), 0.8, 0.04)]
scene = sv.GaussianScene(
    means=np.concatenate([p["means"] for p in parts]),
    rotations=np.concatenate([p["rotations"] for p in parts]),
    scales=np.concatenate([p["scales"] for p in parts]),
    opacities=np.concatenate([p["opacities"] for p in parts]),
    sh_coeffs=np.concatenate([p["sh_coeffs"] for p in parts]),
    sh_degree=0)


def arc_camera(i, n_cams=6):
    ang = np.deg2rad(-25 + 50 * i / (n_cams - 1))
    pos = np.array([6 * np.cos(ang), 6 * np.sin(ang), 0.0])
    forward = -pos / np.linalg.norm(pos)
    right = np.cross(forward, [0.0, 0.0, 1.0])
    right /= np.linalg.norm(right)
    w2c = np.eye(4)
    w2c[:3, :3] = np.stack([right, np.cross(forward, right), forward])
    w2c[:3, 3] = -w2c[:3, :3] @ pos
    return sv.Camera(fx=105.0, fy=105.0, cx=56.0, cy=56.0, width=112, height=112,
                     world_to_camera=w2c)


cams = [arc_camera(i) for i in range(6)]
pruned, report = prune(scene, cams)

print(f"{report.original_count} Gaussians -> {report.pruned_count} "
      f"({report.removed_fraction:.1f}% removed)")
print(f"max abs pixel error over {len(cams)} cameras: {report.max_abs_pixel_error!r}")
sv.save_ply(pruned, out / "pruned.ply")
sv.save_image_png(sv.render(scene, cams[0]).rgb, out / "prune_before.png")
sv.save_image_png(sv.render(pruned, cams[0]).rgb, out / "prune_after.png")
print("wrote pruned.ply, prune_before.png, prune_after.png (identical images)")
