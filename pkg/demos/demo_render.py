"""Render a small synthetic splat scene from a ring of viewpoints.

Builds a colorful blob of Gaussians, saves it as a standard 3DGS PLY,
renders four cameras, and writes PNGs plus the camera file so the same
scene can be replayed through the CLI:

    python demos/demo_render.py
    splatvote render --scene demo_output/blob.ply \
        --cameras demo_output/cameras.json --out demo_output/cli_renders
"""

from pathlib import Path

import numpy as np

import splatvote as sv
from splatvote.sh import rgb_to_dc

out = Path("demo_output")
out.mkdir(exist_ok=True)

rng = np.random.default_rng(0)
n = 400
offsets = rng.normal(size=(n, 3))
offsets /= np.linalg.norm(offsets, axis=1, keepdims=True)
offsets *= 0.5 * rng.uniform(0, 1, size=(n, 1)) ** (1 / 3)

coeffs = np.zeros((n, 1, 3))
coeffs[:, 0, :] = rgb_to_dc(0.25 + 0.5 * (offsets + 0.5))  # position-tinted colors
quats = rng.normal(size=(n, 4))
quats /= np.linalg.norm(quats, axis=1, keepdims=True)

scene = sv.GaussianScene(
    means=offsets,
    rotations=quats,
    scales=rng.uniform(0.03, 0.08, size=(n, 3)),
    opacities=rng.uniform(0.5, 0.9, size=n),
    sh_coeffs=coeffs,
    sh_degree=0,
)
sv.save_ply(scene, out / "blob.ply")

cameras = []
for i in range(4):
    ang = 2 * np.pi * i / 4
    pos = np.array([4 * np.cos(ang), 4 * np.sin(ang), 1.2])
    forward = -pos / np.linalg.norm(pos)
    right = np.cross(forward, [0.0, 0.0, 1.0])
    right /= np.linalg.norm(right)
    down = np.cross(forward, right)
    w2c = np.eye(4)
    w2c[:3, :3] = np.stack([right, down, forward])
    w2c[:3, 3] = -w2c[:3, :3] @ pos
    cameras.append(sv.Camera(fx=140.0, fy=140.0, cx=80.0, cy=80.0,
                             width=160, height=160, world_to_camera=w2c))
sv.save_cameras(cameras, out / "cameras.json")

for i, cam in enumerate(cameras):
    image = sv.render(scene, cam)
    sv.save_image_png(image.rgb, out / f"render_{i}.png")
    covered = float((image.final_transmittance < 0.5).mean())
    print(f"view {i}: wrote render_{i}.png, {covered:.0%} of pixels mostly covered")

print(f"scene: {scene.count} Gaussians -> {out/'blob.ply'}")
