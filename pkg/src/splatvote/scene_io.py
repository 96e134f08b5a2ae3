"""File formats: 3DGS PLY scenes, camera JSON, PNG masks, and the GMSK /
GLBL per-Gaussian binary formats.

PLY follows the de-facto 3DGS convention: binary little-endian, float32
properties x,y,z, f_dc_0..2, f_rest_*, opacity (pre-sigmoid), scale_0..2
(pre-exp), rot_0..3 (unnormalized quaternion, w first). f_rest is stored
channel-major: all band-1..3 reds, then greens, then blues.
"""

from __future__ import annotations

import json
import struct
import warnings
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import DataError, FormatError
from .scene import Camera, GaussianScene, LabelMap2D, Mask2D
from .sh import num_coeffs

_PLY_TYPES = {
    "float": "<f4",
    "float32": "<f4",
    "double": "<f8",
    "float64": "<f8",
    "uchar": "u1",
    "uint8": "u1",
    "char": "i1",
    "int8": "i1",
    "short": "<i2",
    "int16": "<i2",
    "ushort": "<u2",
    "uint16": "<u2",
    "int": "<i4",
    "int32": "<i4",
    "uint": "<u4",
    "uint32": "<u4",
}

OPACITY_CLAMP = 1e-6


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _logit(p: np.ndarray) -> np.ndarray:
    return np.log(p) - np.log1p(-p)


def _read_ply_header(f):
    magic = f.readline().strip()
    if magic != b"ply":
        raise FormatError("not a PLY file (missing 'ply' magic)")
    fmt = f.readline().strip()
    if fmt != b"format binary_little_endian 1.0":
        raise FormatError(f"unsupported PLY format line: {fmt.decode(errors='replace')}")
    count = None
    props: list[tuple[str, str]] = []
    in_vertex = False
    while True:
        line = f.readline()
        if not line:
            raise FormatError("unexpected end of file inside PLY header")
        line = line.strip().decode("ascii", errors="replace")
        if line == "end_header":
            break
        parts = line.split()
        if not parts or parts[0] == "comment":
            continue
        if parts[0] == "element":
            in_vertex = parts[1] == "vertex"
            if in_vertex:
                count = int(parts[2])
        elif parts[0] == "property" and in_vertex:
            if parts[1] == "list":
                raise FormatError("list properties are not supported for vertex data")
            if parts[1] not in _PLY_TYPES:
                raise FormatError(f"unsupported PLY property type '{parts[1]}'")
            props.append((parts[2], _PLY_TYPES[parts[1]]))
    if count is None:
        raise FormatError("PLY header has no 'element vertex'")
    return count, props


def load_ply(path) -> GaussianScene:
    """Load a 3DGS PLY file, applying sigmoid/exp activations and
    normalizing quaternions. sh_degree is inferred from the f_rest count."""
    path = Path(path)
    with open(path, "rb") as f:
        count, props = _read_ply_header(f)
        names = [p[0] for p in props]
        required = ["x", "y", "z", "f_dc_0", "f_dc_1", "f_dc_2", "opacity",
                    "scale_0", "scale_1", "scale_2", "rot_0", "rot_1", "rot_2", "rot_3"]
        for name in required:
            if name not in names:
                raise FormatError(f"PLY is missing required property '{name}'")
        n_rest = sum(1 for name in names if name.startswith("f_rest_"))
        if n_rest % 3 != 0:
            raise FormatError(f"f_rest property count {n_rest} is not a multiple of 3")
        k = n_rest // 3 + 1
        degree = int(round(np.sqrt(k))) - 1
        if num_coeffs(degree) != k or degree > 3:
            raise FormatError(f"f_rest count {n_rest} does not match any SH degree 0..3")
        for j in range(n_rest):
            if f"f_rest_{j}" not in names:
                raise FormatError(f"PLY is missing required property 'f_rest_{j}'")

        dtype = np.dtype([(name, t) for name, t in props])
        raw = f.read(count * dtype.itemsize)
        if len(raw) < count * dtype.itemsize:
            raise FormatError(f"PLY vertex data truncated: expected {count * dtype.itemsize} bytes")
        rows = np.frombuffer(raw, dtype=dtype, count=count)

    def col(name):
        return np.asarray(rows[name], dtype=np.float64)

    for name in names:
        vals = col(name)
        if not np.isfinite(vals).all():
            idx = int(np.argmax(~np.isfinite(vals)))
            raise DataError(f"non-finite value in property '{name}' at Gaussian {idx}")

    means = np.stack([col("x"), col("y"), col("z")], axis=1)
    quats = np.stack([col(f"rot_{i}") for i in range(4)], axis=1)
    norms = np.linalg.norm(quats, axis=1)
    if count and norms.min() < 1e-12:
        raise DataError(f"zero quaternion at Gaussian {int(np.argmin(norms))}")
    quats = quats / norms[:, None] if count else quats
    scales = np.exp(np.stack([col(f"scale_{i}") for i in range(3)], axis=1))
    opacities = _sigmoid(col("opacity"))

    coeffs = np.zeros((count, k, 3), dtype=np.float64)
    for c in range(3):
        coeffs[:, 0, c] = col(f"f_dc_{c}")
        for j in range(k - 1):
            coeffs[:, 1 + j, c] = col(f"f_rest_{c * (k - 1) + j}")

    return GaussianScene(means=means, rotations=quats, scales=scales,
                         opacities=opacities, sh_coeffs=coeffs, sh_degree=degree)


def save_ply(scene: GaussianScene, path) -> None:
    """Write a scene back to 3DGS PLY, applying the inverse activations.

    Opacities at exactly 0 or 1 are clamped into (0, 1) before the logit;
    a warning reports how many were clamped.
    """
    k = num_coeffs(scene.sh_degree)
    n_rest = 3 * (k - 1)
    names = (["x", "y", "z", "nx", "ny", "nz", "f_dc_0", "f_dc_1", "f_dc_2"]
             + [f"f_rest_{j}" for j in range(n_rest)]
             + ["opacity", "scale_0", "scale_1", "scale_2", "rot_0", "rot_1", "rot_2", "rot_3"])
    header = ["ply", "format binary_little_endian 1.0", f"element vertex {scene.count}"]
    header += [f"property float {name}" for name in names]
    header.append("end_header")

    clamped = int(((scene.opacities <= 0) | (scene.opacities >= 1)).sum())
    if clamped:
        warnings.warn(f"save_ply: clamped {clamped} opacities away from 0/1 before logit")
    opac = np.clip(scene.opacities, OPACITY_CLAMP, 1.0 - OPACITY_CLAMP)

    data = np.empty((scene.count, len(names)), dtype="<f4")
    data[:, 0:3] = scene.means
    data[:, 3:6] = 0.0
    data[:, 6:9] = scene.sh_coeffs[:, 0, :]
    for c in range(3):
        for j in range(k - 1):
            data[:, 9 + c * (k - 1) + j] = scene.sh_coeffs[:, 1 + j, c]
    base = 9 + n_rest
    data[:, base] = _logit(opac)
    data[:, base + 1:base + 4] = np.log(scene.scales)
    data[:, base + 4:base + 8] = scene.rotations

    with open(path, "wb") as f:
        f.write(("\n".join(header) + "\n").encode("ascii"))
        f.write(data.tobytes())


def load_cameras(path) -> list[Camera]:
    """Load cameras from the documented JSON schema, preserving order.

    Rotation blocks drifting from orthonormal by more than 1e-3 are an
    error; smaller drift is projected back via SVD so the Camera invariant
    (orthonormal within 1e-5) holds.
    """
    with open(path, "r", encoding="utf-8") as f:
        doc = json.load(f)
    if not isinstance(doc, dict) or "cameras" not in doc:
        raise FormatError("camera file must be a JSON object with a 'cameras' list")
    cameras = []
    for i, entry in enumerate(doc["cameras"]):
        try:
            w2c = np.array(entry["world_to_camera"], dtype=np.float64).reshape(4, 4)
        except (KeyError, ValueError) as e:
            raise FormatError(f"camera {i}: bad or missing world_to_camera: {e}") from e
        for key in ("fx", "fy", "cx", "cy", "width", "height"):
            if key not in entry:
                raise FormatError(f"camera {i}: missing field '{key}'")
        if not np.isfinite(w2c).all():
            raise DataError(f"camera {i}: non-finite world_to_camera")
        if np.abs(w2c[3] - np.array([0.0, 0.0, 0.0, 1.0])).max() > 1e-6:
            raise DataError(f"camera {i}: world_to_camera bottom row is not (0,0,0,1)")
        r = w2c[:3, :3]
        if np.abs(r @ r.T - np.eye(3)).max() > 1e-3:
            raise DataError(f"camera {i}: rotation block is not orthonormal")
        u, _, vt = np.linalg.svd(r)
        r_fixed = u @ vt
        if np.linalg.det(r_fixed) < 0:
            raise DataError(f"camera {i}: rotation block is a reflection, not a rotation")
        w2c = w2c.copy()
        w2c[:3, :3] = r_fixed
        cameras.append(Camera(
            fx=float(entry["fx"]), fy=float(entry["fy"]),
            cx=float(entry["cx"]), cy=float(entry["cy"]),
            width=int(entry["width"]), height=int(entry["height"]),
            world_to_camera=w2c,
        ))
    return cameras


def save_cameras(cameras: list[Camera], path) -> None:
    doc = {"cameras": [
        {"fx": c.fx, "fy": c.fy, "cx": c.cx, "cy": c.cy,
         "width": c.width, "height": c.height,
         "world_to_camera": [float(v) for v in c.world_to_camera.reshape(-1)]}
        for c in cameras
    ]}
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=2)


def _load_gray_png(path) -> np.ndarray:
    img = Image.open(path)
    if img.mode != "L":
        raise FormatError(f"{path}: expected 8-bit single-channel PNG, got mode '{img.mode}'")
    return np.asarray(img, dtype=np.uint8)


def load_mask(path) -> Mask2D:
    """8-bit grayscale PNG -> boolean mask (pixel > 0 is foreground)."""
    return Mask2D(bits=_load_gray_png(path) > 0)


def save_mask(mask: Mask2D, path) -> None:
    Image.fromarray(np.where(mask.bits, 255, 0).astype(np.uint8), mode="L").save(path)


def load_label_map(path) -> LabelMap2D:
    """8-bit grayscale PNG -> label map (raw byte value is the label id)."""
    return LabelMap2D(labels=_load_gray_png(path))


def save_label_map(label_map: LabelMap2D, path) -> None:
    Image.fromarray(label_map.labels, mode="L").save(path)


def save_image_png(rgb: np.ndarray, path) -> None:
    """Float [0, 1] HxWx3 image -> 8-bit PNG, rounding half-up."""
    q = np.clip(np.floor(rgb * 255.0 + 0.5), 0, 255).astype(np.uint8)
    Image.fromarray(q, mode="RGB").save(path)


def _save_byte_vector(magic: bytes, values: np.ndarray, path) -> None:
    with open(path, "wb") as f:
        f.write(magic)
        f.write(struct.pack("<I", len(values)))
        f.write(values.astype(np.uint8).tobytes())


def _load_byte_vector(magic: bytes, path) -> np.ndarray:
    with open(path, "rb") as f:
        head = f.read(8)
        if len(head) < 8 or head[:4] != magic:
            raise FormatError(f"{path}: bad magic (expected {magic.decode()})")
        (count,) = struct.unpack("<I", head[4:8])
        payload = f.read()
    if len(payload) != count:
        raise FormatError(f"{path}: expected {count} payload bytes, found {len(payload)}")
    return np.frombuffer(payload, dtype=np.uint8).copy()


def save_gaussian_mask(mask3d: np.ndarray, path) -> None:
    """Per-Gaussian boolean mask -> GMSK binary (magic, u32 count, 0/1 bytes)."""
    mask3d = np.asarray(mask3d)
    _save_byte_vector(b"GMSK", mask3d.astype(bool).astype(np.uint8), path)


def load_gaussian_mask(path) -> np.ndarray:
    values = _load_byte_vector(b"GMSK", path)
    if values.size and values.max() > 1:
        raise DataError(f"{path}: GMSK payload contains bytes other than 0/1")
    return values.astype(bool)


def save_gaussian_labels(labels: np.ndarray, path) -> None:
    """Per-Gaussian label ids -> GLBL binary (magic, u32 count, id bytes)."""
    labels = np.asarray(labels)
    if labels.size and labels.max() > 255:
        raise DataError("label ids above 255 cannot be serialized")
    _save_byte_vector(b"GLBL", labels, path)


def load_gaussian_labels(path) -> np.ndarray:
    return _load_byte_vector(b"GLBL", path)
