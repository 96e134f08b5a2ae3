"""Few-shot affordance transfer: kNN patch labeling against exemplar
features, then per-label influence voting distilled onto the Gaussians.

FMAP binary layout: magic "FMAP", u32 version (=1), u32 grid_h, grid_w,
dim, patch_px, then grid_h*grid_w*dim little-endian float32, row-major.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from .errors import DataError, DimensionError, FormatError, UsageError
from .scene import Camera, GaussianScene, LabelMap2D
from .splatting import DEFAULT_CONFIG, RasterConfig, accumulate_label_influence

DEFAULT_KNN_K = 5


@dataclass(frozen=True)
class FeatureMap:
    """Patch-grid of feature vectors for one rendered image."""

    data: np.ndarray   # (grid_h, grid_w, dim) float32
    patch_px: int

    def __post_init__(self):
        data = np.ascontiguousarray(np.asarray(self.data, dtype=np.float32))
        data.flags.writeable = False
        object.__setattr__(self, "data", data)
        if data.ndim != 3:
            raise DimensionError(f"feature map must be (grid_h, grid_w, dim), got {data.shape}")
        if data.shape[0] < 1 or data.shape[1] < 1 or data.shape[2] < 1:
            raise DataError(f"feature map dims must be >= 1, got {data.shape}")
        if self.patch_px < 1:
            raise DataError(f"patch_px must be >= 1, got {self.patch_px}")
        if not np.isfinite(data).all():
            raise DataError("feature map contains non-finite values")

    @property
    def grid_h(self) -> int:
        return self.data.shape[0]

    @property
    def grid_w(self) -> int:
        return self.data.shape[1]

    @property
    def dim(self) -> int:
        return self.data.shape[2]


@dataclass(frozen=True)
class ExemplarSet:
    """Labeled feature vectors acting as the kNN training set.

    labels[0] must be "background"; every non-background label needs at
    least one entry, background entries are permitted.
    """

    labels: list[str]
    entry_labels: np.ndarray   # (E,) int
    features: np.ndarray       # (E, dim) float32

    def __post_init__(self):
        object.__setattr__(self, "labels", list(self.labels))
        ids = np.asarray(self.entry_labels, dtype=np.int64)
        feats = np.ascontiguousarray(np.asarray(self.features, dtype=np.float32))
        ids.flags.writeable = False
        feats.flags.writeable = False
        object.__setattr__(self, "entry_labels", ids)
        object.__setattr__(self, "features", feats)
        if not self.labels or self.labels[0] != "background":
            raise DataError('exemplar label list must start with "background"')
        if len(ids) == 0:
            raise DataError("exemplar set has no entries (no trainable set)")
        if feats.ndim != 2 or len(feats) != len(ids):
            raise DimensionError(f"features shape {feats.shape} does not match {len(ids)} entries")
        if not np.isfinite(feats).all():
            raise DataError("exemplar features contain non-finite values")
        if ids.min() < 0 or ids.max() >= len(self.labels):
            raise DataError(f"entry label id outside 0..{len(self.labels) - 1}")
        present = set(ids.tolist())
        missing = [name for i, name in enumerate(self.labels) if i > 0 and i not in present]
        if missing:
            raise DataError(f"labels without exemplar entries: {missing}")

    @property
    def num_labels(self) -> int:
        return len(self.labels)

    @property
    def dim(self) -> int:
        return self.features.shape[1]


def transfer_patch_labels(features: FeatureMap, exemplars: ExemplarSet,
                          k: int = DEFAULT_KNN_K) -> tuple[np.ndarray, int]:
    """kNN cosine-similarity label per patch.

    Majority over the k most similar exemplars; ties break toward higher
    summed similarity, then lower label id. Zero-norm patch features are
    assigned background; returns (grid labels, zero-norm patch count).
    """
    if k < 1:
        raise UsageError(f"k must be >= 1, got {k}")
    if features.dim != exemplars.dim:
        raise DimensionError(
            f"feature dim {features.dim} does not match exemplar dim {exemplars.dim}")
    gh, gw = features.grid_h, features.grid_w
    flat = features.data.reshape(-1, features.dim).astype(np.float64)
    norms = np.linalg.norm(flat, axis=1)
    zero = norms == 0
    unit = np.where(zero[:, None], 0.0, flat / np.where(zero, 1.0, norms)[:, None])

    ex = exemplars.features.astype(np.float64)
    ex_norms = np.linalg.norm(ex, axis=1)
    ex_unit = np.where(ex_norms[:, None] == 0, 0.0, ex / np.where(ex_norms == 0, 1.0, ex_norms)[:, None])

    sims = unit @ ex_unit.T                      # (P, E)
    k_eff = min(k, sims.shape[1])
    topk = np.argsort(-sims, axis=1, kind="stable")[:, :k_eff]
    p_idx = np.arange(sims.shape[0])[:, None]
    top_labels = exemplars.entry_labels[topk]    # (P, k)
    top_sims = sims[p_idx, topk]

    n_labels = exemplars.num_labels
    counts = np.zeros((sims.shape[0], n_labels))
    sim_sums = np.zeros((sims.shape[0], n_labels))
    np.add.at(counts, (p_idx, top_labels), 1.0)
    np.add.at(sim_sums, (p_idx, top_labels), top_sims)

    cand = counts == counts.max(axis=1, keepdims=True)
    sums = np.where(cand, sim_sums, -np.inf)
    cand &= sums == sums.max(axis=1, keepdims=True)
    labels = np.argmax(cand, axis=1)             # first True = lowest label id
    labels[zero] = 0
    return labels.reshape(gh, gw).astype(np.uint8), int(zero.sum())


def paint_patches(grid_labels: np.ndarray, patch_px: int,
                  width: int, height: int) -> LabelMap2D:
    """Expand a patch-label grid to per-pixel labels; pixel (x, y) belongs
    to patch (y // patch_px, x // patch_px), edge patches included."""
    gh, gw = grid_labels.shape
    if gh * patch_px < height or gw * patch_px < width:
        raise DimensionError(
            f"patch grid {gw}x{gh} (patch {patch_px}px) does not cover {width}x{height}")
    full = np.repeat(np.repeat(grid_labels, patch_px, axis=0), patch_px, axis=1)
    return LabelMap2D(labels=full[:height, :width])


def transfer_2d(features: FeatureMap, exemplars: ExemplarSet, k: int = DEFAULT_KNN_K,
                width: int | None = None, height: int | None = None) -> LabelMap2D:
    """2D-2D transfer: kNN patch labels painted over their pixel footprint.
    Without explicit dimensions the map covers the full patch grid."""
    grid, _ = transfer_patch_labels(features, exemplars, k)
    w = width if width is not None else features.grid_w * features.patch_px
    h = height if height is not None else features.grid_h * features.patch_px
    return paint_patches(grid, features.patch_px, w, h)


def affordance_votes(scene: GaussianScene, frames: list[tuple[Camera, FeatureMap]],
                     exemplars: ExemplarSet, k: int = DEFAULT_KNN_K,
                     config: RasterConfig = DEFAULT_CONFIG) -> np.ndarray:
    """(labels, N) influence-vote matrix accumulated over frames: each
    frame's transferred label map partitions its pixels, and every label
    row (background included) collects the masked influence."""
    if not frames:
        raise UsageError("affordance transfer requires at least one (camera, features) frame")
    votes = np.zeros((exemplars.num_labels, scene.count))
    for camera, features in frames:
        label_map = transfer_2d(features, exemplars, k,
                                width=camera.width, height=camera.height)
        votes += accumulate_label_influence(scene, camera, label_map,
                                            exemplars.num_labels, config)
    return votes


def affordance_segment(scene: GaussianScene, frames: list[tuple[Camera, FeatureMap]],
                       exemplars: ExemplarSet, k: int = DEFAULT_KNN_K,
                       config: RasterConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Per-Gaussian label ids: argmax over vote rows; Gaussians that never
    collected influence stay background."""
    votes = affordance_votes(scene, frames, exemplars, k, config)
    labels = np.argmax(votes, axis=0).astype(np.uint8)
    labels[votes.sum(axis=0) == 0] = 0
    return labels


def save_feature_map(fm: FeatureMap, path) -> None:
    with open(path, "wb") as f:
        f.write(b"FMAP")
        f.write(struct.pack("<5I", 1, fm.grid_h, fm.grid_w, fm.dim, fm.patch_px))
        f.write(fm.data.astype("<f4").tobytes())


def load_feature_map(path) -> FeatureMap:
    with open(path, "rb") as f:
        head = f.read(24)
        if len(head) < 24 or head[:4] != b"FMAP":
            raise FormatError(f"{path}: bad magic (expected FMAP)")
        version, gh, gw, dim, patch_px = struct.unpack("<5I", head[4:24])
        if version != 1:
            raise FormatError(f"{path}: unsupported FMAP version {version}")
        payload = f.read()
    expected = gh * gw * dim * 4
    if len(payload) != expected:
        raise FormatError(f"{path}: expected {expected} data bytes, found {len(payload)}")
    data = np.frombuffer(payload, dtype="<f4").reshape(gh, gw, dim)
    if not np.isfinite(data).all():
        raise DataError(f"{path}: feature map contains non-finite values")
    return FeatureMap(data=data, patch_px=patch_px)


def load_exemplars(path) -> ExemplarSet:
    with open(path, "r", encoding="utf-8") as f:
        doc = json.load(f)
    if not isinstance(doc, dict) or "labels" not in doc or "entries" not in doc:
        raise FormatError(f"{path}: exemplar JSON needs 'labels' and 'entries'")
    entries = doc["entries"]
    if not entries:
        raise DataError(f"{path}: exemplar set has no entries (no trainable set)")
    try:
        ids = np.array([e["label"] for e in entries], dtype=np.int64)
        feats = np.array([e["feature"] for e in entries], dtype=np.float32)
    except (KeyError, ValueError) as e:
        raise FormatError(f"{path}: malformed exemplar entry: {e}") from e
    if feats.ndim != 2:
        raise FormatError(f"{path}: exemplar features have inconsistent lengths")
    return ExemplarSet(labels=doc["labels"], entry_labels=ids, features=feats)


def save_exemplars(exemplars: ExemplarSet, path) -> None:
    doc = {
        "labels": exemplars.labels,
        "entries": [
            {"label": int(lbl), "feature": [float(v) for v in feat]}
            for lbl, feat in zip(exemplars.entry_labels, exemplars.features)
        ],
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f)
