"""Command-line pipeline: render, segment, extract, delete, affordance,
prune, eval-miou, info.

Masks and feature maps are matched to cameras by the zero-padded frame
index in their filename (e.g. masks/00042.png pairs with camera 42).
Machine-readable one-line JSON summaries go to stdout; JSON-lines
progress logging goes to stderr. Exit codes: 2 usage, 3 data/format,
4 dimension mismatch.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import affordance as aff
from . import evaluation as ev
from . import pruning as pr
from . import scene_io as sio
from . import segmentation as seg
from .errors import DataError, DimensionError, FormatError, UsageError
from .splatting import RasterConfig, render

EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_DIMENSION = 4


def _log(event: str, **fields) -> None:
    print(json.dumps({"event": event, **fields}), file=sys.stderr)


def _emit(summary: dict) -> None:
    print(json.dumps(summary))


def _config(args) -> RasterConfig:
    workers = getattr(args, "workers", 1)
    env = os.environ.get("SPLATVOTE_WORKERS")
    if env:
        workers = int(env)
    return RasterConfig(workers=max(1, workers))


def _indexed_files(directory, suffix: str) -> dict[int, Path]:
    """Map frame index -> file for names whose stem is a decimal index."""
    directory = Path(directory)
    if not directory.is_dir():
        raise UsageError(f"not a directory: {directory}")
    found = {}
    for path in sorted(directory.iterdir()):
        if path.suffix.lower() != suffix or not path.stem.isdigit():
            continue
        idx = int(path.stem)
        if idx in found:
            raise UsageError(f"duplicate frame index {idx}: {found[idx]} and {path}")
        found[idx] = path
    if not found:
        raise UsageError(f"no frame-indexed {suffix} files in {directory}")
    return found


def _paired_frames(cameras, files: dict[int, Path]):
    pairs = []
    for idx in sorted(files):
        if idx >= len(cameras):
            raise UsageError(f"{files[idx]}: frame index {idx} has no camera "
                             f"(only {len(cameras)} cameras loaded)")
        pairs.append((idx, cameras[idx], files[idx]))
    return pairs


def cmd_info(args) -> dict:
    scene = sio.load_ply(args.scene)
    lo = scene.means.min(axis=0).tolist() if scene.count else None
    hi = scene.means.max(axis=0).tolist() if scene.count else None
    return {"command": "info", "scene": str(args.scene), "count": scene.count,
            "sh_degree": scene.sh_degree, "bbox_min": lo, "bbox_max": hi}


def cmd_render(args) -> dict:
    scene = sio.load_ply(args.scene)
    cameras = sio.load_cameras(args.cameras)
    indices = args.index if args.index else list(range(len(cameras)))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    config = _config(args)
    for idx in indices:
        if not 0 <= idx < len(cameras):
            raise UsageError(f"camera index {idx} out of range 0..{len(cameras) - 1}")
        image = render(scene, cameras[idx], config)
        sio.save_image_png(image.rgb, out / f"{idx:05d}.png")
        _log("rendered", frame=idx)
    return {"command": "render", "frames": len(indices), "out": str(out)}


def cmd_segment(args) -> dict:
    scene = sio.load_ply(args.scene)
    cameras = sio.load_cameras(args.cameras)
    frames = []
    for idx, camera, path in _paired_frames(cameras, _indexed_files(args.masks, ".png")):
        frames.append((camera, sio.load_mask(path)))
        _log("loaded_mask", frame=idx)
    config = _config(args)
    method = args.method
    if method == "ours":
        votes = seg.segment_votes(scene, frames, config)
        mask3d = votes > 0
        vote_stats = {"min": float(votes.min()), "max": float(votes.max())}
    elif method == "baseline1":
        mask3d = seg.segment_baseline1(scene, frames, config)
        vote_stats = {}
    else:
        mask3d = seg.segment_baseline2(scene, frames, config, eps=args.eps)
        vote_stats = {}
    sio.save_gaussian_mask(mask3d, args.out)
    return {"command": "segment", "method": method, "frames": len(frames),
            "gaussians": scene.count, "selected": int(mask3d.sum()),
            "out": str(args.out), **vote_stats}


def cmd_extract(args, keep_masked=True) -> dict:
    scene = sio.load_ply(args.scene)
    mask3d = sio.load_gaussian_mask(args.mask)
    if len(mask3d) != scene.count:
        raise DimensionError(f"{args.mask}: mask length {len(mask3d)} does not "
                             f"match scene count {scene.count}")
    result = seg.extract(scene, mask3d) if keep_masked else seg.delete(scene, mask3d)
    sio.save_ply(result, args.out)
    return {"command": "extract" if keep_masked else "delete",
            "input_count": scene.count, "output_count": result.count, "out": str(args.out)}


def cmd_affordance(args) -> dict:
    scene = sio.load_ply(args.scene)
    cameras = sio.load_cameras(args.cameras)
    exemplars = aff.load_exemplars(args.exemplars)
    frames = []
    for idx, camera, path in _paired_frames(cameras, _indexed_files(args.features, ".fmap")):
        frames.append((camera, aff.load_feature_map(path)))
        _log("loaded_features", frame=idx)
    config = _config(args)
    if args.label_maps:
        out_maps = Path(args.label_maps)
        out_maps.mkdir(parents=True, exist_ok=True)
        for (camera, fm), idx in zip(frames, sorted(_indexed_files(args.features, ".fmap"))):
            lm = aff.transfer_2d(fm, exemplars, args.k, width=camera.width, height=camera.height)
            sio.save_label_map(lm, out_maps / f"{idx:05d}.png")
    votes = aff.affordance_votes(scene, frames, exemplars, args.k, config)
    labels = np.argmax(votes, axis=0).astype(np.uint8)
    labels[votes.sum(axis=0) == 0] = 0
    sio.save_gaussian_labels(labels, args.out)
    per_label = {exemplars.labels[i]: int((labels == i).sum()) for i in range(exemplars.num_labels)}
    return {"command": "affordance", "frames": len(frames), "k": args.k,
            "gaussians": scene.count, "per_label_counts": per_label, "out": str(args.out)}


def cmd_prune(args) -> dict:
    scene = sio.load_ply(args.scene)
    cameras = sio.load_cameras(args.cameras)
    config = _config(args)
    pruned, report = pr.prune(scene, cameras, config)
    sio.save_ply(pruned, args.out)
    report_dict = {
        "original_count": report.original_count,
        "pruned_count": report.pruned_count,
        "removed_fraction": report.removed_fraction,
        "max_abs_pixel_error": report.max_abs_pixel_error,
        "per_camera_errors": report.per_camera_errors,
    }
    if args.report:
        with open(args.report, "w", encoding="utf-8") as f:
            json.dump(report_dict, f, indent=2)
    return {"command": "prune", "out": str(args.out), **report_dict}


def cmd_eval_miou(args) -> dict:
    scene = sio.load_ply(args.scene)
    cameras = sio.load_cameras(args.cameras)
    mask3d = sio.load_gaussian_mask(args.gaussian_mask)
    if len(mask3d) != scene.count:
        raise DimensionError(f"{args.gaussian_mask}: mask length {len(mask3d)} does "
                             f"not match scene count {scene.count}")
    frames, indices = [], []
    for idx, camera, path in _paired_frames(cameras, _indexed_files(args.gt_masks, ".png")):
        frames.append((camera, sio.load_mask(path)))
        indices.append(idx)
    report = ev.evaluate_segmentation(
        scene, mask3d, frames, frame_indices=indices,
        threshold=args.threshold, grayscale=args.grayscale, config=_config(args))
    report_dict = {"per_frame_iou": report.per_frame_iou, "miou": report.miou,
                   "recall": report.recall, "frames_used": report.frames_used}
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            json.dump(report_dict, f, indent=2)
    return {"command": "eval-miou", **report_dict}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="splatvote",
        description="Segment, label, and prune 3D Gaussian splat scenes by influence voting.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, cameras=True):
        p.add_argument("--scene", required=True, help="input 3DGS PLY file")
        if cameras:
            p.add_argument("--cameras", required=True, help="camera JSON file")
        p.add_argument("--workers", type=int, default=1,
                       help="tile worker threads (SPLATVOTE_WORKERS overrides)")
        p.add_argument("--seed", type=int, default=0, help="seed for sampling variants")

    p = sub.add_parser("info", help="print scene statistics")
    p.add_argument("--scene", required=True)
    p.set_defaults(func=cmd_info)

    p = sub.add_parser("render", help="render cameras to PNG files")
    add_common(p)
    p.add_argument("--index", type=int, action="append", help="camera index (repeatable)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("segment", help="vote a per-Gaussian mask from 2D masks")
    add_common(p)
    p.add_argument("--masks", required=True, help="directory of frame-indexed mask PNGs")
    p.add_argument("--method", choices=["ours", "baseline1", "baseline2"], default="ours")
    p.add_argument("--eps", type=float, default=seg.BASELINE2_EPS,
                   help="influence threshold for baseline2")
    p.add_argument("--out", required=True, help="output GMSK file")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("extract", help="keep only mask-true Gaussians")
    add_common(p, cameras=False)
    p.add_argument("--mask", required=True, help="GMSK file")
    p.add_argument("--out", required=True, help="output PLY")
    p.set_defaults(func=lambda a: cmd_extract(a, keep_masked=True))

    p = sub.add_parser("delete", help="remove mask-true Gaussians")
    add_common(p, cameras=False)
    p.add_argument("--mask", required=True, help="GMSK file")
    p.add_argument("--out", required=True, help="output PLY")
    p.set_defaults(func=lambda a: cmd_extract(a, keep_masked=False))

    p = sub.add_parser("affordance", help="transfer exemplar labels onto Gaussians")
    add_common(p)
    p.add_argument("--features", required=True, help="directory of frame-indexed .fmap files")
    p.add_argument("--exemplars", required=True, help="exemplar JSON file")
    p.add_argument("--k", type=int, default=aff.DEFAULT_KNN_K, help="kNN neighbor count")
    p.add_argument("--label-maps", help="optional directory for 2D label-map PNG dumps")
    p.add_argument("--out", required=True, help="output GLBL file")
    p.set_defaults(func=cmd_affordance)

    p = sub.add_parser("prune", help="drop zero-influence Gaussians and verify")
    add_common(p)
    p.add_argument("--out", required=True, help="output PLY")
    p.add_argument("--report", help="optional JSON report path")
    p.set_defaults(func=cmd_prune)

    p = sub.add_parser("eval-miou", help="mIoU/recall of a Gaussian mask vs GT 2D masks")
    add_common(p)
    p.add_argument("--gaussian-mask", required=True, help="GMSK file")
    p.add_argument("--gt-masks", required=True, help="directory of frame-indexed mask PNGs")
    p.add_argument("--threshold", type=float, default=0.5, help="grayscale threshold")
    p.add_argument("--grayscale", choices=sorted(ev.GRAYSCALE_WEIGHTS), default="mean")
    p.add_argument("--out", help="optional JSON report path")
    p.set_defaults(func=cmd_eval_miou)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    try:
        summary = args.func(args)
    except UsageError as e:
        _log("error", kind="usage", message=str(e))
        return EXIT_USAGE
    except (FormatError, DataError) as e:
        _log("error", kind="data", message=str(e))
        return EXIT_DATA
    except DimensionError as e:
        _log("error", kind="dimension", message=str(e))
        return EXIT_DIMENSION
    except FileNotFoundError as e:
        _log("error", kind="usage", message=str(e))
        return EXIT_USAGE
    _emit(summary)
    return 0


if __name__ == "__main__":
    sys.exit(main())
