"""Scene, camera, mask, and Gaussian-mask file format tests."""

import json
import struct

import numpy as np
import pytest
from PIL import Image

import splatvote as sv
from splatvote.errors import DataError, FormatError
from conftest import random_scene

REQUIRED_PROPS = ["x", "y", "z", "f_dc_0", "f_dc_1", "f_dc_2", "opacity",
                  "scale_0", "scale_1", "scale_2", "rot_0", "rot_1", "rot_2", "rot_3"]


def write_raw_ply(path, columns):
    """Hand-built binary PLY, independent of save_ply: columns is an
    ordered dict name -> float list."""
    names = list(columns)
    n = len(next(iter(columns.values())))
    header = ["ply", "format binary_little_endian 1.0", f"element vertex {n}"]
    header += [f"property float {name}" for name in names]
    header.append("end_header")
    data = np.column_stack([np.asarray(columns[name], dtype="<f4") for name in names]) \
        if n else np.zeros((0, len(names)), dtype="<f4")
    with open(path, "wb") as f:
        f.write(("\n".join(header) + "\n").encode("ascii"))
        f.write(data.astype("<f4").tobytes())


def minimal_columns(n=1, **overrides):
    cols = {name: [0.0] * n for name in REQUIRED_PROPS}
    cols["rot_0"] = [1.0] * n
    cols.update(overrides)
    return cols


class TestLoadPly:
    def test_zero_raw_opacity_becomes_half(self, tmp_path):
        path = tmp_path / "s.ply"
        write_raw_ply(path, minimal_columns())
        scene = sv.load_ply(path)
        assert scene.opacities[0] == pytest.approx(0.5)

    def test_zero_raw_scale_becomes_one(self, tmp_path):
        path = tmp_path / "s.ply"
        write_raw_ply(path, minimal_columns())
        assert sv.load_ply(path).scales[0] == pytest.approx(1.0)

    def test_degree_inferred_from_rest_count(self, tmp_path):
        # 45 f_rest properties = 15 per channel -> 16 coefficients, degree 3
        cols = minimal_columns()
        for j in range(45):
            cols[f"f_rest_{j}"] = [0.1 * j]
        path = tmp_path / "s.ply"
        write_raw_ply(path, cols)
        scene = sv.load_ply(path)
        assert scene.sh_degree == 3
        assert scene.sh_coeffs.shape == (1, 16, 3)
        # channel-major layout: f_rest_15 is the first green band coefficient
        assert scene.sh_coeffs[0, 1, 1] == pytest.approx(np.float32(1.5))

    def test_quaternion_normalized_on_load(self, tmp_path):
        path = tmp_path / "s.ply"
        write_raw_ply(path, minimal_columns(rot_0=[2.0], rot_1=[2.0]))
        scene = sv.load_ply(path)
        assert np.linalg.norm(scene.rotations[0]) == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("missing", REQUIRED_PROPS)
    def test_missing_property_rejected(self, tmp_path, missing):
        cols = minimal_columns()
        del cols[missing]
        path = tmp_path / "s.ply"
        write_raw_ply(path, cols)
        with pytest.raises(FormatError, match=missing):
            sv.load_ply(path)

    def test_non_finite_value_names_index(self, tmp_path):
        cols = minimal_columns(n=3)
        cols["x"] = [0.0, float("nan"), 0.0]
        path = tmp_path / "s.ply"
        write_raw_ply(path, cols)
        with pytest.raises(DataError, match="1"):
            sv.load_ply(path)

    def test_not_a_ply(self, tmp_path):
        path = tmp_path / "s.ply"
        path.write_bytes(b"hello world\n")
        with pytest.raises(FormatError):
            sv.load_ply(path)

    def test_extra_properties_tolerated(self, tmp_path):
        cols = minimal_columns()
        cols["nx"] = [0.0]
        cols["ny"] = [0.0]
        cols["nz"] = [0.0]
        path = tmp_path / "s.ply"
        write_raw_ply(path, cols)
        assert sv.load_ply(path).count == 1

    def test_truncated_vertex_data(self, tmp_path):
        path = tmp_path / "s.ply"
        write_raw_ply(path, minimal_columns(n=4))
        data = path.read_bytes()
        path.write_bytes(data[:-10])
        with pytest.raises(FormatError, match="truncated"):
            sv.load_ply(path)


class TestSavePly:
    def test_round_trip_random_scenes(self, tmp_path, rng):
        for trial in range(8):
            scene = random_scene(rng, int(rng.integers(1, 40)),
                                 sh_degree=int(rng.integers(0, 4)))
            path = tmp_path / f"rt{trial}.ply"
            sv.save_ply(scene, path)
            back = sv.load_ply(path)
            assert back.sh_degree == scene.sh_degree
            for field in ("means", "rotations", "scales", "opacities", "sh_coeffs"):
                np.testing.assert_allclose(getattr(back, field), getattr(scene, field),
                                           atol=1e-6, err_msg=field)

    def test_opacity_one_clamped_with_warning(self, tmp_path, rng):
        scene = random_scene(rng, 3)
        opac = scene.opacities.copy()
        opac[1] = 1.0
        scene = sv.GaussianScene(means=scene.means, rotations=scene.rotations,
                                 scales=scene.scales, opacities=opac,
                                 sh_coeffs=scene.sh_coeffs, sh_degree=scene.sh_degree)
        path = tmp_path / "c.ply"
        with pytest.warns(UserWarning, match="clamped 1"):
            sv.save_ply(scene, path)
        back = sv.load_ply(path)
        assert back.opacities[1] == pytest.approx(1.0 - 1e-6, rel=1e-3)

    def test_empty_scene_round_trip(self, tmp_path):
        scene = sv.GaussianScene(means=np.zeros((0, 3)), rotations=np.zeros((0, 4)),
                                 scales=np.zeros((0, 3)), opacities=np.zeros(0),
                                 sh_coeffs=np.zeros((0, 1, 3)), sh_degree=0)
        path = tmp_path / "e.ply"
        sv.save_ply(scene, path)
        assert sv.load_ply(path).count == 0


class TestCameras:
    def identity_entry(self, **overrides):
        entry = {"fx": 100.0, "fy": 100.0, "cx": 50.0, "cy": 50.0,
                 "width": 100, "height": 100,
                 "world_to_camera": list(np.eye(4).reshape(-1))}
        entry.update(overrides)
        return entry

    def test_identity_camera(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"cameras": [self.identity_entry()]}))
        cams = sv.load_cameras(path)
        assert len(cams) == 1
        assert cams[0].fx == 100.0
        np.testing.assert_allclose(cams[0].world_to_camera, np.eye(4))

    def test_empty_list(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"cameras": []}))
        assert sv.load_cameras(path) == []

    def test_scaled_rotation_rejected_with_index(self, tmp_path):
        bad = np.eye(4)
        bad[:3, :3] *= 2.0
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"cameras": [
            self.identity_entry(),
            self.identity_entry(world_to_camera=list(bad.reshape(-1))),
        ]}))
        with pytest.raises(DataError, match="camera 1"):
            sv.load_cameras(path)

    def test_small_drift_reorthonormalized(self, tmp_path):
        w2c = np.eye(4)
        w2c[0, 1] = 5e-4
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"cameras": [
            self.identity_entry(world_to_camera=list(w2c.reshape(-1)))]}))
        cam = sv.load_cameras(path)[0]
        r = cam.rotation
        assert np.abs(r @ r.T - np.eye(3)).max() < 1e-10

    def test_order_preserved(self, tmp_path):
        entries = [self.identity_entry(fx=100.0 + i) for i in range(5)]
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"cameras": entries}))
        cams = sv.load_cameras(path)
        assert [c.fx for c in cams] == [100.0, 101.0, 102.0, 103.0, 104.0]

    def test_save_load_round_trip(self, tmp_path):
        from conftest import ring_cameras
        cams = ring_cameras(4)
        path = tmp_path / "c.json"
        sv.save_cameras(cams, path)
        back = sv.load_cameras(path)
        for a, b in zip(cams, back):
            np.testing.assert_allclose(a.world_to_camera, b.world_to_camera, atol=1e-12)

    def test_missing_field_rejected(self, tmp_path):
        entry = self.identity_entry()
        del entry["fy"]
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"cameras": [entry]}))
        with pytest.raises(FormatError, match="fy"):
            sv.load_cameras(path)

    def test_invalid_intrinsics_rejected(self):
        with pytest.raises(DataError):
            sv.Camera(fx=-1.0, fy=100.0, cx=0, cy=0, width=10, height=10,
                      world_to_camera=np.eye(4))
        with pytest.raises(DataError):
            sv.Camera(fx=100.0, fy=100.0, cx=0, cy=0, width=0, height=10,
                      world_to_camera=np.eye(4))


class TestMaskPng:
    def test_all_zero_is_all_false(self, tmp_path):
        path = tmp_path / "m.png"
        Image.fromarray(np.zeros((4, 6), dtype=np.uint8), mode="L").save(path)
        mask = sv.load_mask(path)
        assert mask.width == 6 and mask.height == 4
        assert not mask.bits.any()

    def test_255_is_true(self, tmp_path):
        path = tmp_path / "m.png"
        arr = np.zeros((4, 4), dtype=np.uint8)
        arr[1, 2] = 255
        Image.fromarray(arr, mode="L").save(path)
        assert sv.load_mask(path).bits[1, 2]

    def test_any_nonzero_is_true(self, tmp_path):
        path = tmp_path / "m.png"
        arr = np.array([[0, 1], [128, 255]], dtype=np.uint8)
        Image.fromarray(arr, mode="L").save(path)
        np.testing.assert_array_equal(sv.load_mask(path).bits,
                                      [[False, True], [True, True]])

    def test_label_values_preserved(self, tmp_path):
        path = tmp_path / "l.png"
        arr = np.array([[0, 1, 2], [2, 1, 0]], dtype=np.uint8)
        Image.fromarray(arr, mode="L").save(path)
        lm = sv.load_label_map(path)
        np.testing.assert_array_equal(lm.labels, arr)
        assert set(np.unique(lm.labels)) == {0, 1, 2}

    def test_multichannel_rejected(self, tmp_path):
        path = tmp_path / "rgb.png"
        Image.fromarray(np.zeros((4, 4, 3), dtype=np.uint8), mode="RGB").save(path)
        with pytest.raises(FormatError):
            sv.load_mask(path)

    def test_mask_round_trip_exact(self, tmp_path, rng):
        bits = rng.random((17, 23)) < 0.4
        path = tmp_path / "m.png"
        sv.save_mask(sv.Mask2D(bits=bits), path)
        np.testing.assert_array_equal(sv.load_mask(path).bits, bits)

    def test_label_round_trip_exact(self, tmp_path, rng):
        labels = rng.integers(0, 7, size=(9, 11)).astype(np.uint8)
        path = tmp_path / "l.png"
        sv.save_label_map(sv.LabelMap2D(labels=labels), path)
        np.testing.assert_array_equal(sv.load_label_map(path).labels, labels)


class TestGaussianMask:
    def test_file_size_is_8_plus_count(self, tmp_path):
        path = tmp_path / "m.gmsk"
        sv.save_gaussian_mask(np.array([1, 0, 1], dtype=bool), path)
        assert path.stat().st_size == 4 + 4 + 3

    def test_round_trip(self, tmp_path, rng):
        mask = rng.random(257) < 0.5
        path = tmp_path / "m.gmsk"
        sv.save_gaussian_mask(mask, path)
        np.testing.assert_array_equal(sv.load_gaussian_mask(path), mask)

    def test_empty_mask_is_8_bytes(self, tmp_path):
        path = tmp_path / "m.gmsk"
        sv.save_gaussian_mask(np.zeros(0, dtype=bool), path)
        assert path.stat().st_size == 8
        assert len(sv.load_gaussian_mask(path)) == 0

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "m.gmsk"
        path.write_bytes(b"NOPE" + struct.pack("<I", 0))
        with pytest.raises(FormatError):
            sv.load_gaussian_mask(path)

    def test_truncated_payload(self, tmp_path):
        path = tmp_path / "m.gmsk"
        path.write_bytes(b"GMSK" + struct.pack("<I", 10) + b"\x01" * 4)
        with pytest.raises(FormatError):
            sv.load_gaussian_mask(path)

    def test_labels_round_trip(self, tmp_path, rng):
        labels = rng.integers(0, 9, size=64).astype(np.uint8)
        path = tmp_path / "l.glbl"
        sv.save_gaussian_labels(labels, path)
        np.testing.assert_array_equal(sv.load_gaussian_labels(path), labels)
