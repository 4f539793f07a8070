"""Tests for the SIV1 tensor format, JSON sidecars and image output."""

import json

import numpy as np
import pytest

from style_intervention.domain.directions import Hyperplane, TrainingParams
from style_intervention.domain.numgrad import Tensor
from style_intervention.service.storage import (
    FormatError,
    InputFileError,
    OutputPathError,
    decode_tensors,
    encode_tensors,
    load_plane,
    load_weights,
    read_json,
    read_tensors,
    save_plane,
    save_weights,
    sha256_file,
    sidecar_path,
    write_image,
    write_json,
    write_ppm,
    write_tensors,
)


@pytest.fixture
def tensors():
    return {
        "scalar": np.array(1.5, dtype=np.float32),
        "vector": np.arange(5, dtype=np.float32),
        "grid": np.linspace(-1, 1, 24, dtype=np.float32).reshape(2, 3, 4),
    }


class TestTensorCodec:
    """Tests for encode_tensors() and decode_tensors()."""

    def test_round_trip_keeps_names_order_and_values(self, tensors):
        decoded = decode_tensors(encode_tensors(tensors))

        assert list(decoded) == list(tensors)
        for name, values in tensors.items():
            assert decoded[name].dtype == np.float32
            np.testing.assert_array_equal(decoded[name], values)

    def test_header_is_little_endian(self, tensors):
        blob = encode_tensors(tensors)

        assert blob[:4] == b"SIV1"
        assert blob[4:8] == (1).to_bytes(4, "little")
        assert blob[8:12] == (3).to_bytes(4, "little")

    def test_empty_file_set(self):
        assert decode_tensors(encode_tensors({})) == {}

    def test_bad_magic(self, tensors):
        blob = b"NOPE" + encode_tensors(tensors)[4:]

        with pytest.raises(FormatError, match="bad magic"):
            decode_tensors(blob)

    def test_unknown_version(self, tensors):
        blob = bytearray(encode_tensors(tensors))
        blob[4] = 9

        with pytest.raises(FormatError, match="version"):
            decode_tensors(bytes(blob))

    def test_truncated(self, tensors):
        with pytest.raises(FormatError, match="truncated"):
            decode_tensors(encode_tensors(tensors)[:-1])

    def test_trailing_bytes(self, tensors):
        with pytest.raises(FormatError, match="trailing"):
            decode_tensors(encode_tensors(tensors) + b"\x00")

    def test_read_error_names_the_file(self, tmp_path):
        path = tmp_path / "broken.siv"
        path.write_bytes(b"SIV1")

        with pytest.raises(FormatError, match="broken.siv"):
            read_tensors(path)


class TestFiles:
    """Tests for the file helpers."""

    def test_missing_input(self, tmp_path):
        with pytest.raises(InputFileError) as exc_info:
            read_tensors(tmp_path / "absent.siv")

        assert exc_info.value.reason == "file not found"
        assert exc_info.value.path.endswith("absent.siv")

    def test_unwritable_output(self, tmp_path):
        blocker = tmp_path / "blocker"
        blocker.write_text("not a directory")

        with pytest.raises(OutputPathError):
            write_tensors(blocker / "out.siv", {})

    def test_parent_directories_are_created(self, tmp_path, tensors):
        path = tmp_path / "a" / "b" / "t.siv"

        write_tensors(path, tensors)

        assert path.exists()

    def test_json_is_sorted_and_indented(self, tmp_path):
        path = tmp_path / "data.json"

        write_json(path, {"b": 1, "a": [1, 2]})

        text = path.read_text()
        assert text.index('"a"') < text.index('"b"')
        assert text.endswith("\n")
        assert read_json(path) == {"a": [1, 2], "b": 1}

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")

        with pytest.raises(FormatError, match="invalid JSON"):
            read_json(path)

    def test_sidecar_path(self, tmp_path):
        assert sidecar_path(tmp_path / "w.siv").name == "w.siv.json"

    def test_sha256_is_stable(self, tmp_path, tensors):
        path = tmp_path / "t.siv"
        write_tensors(path, tensors)

        assert sha256_file(path) == sha256_file(path)
        assert len(sha256_file(path)) == 64


class TestImages:
    """Tests for PPM and exact image output."""

    def test_ppm_header_and_pixels(self, tmp_path):
        path = tmp_path / "img.ppm"
        data = np.zeros((3, 2, 4))
        data[0] = 1.0
        data[2, 1, 3] = 2.0

        write_ppm(path, Tensor(data))

        blob = path.read_bytes()
        header = b"P6\n4 2\n255\n"
        assert blob.startswith(header)
        pixels = np.frombuffer(blob[len(header) :], dtype=np.uint8).reshape(2, 4, 3)
        assert (pixels[..., 0] == 255).all()
        assert pixels[1, 3, 2] == 255
        assert pixels[0, 0, 1] == 0

    def test_ppm_needs_rgb(self, tmp_path):
        with pytest.raises(FormatError):
            write_ppm(tmp_path / "x.ppm", Tensor(np.zeros((4, 4))))

    def test_write_image_keeps_exact_values(self, tmp_path):
        image = Tensor(np.full((3, 4, 4), 0.3))

        write_image(tmp_path / "frame", image)

        assert (tmp_path / "frame.ppm").exists()
        np.testing.assert_array_equal(
            read_tensors(tmp_path / "frame.siv")["image"], image.data
        )


class TestWeightBundles:
    """Tests for save_weights() and load_weights()."""

    def test_planted_round_trip_is_byte_identical(self, tmp_path, planted):
        weights, partitions, attributes = planted
        first, second = tmp_path / "first.siv", tmp_path / "second.siv"

        save_weights(first, weights, 7, partitions, attributes)
        loaded, loaded_partitions, loaded_attributes = load_weights(first)
        save_weights(second, loaded, 7, loaded_partitions, loaded_attributes)

        assert first.read_bytes() == second.read_bytes()
        assert sidecar_path(first).read_text() == sidecar_path(second).read_text()
        assert loaded.backend == "planted"
        assert [p.concept for p in loaded_partitions] == [p.concept for p in partitions]
        assert loaded_attributes == attributes

    def test_partition_regions_survive(self, tmp_path, planted):
        weights, partitions, attributes = planted
        path = tmp_path / "w.siv"

        save_weights(path, weights, 7, partitions, attributes)
        _, loaded, _ = load_weights(path)

        for before, after in zip(partitions, loaded):
            np.testing.assert_array_equal(before.region, after.region)
            assert before.members == after.members

    def test_wrong_kind(self, tmp_path, small_weights):
        path = tmp_path / "w.siv"
        save_weights(path, small_weights, 3)
        meta = json.loads(sidecar_path(path).read_text())
        meta["kind"] = "direction"
        sidecar_path(path).write_text(json.dumps(meta))

        with pytest.raises(FormatError, match="not a weights file"):
            load_weights(path)

    def test_missing_tensor(self, tmp_path, small_weights):
        path = tmp_path / "w.siv"
        save_weights(path, small_weights, 3)
        arrays = small_weights.named_arrays()
        dropped = next(iter(arrays))
        del arrays[dropped]
        write_tensors(path, arrays)

        with pytest.raises(FormatError, match=dropped):
            load_weights(path)


class TestPlaneBundles:
    """Tests for save_plane() and load_plane()."""

    def test_round_trip(self, tmp_path):
        params = TrainingParams(l1_lambda=0.01, epochs=5, seed=3)
        plane = Hyperplane("S", np.array([0.5, 0.0, -0.25]), 0.125, params)
        path = tmp_path / "dir.siv"

        save_plane(path, plane, "red_top_left", {"training": {"note": "x"}})
        loaded, meta = load_plane(path)

        assert loaded.space == "S"
        assert loaded.bias == 0.125
        assert loaded.params == params
        np.testing.assert_array_equal(loaded.normal, plane.normal)
        assert meta["attribute"] == "red_top_left"
        assert meta["training"] == {"note": "x"}

    def test_weights_file_is_not_a_plane(self, tmp_path, small_weights):
        path = tmp_path / "w.siv"
        save_weights(path, small_weights, 3)

        with pytest.raises(FormatError, match="not a direction file"):
            load_plane(path)
