import numpy as np
import pytest

from breathsplat.errors import DatasetError
from breathsplat.raster.image_io import depth_to_image, read_depth, read_ppm, write_depth, write_ppm


def test_ppm_header_and_round_trip(tmp_path):
    image = np.random.default_rng(0).integers(0, 256, size=(5, 9, 3)) / 255.0
    path = write_ppm(tmp_path / "frame.ppm", image)
    assert path.read_bytes().startswith(b"P6\n9 5\n255\n")
    assert np.array_equal(read_ppm(path), image)


def test_ppm_clamps_out_of_range(tmp_path):
    path = write_ppm(tmp_path / "frame.ppm", np.full((2, 2, 3), 1.7))
    assert np.all(read_ppm(path) == 1.0)


def test_ppm_with_comment(tmp_path):
    path = tmp_path / "frame.ppm"
    path.write_bytes(b"P6\n# made by hand\n1 1\n255\n" + bytes([255, 0, 51]))
    assert np.allclose(read_ppm(path)[0, 0], [1.0, 0.0, 0.2])


def test_ppm_errors(tmp_path):
    with pytest.raises(DatasetError):
        read_ppm(tmp_path / "missing.ppm")
    bad = tmp_path / "bad.ppm"
    bad.write_bytes(b"P3\n1 1\n255\n0 0 0\n")
    with pytest.raises(DatasetError):
        read_ppm(bad)


def test_depth_round_trip_keeps_infinity(tmp_path):
    depth = np.array([[1.5, np.inf], [20.25, 3.0]])
    path = write_depth(tmp_path / "d.f32", depth)
    assert path.stat().st_size == 16
    assert np.array_equal(np.fromfile(path, dtype="<f4"), depth.ravel().astype(np.float32))
    assert np.array_equal(read_depth(path, 2, 2), depth)


def test_depth_size_mismatch(tmp_path):
    path = write_depth(tmp_path / "d.f32", np.ones((2, 2)))
    with pytest.raises(DatasetError):
        read_depth(path, 3, 3)
    with pytest.raises(DatasetError):
        read_depth(tmp_path / "missing.f32", 2, 2)


def test_depth_visualization_spans_the_finite_range():
    image = depth_to_image(np.array([[10.0, 20.0], [np.inf, 15.0]]))
    grey = image[..., 0]
    assert grey[0, 0] == 0.0 and grey[0, 1] == 1.0
    assert grey[1, 1] == pytest.approx(0.5)
    assert grey[1, 0] == 0.0
    assert not depth_to_image(np.full((2, 2), np.inf)).any()


def test_truncated_raster_is_a_dataset_error(tmp_path):
    path = write_ppm(tmp_path / "frame.ppm", np.zeros((8, 8, 3)))
    path.write_bytes(path.read_bytes()[:100])
    with pytest.raises(DatasetError, match="expected 192"):
        read_ppm(path)
