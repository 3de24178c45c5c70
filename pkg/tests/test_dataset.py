import numpy as np
import pytest

from breathsplat.errors import DatasetError, FrameIndexError
from breathsplat.globals import DEPTH_DIR, FRAMES_DIR, MESHES_DIR, META_FILE
from breathsplat.sim.breathing import breathing_profile
from breathsplat.sim.dataset import frame_jitter, generate_dataset, load_dataset
from breathsplat.types.config_types import TrajectorySpec


def test_layout_on_disk(tiny_dataset):
    root = tiny_dataset.root
    assert len(tiny_dataset) == 4
    assert sorted(p.name for p in (root / FRAMES_DIR).glob("*.ppm")) == [f"{i:06d}.ppm" for i in range(4)]
    depth_files = sorted((root / DEPTH_DIR).glob("*.f32"))
    assert len(depth_files) == 4
    assert all(p.stat().st_size == 32 * 32 * 4 for p in depth_files)
    assert not (root / MESHES_DIR).exists()


def test_frames_match_metadata(tiny_dataset, tiny_sim_config):
    meta = tiny_dataset.meta
    assert (meta.width, meta.height, meta.fps) == (32, 32, 15.0)
    for record in meta.frames:
        assert record.alpha_gt == pytest.approx(breathing_profile(tiny_sim_config.breathing, record.index / 15.0))
        assert 0.9 <= record.exposure_gain <= 1.1
        assert record.exposure_gain == frame_jitter(tiny_sim_config.material, record.index)[0]
    assert tiny_dataset.frame_rgb(0).shape == (32, 32, 3)
    assert np.isfinite(tiny_dataset.frame_depth(0)).any()


def test_load_round_trip(tiny_dataset):
    loaded = load_dataset(tiny_dataset.root)
    assert loaded.meta == tiny_dataset.meta
    assert np.array_equal(loaded.mesh.insp.vertices, tiny_dataset.mesh.insp.vertices)
    assert np.allclose(loaded.mesh.delta, tiny_dataset.mesh.delta, atol=1e-9)
    assert np.array_equal(loaded.frame_rgb(2), tiny_dataset.frame_rgb(2))
    assert np.array_equal(loaded.phases, tiny_dataset.phases)


def test_generation_is_byte_identical(tmp_path, tiny_dataset, tiny_sim_config):
    again = generate_dataset(tiny_sim_config, tmp_path / "again")
    assert (again.root / META_FILE).read_bytes() == (tiny_dataset.root / META_FILE).read_bytes()
    for index in range(len(again)):
        assert again.frame_path(index).read_bytes() == tiny_dataset.frame_path(index).read_bytes()
        assert again.depth_path(index).read_bytes() == tiny_dataset.depth_path(index).read_bytes()


def test_intermediate_meshes(tmp_path, tiny_sim_config):
    config = tiny_sim_config.model_copy(
        update={"write_intermediate_meshes": True, "trajectory": TrajectorySpec(frame_count=2)}
    )
    dataset = generate_dataset(config, tmp_path / "meshes")
    assert len(list((dataset.root / MESHES_DIR).glob("*.obj"))) == 2


def test_frame_index_out_of_range(tiny_dataset):
    for index in (-1, 4):
        with pytest.raises(FrameIndexError):
            tiny_dataset.frame_rgb(index)
        with pytest.raises(FrameIndexError):
            tiny_dataset.camera(index)


def test_missing_or_broken_dataset(tmp_path):
    with pytest.raises(DatasetError):
        load_dataset(tmp_path / "nowhere")
    broken = tmp_path / "broken"
    broken.mkdir()
    (broken / META_FILE).write_text("{not json")
    with pytest.raises(DatasetError):
        load_dataset(broken)


def test_frame_jitter_is_seeded(tiny_sim_config):
    material = tiny_sim_config.material
    gain, balance = frame_jitter(material, 3)
    again_gain, again_balance = frame_jitter(material, 3)
    assert gain == again_gain and np.array_equal(balance, again_balance)
    assert np.all((balance >= 0.97) & (balance <= 1.03))
