import argparse
import json
import shutil

import pytest

from breathsplat.globals import CLOUD_FILE, CONFIG_FILE, FRAMES_DIR, PHASES_FILE, REPORT_FILE, TIMING_FILE
from breathsplat.main import main
from breathsplat.scripts.reconstruct import reconstruct_overrides
from breathsplat.scripts.simulate import simulate_overrides
from breathsplat.scripts.utils.cli_utils import parse_resolution, setup_parser


SIM_CONFIG = {"airway": {"tree_depth": 1, "ring_vertices": 8, "rings_per_segment": 4}}
FIT_CONFIG = {
    "schedule": {"iters_phase_only": 1, "iters_appearance_only": 1, "iters_joint": 1},
    "gaussians_per_face": 1.0,
    "grid_size": 3,
}


@pytest.fixture
def configs(tmp_path):
    sim, fit = tmp_path / "sim.json", tmp_path / "fit.json"
    sim.write_text(json.dumps(SIM_CONFIG))
    fit.write_text(json.dumps(FIT_CONFIG))
    return sim, fit


def test_parse_resolution():
    assert parse_resolution("128x96") == (128, 96)
    assert parse_resolution("32X32") == (32, 32)
    for bad in ("128", "axb", "4x4"):
        with pytest.raises(argparse.ArgumentTypeError):
            parse_resolution(bad)


def test_seed_reaches_every_generator():
    args = setup_parser().parse_args(["simulate", "--seed", "7", "--frames", "5", "--resolution", "40x30"])
    assert simulate_overrides(args) == {
        "airway.rng_seed": 7,
        "trajectory.rng_seed": 7,
        "material.rng_seed": 7,
        "trajectory.frame_count": 5,
        "width": 40,
        "height": 30,
    }
    args = setup_parser().parse_args(["reconstruct", "--seed", "2", "--frozen-phase", "0.3"])
    assert reconstruct_overrides(args) == {"seed": 2, "frozen_phase": True, "phase_value": 0.3}


def test_usage_errors_exit_with_two():
    with pytest.raises(SystemExit) as info:
        main(["simulate", "--resolution", "2x2"])
    assert info.value.code == 2


@pytest.mark.slow
def test_golden_path(tmp_path, configs, capsys):
    sim, fit = configs
    dataset, run = tmp_path / "dataset", tmp_path / "run"

    assert main(["simulate", "--config", str(sim), "--out", str(dataset), "--frames", "3", "--resolution", "32x32"]) == 0
    assert main(["reconstruct", "--config", str(fit), "--dataset", str(dataset), "--out", str(run)]) == 0
    for name in (PHASES_FILE, CLOUD_FILE, TIMING_FILE, CONFIG_FILE):
        assert (run / name).exists()
    assert len(json.loads((run / PHASES_FILE).read_text())) == 3

    capsys.readouterr()
    assert main(["evaluate", "--dataset", str(dataset), "--run", str(run)]) == 0
    assert capsys.readouterr().out.startswith("Evaluation over 3 frames")
    assert (run / REPORT_FILE).exists()

    prefix = tmp_path / "preview" / "frame1"
    assert main(["preview", "--dataset", str(dataset), "--frame", "1", "--out", str(prefix)]) == 0
    assert (tmp_path / "preview" / "frame1_rgb.ppm").exists()
    assert (tmp_path / "preview" / "frame1_depth.ppm").exists()


def test_failures_return_one(tmp_path, tiny_dataset):
    bad = tmp_path / "bad.json"
    bad.write_text("{ nope")
    assert main(["simulate", "--config", str(bad), "--out", str(tmp_path / "d")]) == 1
    assert main(["preview", "--dataset", str(tiny_dataset.root), "--frame", "99", "--out", str(tmp_path / "p")]) == 1
    assert main(["reconstruct", "--dataset", str(tiny_dataset.root), "--resolution", "64x64", "--out", str(tmp_path / "r")]) == 1
    assert main(["evaluate", "--dataset", str(tmp_path / "none"), "--run", str(tmp_path / "r")]) == 1


def test_truncated_frame_returns_one(tmp_path, tiny_dataset):
    dataset = shutil.copytree(tiny_dataset.root, tmp_path / "dataset")
    frame = dataset / FRAMES_DIR / "000001.ppm"
    frame.write_bytes(frame.read_bytes()[:100])
    assert main(["preview", "--dataset", str(dataset), "--frame", "1", "--out", str(tmp_path / "p")]) == 1
