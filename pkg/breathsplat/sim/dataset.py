"""Synthetic breathing-bronchoscopy datasets: generation and loading."""

from pathlib import Path

import numpy as np
from pydantic import ValidationError
from tqdm import tqdm

from breathsplat.errors import DatasetError, FrameIndexError
from breathsplat.geometry.mesh import deform_mesh
from breathsplat.geometry.obj_io import load_breathing_mesh, save_obj
from breathsplat.globals import (
    DEPTH_DIR,
    FRAME_NAME,
    FRAMES_DIR,
    MESH_EXP_FILE,
    MESH_INSP_FILE,
    MESHES_DIR,
    META_FILE,
)
from breathsplat.raster.image_io import read_depth, read_ppm, write_depth, write_ppm
from breathsplat.sim.airway import build_airway, max_displacement
from breathsplat.sim.breathing import breathing_profile
from breathsplat.sim.shading import render_ground_truth
from breathsplat.sim.trajectory import centerline_trajectory, ping_pong
from breathsplat.types.camera_types import Camera, Intrinsics, look_at_pose
from breathsplat.types.config_types import SceneMaterial, SimulateConfig
from breathsplat.types.dataset_types import DatasetMeta, FrameRecord
from breathsplat.types.mesh_types import BreathingMesh
from breathsplat.utils.logger import logger


def frame_jitter(material: SceneMaterial, index: int) -> tuple[float, np.ndarray]:
    """Exposure gain and white balance of one frame, seeded by (material seed, frame index)."""
    rng = np.random.default_rng([material.rng_seed, index])
    gain = float(rng.uniform(*material.exposure_jitter_range))
    white_balance = rng.uniform(*material.white_balance_jitter_range, size=3)
    return gain, white_balance


def generate_dataset(config: SimulateConfig, out_dir: Path) -> "Dataset":
    """Simulate a breathing airway sequence and write it under `out_dir`.

    Layout: meta.json, mesh_insp.obj, mesh_exp.obj, frames/%06d.ppm,
    depth/%06d.f32 and, when enabled, meshes/%06d.obj.

    Raises:
        OSError: If the directory cannot be written.
    """
    out_dir = Path(out_dir)
    bm, tree = build_airway(config.airway, config.deformation)
    intrinsics = Intrinsics.from_fov(config.width, config.height, config.fov_deg)
    stations = centerline_trajectory(tree, config.trajectory, intrinsics)
    schedule = ping_pong(len(stations), config.trajectory.frame_count)

    (out_dir / FRAMES_DIR).mkdir(parents=True, exist_ok=True)
    (out_dir / DEPTH_DIR).mkdir(parents=True, exist_ok=True)
    if config.write_intermediate_meshes:
        (out_dir / MESHES_DIR).mkdir(parents=True, exist_ok=True)
    save_obj(out_dir / MESH_INSP_FILE, bm.insp.vertices, bm.faces)
    save_obj(out_dir / MESH_EXP_FILE, bm.expiration.vertices, bm.faces)

    records = []
    for index, station_id in enumerate(tqdm(schedule, desc="Rendering frames", unit="frame")):
        station = stations[station_id]
        alpha = breathing_profile(config.breathing, index / config.trajectory.fps)
        vertices = deform_mesh(bm, alpha)
        pose = look_at_pose(station.center + alpha * station.shift, station.tangent, station.up)
        camera = Camera.from_intrinsics(intrinsics, pose)
        gain, white_balance = frame_jitter(config.material, index)

        rgb, depth = render_ground_truth(
            vertices,
            bm.faces,
            camera,
            config.material,
            exposure_gain=gain,
            material_vertices=bm.insp.vertices,
            white_balance=tuple(white_balance),
        )
        name = FRAME_NAME.format(index=index)
        write_ppm(out_dir / FRAMES_DIR / f"{name}.ppm", rgb)
        write_depth(out_dir / DEPTH_DIR / f"{name}.f32", depth)
        if config.write_intermediate_meshes:
            save_obj(out_dir / MESHES_DIR / f"{name}.obj", vertices, bm.faces)
        records.append(
            FrameRecord(index=index, pose=pose.reshape(-1).tolist(), alpha_gt=alpha, exposure_gain=gain)
        )

    meta = DatasetMeta(
        **intrinsics.model_dump(),
        fps=config.trajectory.fps,
        frame_count=len(records),
        frames=records,
    )
    with open(out_dir / META_FILE, "w", encoding="utf-8") as f:
        f.write(meta.model_dump_json(indent=2))
    logger.info(
        f"✅ Wrote {meta.frame_count} frames to {out_dir} (max displacement {max_displacement(bm):.2f} mm)"
    )
    return Dataset(out_dir, meta, bm)


class Dataset:
    """Read access to a generated dataset directory."""

    def __init__(self, root: Path, meta: DatasetMeta, mesh: BreathingMesh):
        self.root = Path(root)
        self.meta = meta
        self.mesh = mesh

    def __len__(self) -> int:
        return self.meta.frame_count

    def _check_index(self, index: int) -> None:
        if not 0 <= index < len(self):
            raise FrameIndexError(f"frame {index} out of range for {len(self)} frames")

    def frame_path(self, index: int) -> Path:
        return self.root / FRAMES_DIR / f"{FRAME_NAME.format(index=index)}.ppm"

    def depth_path(self, index: int) -> Path:
        return self.root / DEPTH_DIR / f"{FRAME_NAME.format(index=index)}.f32"

    def camera(self, index: int) -> Camera:
        self._check_index(index)
        return self.meta.camera(index)

    def frame_rgb(self, index: int) -> np.ndarray:
        self._check_index(index)
        rgb = read_ppm(self.frame_path(index))
        if rgb.shape != (self.meta.height, self.meta.width, 3):
            raise DatasetError(f"frame {index} has shape {rgb.shape}, expected {self.meta.height}x{self.meta.width}")
        return rgb

    def frame_depth(self, index: int) -> np.ndarray:
        self._check_index(index)
        return read_depth(self.depth_path(index), self.meta.width, self.meta.height)

    @property
    def phases(self) -> np.ndarray:
        return self.meta.phases


def load_dataset(root: Path) -> Dataset:
    """Open a dataset directory; frames are read lazily.

    Raises:
        DatasetError: If meta.json or either mesh is missing or malformed.
    """
    root = Path(root)
    meta_path = root / META_FILE
    try:
        with open(meta_path, "r", encoding="utf-8") as f:
            meta = DatasetMeta.model_validate_json(f.read())
        mesh = load_breathing_mesh(root / MESH_INSP_FILE, root / MESH_EXP_FILE)
    except FileNotFoundError as e:
        logger.error(f"❌ Incomplete dataset at {root}: {e.filename} is missing")
        raise DatasetError(f"incomplete dataset at {root}: {e.filename} is missing") from e
    except (ValidationError, ValueError) as e:
        logger.error(f"❌ Malformed dataset at {root}: {e}")
        raise DatasetError(f"malformed dataset at {root}: {e}") from e
    logger.info(f"Loaded dataset {root}: {meta.frame_count} frames at {meta.width}x{meta.height}")
    return Dataset(root, meta, mesh)
