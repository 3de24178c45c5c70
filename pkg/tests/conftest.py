import numpy as np
import pytest

from breathsplat.sim.dataset import generate_dataset
from breathsplat.types.camera_types import Camera, Intrinsics, RasterSettings, look_at_pose
from breathsplat.types.config_types import (
    AirwaySpec,
    ReconstructConfig,
    Schedule,
    SimulateConfig,
    TrajectorySpec,
)
from breathsplat.types.mesh_types import BreathingMesh, TriMesh
from breathsplat.types.splat_types import GaussianCloud


def grid_mesh(n: int = 2, half_size: float = 8.0, z: float = 20.0) -> TriMesh:
    """Fronto-parallel n x n quad grid centred on the optical axis of an identity camera."""
    coords = np.linspace(-half_size, half_size, n + 1)
    xs, ys = np.meshgrid(coords, coords, indexing="xy")
    vertices = np.stack([xs.ravel(), ys.ravel(), np.full(xs.size, z)], axis=1)
    faces = []
    for row in range(n):
        for col in range(n):
            a = row * (n + 1) + col
            b, c, d = a + 1, a + n + 2, a + n + 1
            faces += [[a, b, c], [a, c, d]]
    return TriMesh(vertices=vertices, faces=faces)


@pytest.fixture
def smooth_raster() -> RasterSettings:
    """Cut-offs small enough that every pixel sees every Gaussian, so images are smooth in all inputs."""
    return RasterSettings(min_alpha=1e-12, min_transmittance=1e-12)


@pytest.fixture
def camera() -> Camera:
    """32x32 camera at the origin looking down +z."""
    return Camera.from_intrinsics(Intrinsics.from_fov(32, 32), np.eye(4))


@pytest.fixture
def wall_mesh() -> TriMesh:
    return grid_mesh()


@pytest.fixture
def random_scene(camera):
    """Factory for small seeded scenes: (cloud, vertices, faces, camera)."""

    def build(seed: int, count: int = 10):
        rng = np.random.default_rng(seed)
        mesh = grid_mesh(n=2)
        vertices = mesh.vertices + rng.uniform(-0.5, 0.5, mesh.vertices.shape) * [1.0, 1.0, 6.0]
        cloud = GaussianCloud(
            face_id=rng.integers(0, mesh.face_count, count),
            bary_logits=rng.uniform(-1.0, 1.0, (count, 3)),
            log_scales=np.log(rng.uniform(1.0, 3.0, (count, 2))),
            sh=rng.uniform(-0.3, 0.3, (count, 4, 3)),
            opacity=rng.uniform(0.3, 0.9, count),
            normal_scale=0.05,
        )
        return cloud, vertices, mesh.faces, camera

    return build


@pytest.fixture
def breathing_wall() -> BreathingMesh:
    """Tilted wall that moves toward the camera and shears sideways as it exhales."""
    flat = grid_mesh(n=2)
    vertices = flat.vertices.copy()
    vertices[:, 2] += 0.3 * vertices[:, 0] + 0.2 * vertices[:, 1]
    mesh = TriMesh(vertices=vertices, faces=flat.faces)
    rng = np.random.default_rng(7)
    delta = np.zeros_like(mesh.vertices)
    delta[:, 2] = -3.0
    delta[:, :2] = rng.uniform(-1.0, 1.0, (mesh.vertex_count, 2))
    return BreathingMesh(insp=mesh, delta=delta)


@pytest.fixture
def tube_camera() -> Camera:
    """Camera a few mm inside the trachea entrance, looking down the airway."""
    pose = look_at_pose(np.array([0.0, 0.0, -2.0]), np.array([0.0, 0.0, -1.0]), np.array([0.0, 1.0, 0.0]))
    return Camera.from_intrinsics(Intrinsics.from_fov(32, 32), pose)


@pytest.fixture(scope="session")
def tiny_sim_config() -> SimulateConfig:
    return SimulateConfig(
        airway=AirwaySpec(tree_depth=1, ring_vertices=8, rings_per_segment=4),
        trajectory=TrajectorySpec(frame_count=4),
        width=32,
        height=32,
    )


@pytest.fixture(scope="session")
def tiny_dataset(tmp_path_factory, tiny_sim_config):
    return generate_dataset(tiny_sim_config, tmp_path_factory.mktemp("dataset"))


@pytest.fixture
def quick_config() -> ReconstructConfig:
    return ReconstructConfig(
        schedule=Schedule(iters_phase_only=2, iters_appearance_only=2, iters_joint=2),
        gaussians_per_face=1.0,
        grid_size=5,
    )
