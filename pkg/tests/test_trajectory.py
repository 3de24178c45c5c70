import numpy as np
import pytest

from breathsplat.errors import TrajectoryTooShortError
from breathsplat.sim.airway import build_airway
from breathsplat.sim.trajectory import centerline_trajectory, ping_pong, select_leaf
from breathsplat.types.camera_types import Intrinsics
from breathsplat.types.config_types import AirwaySpec, DeformationSpec, TrajectorySpec


INTRINSICS = Intrinsics.from_fov(32, 32)


@pytest.fixture(scope="module")
def trachea_tree():
    return build_airway(AirwaySpec(tree_depth=0, ring_vertices=8), DeformationSpec())[1]


@pytest.fixture(scope="module")
def branching_tree():
    return build_airway(AirwaySpec(tree_depth=2, ring_vertices=8), DeformationSpec())[1]


def test_straight_tube_stations(trachea_tree):
    poses = centerline_trajectory(trachea_tree, TrajectorySpec(), INTRINSICS)
    assert len(poses) == 61
    arcs = np.array([p.arc for p in poses])
    assert np.allclose(np.diff(arcs), 2.0 / 3.0)
    for pose in poses:
        assert np.allclose(pose.camera.optical_axis, [0.0, 0.0, -1.0])
        assert np.allclose(pose.center[:2], 0.0)


def test_cameras_follow_the_centreline(branching_tree):
    poses = centerline_trajectory(branching_tree, TrajectorySpec(), INTRINSICS)
    for pose in poses:
        assert np.allclose(pose.camera.optical_axis, pose.tangent)
        assert abs(float(pose.up @ pose.tangent)) < 1e-9
    ups = np.array([p.up for p in poses])
    # parallel transport: no roll jumps beyond the branch angle
    assert np.all(np.einsum("ij,ij->i", ups[1:], ups[:-1]) > np.cos(np.radians(36.0)))


def test_shift_grows_along_the_path(trachea_tree):
    poses = centerline_trajectory(trachea_tree, TrajectorySpec(), INTRINSICS)
    assert not poses[0].shift.any()
    assert poses[-1].shift[2] == pytest.approx(8.0)


def test_same_seed_same_path(branching_tree):
    first = centerline_trajectory(branching_tree, TrajectorySpec(rng_seed=3), INTRINSICS)
    second = centerline_trajectory(branching_tree, TrajectorySpec(rng_seed=3), INTRINSICS)
    assert all(np.array_equal(a.camera.pose, b.camera.pose) for a, b in zip(first, second))
    assert select_leaf(branching_tree, 3) in branching_tree.leaves()


def test_path_shorter_than_a_step(trachea_tree):
    with pytest.raises(TrajectoryTooShortError):
        centerline_trajectory(trachea_tree, TrajectorySpec(speed=1000.0), INTRINSICS)


def test_ping_pong():
    assert ping_pong(3, 6).tolist() == [0, 1, 2, 1, 0, 1]
    assert ping_pong(1, 3).tolist() == [0, 0, 0]
    assert ping_pong(5, 4).tolist() == [0, 1, 2, 3]
