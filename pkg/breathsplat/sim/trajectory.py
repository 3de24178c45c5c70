import math

import numpy as np
from scipy.spatial.transform import Rotation

from breathsplat.errors import TrajectoryTooShortError
from breathsplat.types.camera_types import Camera, Intrinsics, look_at_pose
from breathsplat.types.config_types import TrajectorySpec
from breathsplat.types.sim_types import CenterlineTree, TrajectoryPose
from breathsplat.utils.logger import logger


def select_leaf(tree: CenterlineTree, seed: int) -> int:
    leaves = sorted(tree.leaves())
    return leaves[int(np.random.default_rng(seed).integers(len(leaves)))]


def _initial_up(tangent: np.ndarray) -> np.ndarray:
    helper = np.array([0.0, 1.0, 0.0]) if abs(tangent[1]) < 0.9 else np.array([1.0, 0.0, 0.0])
    up = helper - np.dot(helper, tangent) * tangent
    return up / np.linalg.norm(up)


def transport(up: np.ndarray, t_from: np.ndarray, t_to: np.ndarray) -> np.ndarray:
    """Carry `up` along with the minimal rotation taking t_from onto t_to."""
    axis = np.cross(t_from, t_to)
    sin = np.linalg.norm(axis)
    if sin < 1e-12:
        return up
    angle = math.atan2(sin, float(np.dot(t_from, t_to)))
    moved = Rotation.from_rotvec(axis / sin * angle).apply(up)
    moved = moved - np.dot(moved, t_to) * t_to
    return moved / np.linalg.norm(moved)


def centerline_trajectory(
    tree: CenterlineTree, tspec: TrajectorySpec, intrinsics: Intrinsics
) -> list[TrajectoryPose]:
    """Camera stations from the trachea entrance toward a seeded leaf, speed/fps mm apart in arc length.

    The optical axis follows the local centreline tangent and the up vector is
    parallel-transported, so there is no roll discontinuity at junctions.

    Raises:
        TrajectoryTooShortError: If the path is shorter than one step.
    """
    leaf = select_leaf(tree, tspec.rng_seed)
    points, arcs, shift = tree.path(leaf)
    length = float(arcs[-1] - arcs[0])
    step = tspec.speed / tspec.fps
    if length < step:
        raise TrajectoryTooShortError(f"path of {length:.2f} mm is shorter than one {step:.3f} mm step")

    count = math.floor(length * tspec.fps / tspec.speed) + 1
    stations = arcs[0] + np.arange(count) * step
    segment_tangents = np.diff(points, axis=0)
    segment_tangents /= np.linalg.norm(segment_tangents, axis=1, keepdims=True)
    segment = np.clip(np.searchsorted(arcs, stations, side="right") - 1, 0, len(segment_tangents) - 1)

    poses = []
    up = _initial_up(segment_tangents[0])
    previous = segment_tangents[0]
    for station, seg in zip(stations, segment):
        tangent = segment_tangents[seg]
        up = transport(up, previous, tangent)
        previous = tangent
        center = np.array([np.interp(station, arcs, points[:, axis]) for axis in range(3)])
        station_shift = np.array([np.interp(station, arcs, shift[:, axis]) for axis in range(3)])
        camera = Camera.from_intrinsics(intrinsics, look_at_pose(center, tangent, up))
        poses.append(
            TrajectoryPose(camera=camera, arc=float(station), tangent=tangent, up=up, shift=station_shift)
        )
    logger.info(f"Trajectory to leaf {leaf}: {len(poses)} stations over {length:.1f} mm")
    return poses


def ping_pong(station_count: int, frame_count: int) -> np.ndarray:
    """Station index per frame when the scope is inserted, retracted, inserted again, ..."""
    frames = np.arange(frame_count)
    if station_count == 1:
        return np.zeros(frame_count, dtype=np.int64)
    period = 2 * (station_count - 1)
    phase = frames % period
    return np.where(phase < station_count, phase, period - phase).astype(np.int64)
