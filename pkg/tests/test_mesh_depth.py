import numpy as np
import pytest

from breathsplat.raster.mesh_depth import clip_near, render_mesh_depth


def quad(half: float, z: float) -> tuple[np.ndarray, np.ndarray]:
    vertices = np.array([[-half, -half, z], [half, -half, z], [half, half, z], [-half, half, z]])
    return vertices, np.array([[0, 1, 2], [0, 2, 3]])


def test_screen_filling_quad(camera):
    depth = render_mesh_depth(*quad(100.0, 50.0), camera)
    assert np.allclose(depth, 50.0)


def test_mesh_behind_camera_is_empty(camera):
    assert np.all(np.isinf(render_mesh_depth(*quad(100.0, -50.0), camera)))


def test_nearest_surface_wins(camera):
    near_v, near_f = quad(100.0, 30.0)
    far_v, far_f = quad(100.0, 60.0)
    vertices = np.concatenate([far_v, near_v])
    faces = np.concatenate([far_f, near_f + 4])
    assert np.allclose(render_mesh_depth(vertices, faces, camera), 30.0)


def test_partial_coverage_leaves_infinity(camera):
    depth = render_mesh_depth(*quad(5.0, 50.0), camera)
    assert np.isinf(depth[0, 0])
    assert depth[16, 16] == pytest.approx(50.0)


def test_perspective_correct_on_tilted_plane(camera):
    # plane z = 30 + 0.5 x
    xs = np.array([-60.0, 60.0])
    vertices = np.array([[x, y, 30.0 + 0.5 * x] for y in (-60.0, 60.0) for x in xs])
    faces = np.array([[0, 1, 3], [0, 3, 2]])
    depth = render_mesh_depth(vertices, faces, camera)
    u = (np.arange(32) - camera.cx) / camera.fx
    expected = 30.0 / (1.0 - 0.5 * u)
    hit = np.isfinite(depth)
    assert hit.mean() > 0.9
    assert np.allclose(depth[hit], np.broadcast_to(expected, depth.shape)[hit], rtol=1e-9)


def test_clip_near_splits_crossing_triangle():
    tris = np.array([[[0.0, 0.0, -1.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0]]])
    clipped = clip_near(tris, near=0.1)
    assert len(clipped) == 2
    assert np.all(clipped[:, :, 2] >= 0.1 - 1e-12)


def test_clip_near_drops_hidden_and_keeps_visible():
    behind = [[0.0, 0.0, -1.0], [1.0, 0.0, -1.0], [0.0, 1.0, -1.0]]
    front = [[0.0, 0.0, 2.0], [1.0, 0.0, 2.0], [0.0, 1.0, 2.0]]
    clipped = clip_near(np.array([behind, front]), near=0.1)
    assert np.array_equal(clipped, np.array([front]))
