import time

import numpy as np
import pytest

from breathsplat.errors import AnchoringError, DegenerateFaceError, ShapeError
from breathsplat.raster.mesh_depth import render_mesh_depth
from breathsplat.raster.rasterizer import render, render_backward, render_reference
from breathsplat.sim.airway import build_airway
from breathsplat.sim.trajectory import centerline_trajectory
from breathsplat.splat.gaussians import density_for, seed_gaussians
from breathsplat.types.camera_types import Camera, Intrinsics, RasterSettings
from breathsplat.types.config_types import AirwaySpec, DeformationSpec, TrajectorySpec
from breathsplat.types.splat_types import GaussianCloud


H = 1e-4
CENTERED_FACE = np.array([[-3.0, -3.0, 20.0], [6.0, -3.0, 20.0], [-3.0, 6.0, 20.0]])


def centered_cloud(opacities) -> GaussianCloud:
    n = len(opacities)
    return GaussianCloud(
        face_id=np.zeros(n),
        bary_logits=np.zeros((n, 3)),
        log_scales=np.zeros((n, 2)),
        sh=np.zeros((n, 4, 3)),
        opacity=opacities,
        normal_scale=0.01,
    )


def weighted_image_sum(cloud, vertices, faces, camera, weights, settings) -> float:
    return float(np.sum(render(cloud, vertices, faces, camera, settings).rgb * weights))


def assert_matches_fd(analytic: float, numeric: float):
    if abs(numeric) < 1e-6 and abs(analytic) < 1e-6:
        return
    assert abs(analytic - numeric) <= 1e-3 * max(abs(analytic), abs(numeric)) or abs(analytic - numeric) < 1e-6


def test_empty_cloud_is_black(camera, wall_mesh):
    out = render(GaussianCloud.empty(0.01), wall_mesh.vertices, wall_mesh.faces, camera)
    assert out.rgb.shape == (32, 32, 3)
    assert not out.rgb.any() and not out.alpha.any() and not out.depth.any()


def test_single_centered_gaussian(camera):
    out = render(centered_cloud([0.8]), CENTERED_FACE, [[0, 1, 2]], camera)
    assert out.alpha[16, 16] == pytest.approx(0.8)
    assert np.allclose(out.rgb[16, 16], 0.4)
    assert out.depth[16, 16] == pytest.approx(20.0)


def test_coincident_gaussians_composite(camera):
    out = render(centered_cloud([0.5, 0.5]), CENTERED_FACE, [[0, 1, 2]], camera)
    assert out.alpha[16, 16] == pytest.approx(0.75)


def test_anchoring_mismatch(camera):
    cloud = centered_cloud([0.5]).model_copy(update={"face_id": np.array([3])})
    with pytest.raises(AnchoringError):
        render(cloud, CENTERED_FACE, [[0, 1, 2]], camera)


@pytest.mark.parametrize("seed", range(20))
def test_tiled_render_matches_brute_force(random_scene, seed):
    cloud, vertices, faces, camera = random_scene(seed, count=32)
    tiled = render(cloud, vertices, faces, camera)
    reference = render_reference(cloud, vertices, faces, camera)
    assert np.abs(tiled.rgb - reference.rgb).max() < 1e-6
    assert np.abs(tiled.alpha - reference.alpha).max() < 1e-6
    assert np.abs(tiled.depth - reference.depth).max() < 1e-6


@pytest.mark.parametrize("seed", range(5))
def test_energy_bound(random_scene, seed):
    cloud, vertices, faces, camera = random_scene(seed, count=32)
    out = render(cloud, vertices, faces, camera)
    assert out.alpha.max() <= 1.0 + 1e-12
    assert np.all(out.rgb <= out.alpha[..., None] + 1e-12)
    assert np.all(out.rgb >= 0) and np.all(out.depth >= 0)


def test_repeated_render_is_bitwise_identical(random_scene):
    cloud, vertices, faces, camera = random_scene(0, count=32)
    a, b = render(cloud, vertices, faces, camera), render(cloud, vertices, faces, camera)
    assert np.array_equal(a.rgb, b.rgb) and np.array_equal(a.depth, b.depth)


def test_chunking_does_not_change_the_image(random_scene):
    cloud, vertices, faces, camera = random_scene(1, count=32)
    one = render(cloud, vertices, faces, camera, RasterSettings(chunk_size=1))
    many = render(cloud, vertices, faces, camera, RasterSettings(chunk_size=64, tile_size=8))
    assert np.allclose(one.rgb, many.rgb, atol=1e-12)
    assert np.allclose(one.depth, many.depth, atol=1e-12)


def test_splat_at_the_lens_is_culled(camera):
    face = CENTERED_FACE.copy()
    face[:, 2] = 0.5
    cloud = centered_cloud([0.8])
    assert not render(cloud, face, [[0, 1, 2]], camera).alpha.any()
    assert not render_reference(cloud, face, [[0, 1, 2]], camera).alpha.any()
    wide = RasterSettings(max_extent=10.0)
    assert render(cloud, face, [[0, 1, 2]], camera, wide).alpha[16, 16] > 0.5


def test_degenerate_anchor_face(camera):
    collinear = np.array([[0.0, 0.0, 20.0], [1.0, 0.0, 20.0], [2.0, 0.0, 20.0]])
    with pytest.raises(DegenerateFaceError):
        render(centered_cloud([0.5]), collinear, [[0, 1, 2]], camera)


def test_zero_loss_gradient(random_scene):
    cloud, vertices, faces, camera = random_scene(2)
    grads = render_backward(cloud, vertices, faces, camera, np.zeros((32, 32, 3)))
    for block in (grads.bary_logits, grads.log_scales, grads.sh, grads.vertices):
        assert not block.any()
    assert grads.sh.shape == cloud.sh.shape
    assert grads.vertices.shape == vertices.shape


def test_gradient_shape_mismatch(random_scene):
    cloud, vertices, faces, camera = random_scene(2)
    with pytest.raises(ShapeError):
        render_backward(cloud, vertices, faces, camera, np.zeros((16, 16, 3)))


@pytest.mark.parametrize("seed", range(20))
def test_gradients_match_finite_differences(random_scene, smooth_raster, seed):
    cloud, vertices, faces, camera = random_scene(seed)
    rng = np.random.default_rng(1000 + seed)
    weights = rng.normal(size=(32, 32, 3))
    grads = render_backward(cloud, vertices, faces, camera, weights, smooth_raster)

    def loss(c=cloud, v=vertices):
        return weighted_image_sum(c, v, faces, camera, weights, smooth_raster)

    for name in ("bary_logits", "log_scales", "sh"):
        block = getattr(cloud, name)
        for flat in rng.choice(block.size, size=min(8, block.size), replace=False):
            index = np.unravel_index(flat, block.shape)
            plus, minus = block.copy(), block.copy()
            plus[index] += H
            minus[index] -= H
            numeric = (loss(c=cloud.model_copy(update={name: plus})) - loss(c=cloud.model_copy(update={name: minus}))) / (2 * H)
            assert_matches_fd(getattr(grads, name)[index], numeric)

    for flat in rng.choice(vertices.size, size=8, replace=False):
        index = np.unravel_index(flat, vertices.shape)
        plus, minus = vertices.copy(), vertices.copy()
        plus[index] += H
        minus[index] -= H
        assert_matches_fd(grads.vertices[index], (loss(v=plus) - loss(v=minus)) / (2 * H))


def test_rigid_translation_keeps_appearance_gradients(random_scene):
    cloud, vertices, faces, camera = random_scene(4)
    weights = np.random.default_rng(4).normal(size=(32, 32, 3))
    offset = np.array([5.0, -3.0, 12.0])
    pose = camera.pose.copy()
    pose[:3, 3] -= camera.rotation @ offset
    moved = Camera.from_intrinsics(camera.intrinsics, pose)
    a = render_backward(cloud, vertices, faces, camera, weights)
    b = render_backward(cloud, vertices + offset, faces, moved, weights)
    assert np.allclose(a.log_scales, b.log_scales, atol=1e-9)
    assert np.allclose(a.sh, b.sh, atol=1e-9)


def test_splat_depth_follows_the_airway_wall(tube_camera):
    bm, _ = build_airway(AirwaySpec(tree_depth=0, ring_vertices=12), DeformationSpec())
    mesh = bm.insp
    cloud = seed_gaussians(mesh, density_for(mesh, 3.0), rng_seed=0)
    out = render(cloud, mesh.vertices, mesh.faces, tube_camera)
    wall = render_mesh_depth(mesh.vertices, mesh.faces, tube_camera)

    # the far opening of the tube stays clear
    assert np.isinf(wall[16, 16])
    assert out.alpha[16, 16] < 0.5

    seen = np.isfinite(wall) & (out.alpha > 0.9)
    assert seen.mean() > 0.5
    relative = np.abs(out.depth[seen] - wall[seen]) / wall[seen]
    assert np.median(relative) < 0.2


@pytest.mark.slow
def test_default_scene_iteration_time():
    bm, tree = build_airway(AirwaySpec(), DeformationSpec())
    camera = centerline_trajectory(tree, TrajectorySpec(), Intrinsics.from_fov(128, 128))[0].camera
    cloud = seed_gaussians(bm.insp, density_for(bm.insp, 3.0), rng_seed=0)
    weights = np.random.default_rng(0).normal(size=(128, 128, 3))

    start = time.perf_counter()
    render_backward(cloud, bm.insp.vertices, bm.faces, camera, weights)
    assert time.perf_counter() - start < 2.0
