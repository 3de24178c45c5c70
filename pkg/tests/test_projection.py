import numpy as np
import pytest
import torch

from breathsplat.raster.projection import project_gaussian, project_gaussians


def test_on_axis_covariance(camera):
    s, z = 2.0, 20.0
    projected = project_gaussian(np.array([0.0, 0.0, z]), np.diag([s**2, s**2, 1e-4]), camera)
    assert np.allclose(projected.mean, [camera.cx, camera.cy])
    expected = np.diag([(camera.fx * s / z) ** 2 + 0.3, (camera.fy * s / z) ** 2 + 0.3])
    assert np.allclose(projected.cov, expected)
    assert projected.depth == z


def test_behind_camera_is_culled(camera):
    assert project_gaussian(np.array([0.0, 0.0, -5.0]), np.eye(3), camera) is None
    assert project_gaussian(np.array([0.0, 0.0, 0.05]), np.eye(3), camera) is None


def test_doubling_depth_halves_the_spread(camera):
    cov = np.diag([4.0, 4.0, 1e-4])
    near = project_gaussian(np.array([0.0, 0.0, 20.0]), cov, camera, cov2d_floor=0.0)
    far = project_gaussian(np.array([0.0, 0.0, 40.0]), cov, camera, cov2d_floor=0.0)
    assert np.sqrt(far.cov[0, 0]) == pytest.approx(0.5 * np.sqrt(near.cov[0, 0]))


def test_batched_matches_single(camera):
    rng = np.random.default_rng(0)
    mu = rng.uniform([-5, -5, 10], [5, 5, 30], size=(6, 3))
    a = rng.normal(size=(6, 3, 3))
    cov = a @ a.transpose(0, 2, 1)
    batch = project_gaussians(torch.from_numpy(mu), torch.from_numpy(cov), camera)
    assert bool(batch.visible.all())
    for k in range(6):
        single = project_gaussian(mu[k], cov[k], camera)
        assert np.allclose(batch.means[k].numpy(), single.mean)
        assert np.allclose(batch.covs[k].numpy(), single.cov)
        assert batch.depths[k].item() == pytest.approx(single.depth)


def test_jacobian_is_clamped_to_the_frustum(camera):
    mu, z = np.array([10.0, 0.0, 2.0]), 2.0
    projected = project_gaussian(mu, np.eye(3), camera, cov2d_floor=0.0)
    tx = 1.3 * (camera.width / 2) / camera.fx * z
    assert projected.cov[0, 0] == pytest.approx((camera.fx / z) ** 2 + (camera.fx * tx / z**2) ** 2)
    assert projected.mean[0] == pytest.approx(camera.fx * 10.0 / z + camera.cx)

    batch = project_gaussians(torch.from_numpy(mu[None]), torch.eye(3, dtype=torch.float64)[None], camera, cov2d_floor=0.0)
    assert np.allclose(batch.covs[0].numpy(), projected.cov)
