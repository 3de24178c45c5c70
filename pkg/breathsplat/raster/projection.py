"""EWA projection of 3-D Gaussians into the image plane."""

from typing import NamedTuple

import numpy as np
import torch

from breathsplat.globals import COV2D_FLOOR, FRUSTUM_CLAMP, NEAR_PLANE_MM
from breathsplat.types.camera_types import Camera


class ProjectedGaussian(NamedTuple):
    mean: np.ndarray
    cov: np.ndarray
    depth: float


class ProjectedBatch(NamedTuple):
    means: torch.Tensor
    covs: torch.Tensor
    depths: torch.Tensor
    visible: torch.Tensor


def frustum_limits(camera: Camera) -> tuple[float, float]:
    """Largest |x/z| and |y/z| the Jacobian is evaluated at."""
    return (
        FRUSTUM_CLAMP * 0.5 * camera.width / camera.fx,
        FRUSTUM_CLAMP * 0.5 * camera.height / camera.fy,
    )


def perspective_jacobian(cam_point: np.ndarray, fx: float, fy: float) -> np.ndarray:
    x, y, z = cam_point
    return np.array(
        [
            [fx / z, 0.0, -fx * x / z**2],
            [0.0, fy / z, -fy * y / z**2],
        ]
    )


def max_eigenvalue(covs: np.ndarray) -> np.ndarray:
    """Largest eigenvalue of each symmetric 2x2 matrix in (..., 2, 2)."""
    a, b, c = covs[..., 0, 0], covs[..., 0, 1], covs[..., 1, 1]
    mid = 0.5 * (a + c)
    return mid + np.sqrt(np.maximum(mid**2 - (a * c - b * b), 0.0))


def project_gaussian(
    mu: np.ndarray,
    cov: np.ndarray,
    camera: Camera,
    near: float = NEAR_PLANE_MM,
    cov2d_floor: float = COV2D_FLOOR,
) -> ProjectedGaussian | None:
    """Project one Gaussian; returns None when it lies at or behind the near plane.

    The Jacobian is linearised at the centre pulled back inside the frustum
    (|x/z| and |y/z| clamped), so splats beside the lens keep a bounded
    footprint. The projected mean itself is not clamped.
    """
    cam_point = camera.to_camera(np.asarray(mu, dtype=np.float64))
    x, y, z = cam_point
    if z <= near:
        return None
    lim_x, lim_y = frustum_limits(camera)
    clamped = np.array([np.clip(x / z, -lim_x, lim_x) * z, np.clip(y / z, -lim_y, lim_y) * z, z])
    jacobian = perspective_jacobian(clamped, camera.fx, camera.fy)
    m = jacobian @ camera.rotation
    cov2d = m @ cov @ m.T + cov2d_floor * np.eye(2)
    mean = np.array([camera.fx * x / z + camera.cx, camera.fy * y / z + camera.cy])
    return ProjectedGaussian(mean=mean, cov=cov2d, depth=float(z))


def project_gaussians(
    mu: torch.Tensor,
    cov: torch.Tensor,
    camera: Camera,
    near: float = NEAR_PLANE_MM,
    cov2d_floor: float = COV2D_FLOOR,
) -> ProjectedBatch:
    """Batched, differentiable `project_gaussian` for mu (N, 3) and cov (N, 3, 3)."""
    rotation = torch.as_tensor(camera.rotation, dtype=mu.dtype)
    translation = torch.as_tensor(camera.translation, dtype=mu.dtype)
    cam = mu @ rotation.T + translation
    x, y, z = cam[:, 0], cam[:, 1], cam[:, 2]
    visible = z > near
    z = torch.where(visible, z, torch.ones_like(z))
    lim_x, lim_y = frustum_limits(camera)
    tx = torch.clamp(x / z, -lim_x, lim_x) * z
    ty = torch.clamp(y / z, -lim_y, lim_y) * z
    zeros = torch.zeros_like(z)
    jacobian = torch.stack(
        [
            torch.stack([camera.fx / z, zeros, -camera.fx * tx / z**2], dim=-1),
            torch.stack([zeros, camera.fy / z, -camera.fy * ty / z**2], dim=-1),
        ],
        dim=-2,
    )
    m = jacobian @ rotation
    cov2d = m @ cov @ m.transpose(1, 2) + cov2d_floor * torch.eye(2, dtype=mu.dtype)
    means = torch.stack([camera.fx * x / z + camera.cx, camera.fy * y / z + camera.cy], dim=-1)
    return ProjectedBatch(means=means, covs=cov2d, depths=z, visible=visible)
