import numpy as np

from breathsplat.errors import DomainError, InsufficientDepthError, ShapeError
from breathsplat.geometry.mesh import deform_mesh
from breathsplat.globals import PHASE_EPSILON
from breathsplat.optim.activation import inverse_activation
from breathsplat.raster.mesh_depth import render_mesh_depth
from breathsplat.types.camera_types import Camera
from breathsplat.types.mesh_types import BreathingMesh
from breathsplat.utils.logger import logger


def depth_grid_errors(
    bm: BreathingMesh, camera: Camera, depth_gt: np.ndarray, grid_size: int
) -> tuple[np.ndarray, np.ndarray]:
    """Depth RMSE of the mesh at each grid phase i/(grid_size-1); inf where nothing overlaps."""
    alphas = np.arange(grid_size) / (grid_size - 1)
    errors = np.full(grid_size, np.inf)
    gt_valid = np.isfinite(depth_gt)
    for i, alpha in enumerate(alphas):
        depth = render_mesh_depth(deform_mesh(bm, float(alpha)), bm.faces, camera)
        valid = gt_valid & np.isfinite(depth)
        if valid.any():
            errors[i] = np.sqrt(np.mean((depth[valid] - depth_gt[valid]) ** 2))
    return alphas, errors


def init_first_frame_phase(
    bm: BreathingMesh,
    camera: Camera,
    depth_gt: np.ndarray,
    grid_size: int = 33,
    epsilon: float = PHASE_EPSILON,
) -> float:
    """θ of the grid phase whose mesh depth best matches `depth_gt`; ties go to the smaller phase.

    Raises:
        ShapeError: If depth_gt does not match the camera resolution.
        DomainError: If grid_size < 2.
        InsufficientDepthError: If no grid phase shares a finite pixel with depth_gt.
    """
    depth_gt = np.asarray(depth_gt, dtype=np.float64)
    if depth_gt.shape != (camera.height, camera.width):
        raise ShapeError(f"depth {depth_gt.shape} does not match camera {(camera.height, camera.width)}")
    if grid_size < 2:
        raise DomainError(f"grid_size must be at least 2, got {grid_size}")

    alphas, errors = depth_grid_errors(bm, camera, depth_gt, grid_size)
    if not np.isfinite(errors).any():
        raise InsufficientDepthError("no pixel is finite in both the mesh and ground-truth depth")
    best = int(np.argmin(errors))  # first minimum, i.e. the smaller phase
    logger.info(f"🚀 Frame 0 phase from depth grid search: {alphas[best]:.4f} (rmse {errors[best]:.3f} mm)")
    return inverse_activation(float(alphas[best]), epsilon)
