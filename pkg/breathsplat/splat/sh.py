import numpy as np
import torch

from breathsplat.globals import SH_C0, SH_C1


def sh_basis(view_dir: np.ndarray) -> np.ndarray:
    """Real first-order SH basis (Y00, Y1-1, Y10, Y11) for unit directions (..., 3)."""
    x, y, z = view_dir[..., 0], view_dir[..., 1], view_dir[..., 2]
    return np.stack([np.full_like(x, SH_C0), -SH_C1 * y, SH_C1 * z, -SH_C1 * x], axis=-1)


def evaluate_sh(sh: np.ndarray, view_dir: np.ndarray) -> np.ndarray:
    """View-dependent colour of one Gaussian.

    Args:
        sh: 12 coefficients, basis-major (4 basis functions x 3 channels).
        view_dir: Viewing direction; normalized here if it is not unit length.

    Returns:
        rgb triple in [0, 1].
    """
    sh = np.asarray(sh, dtype=np.float64).reshape(4, 3)
    d = np.asarray(view_dir, dtype=np.float64)
    d = d / np.linalg.norm(d)
    return np.clip(sh_basis(d) @ sh + 0.5, 0.0, 1.0)


def sh_to_rgb(sh: torch.Tensor, view_dirs: torch.Tensor) -> torch.Tensor:
    """Batched, differentiable `evaluate_sh`: sh (N, 4, 3), unit view_dirs (N, 3) -> (N, 3)."""
    x, y, z = view_dirs[:, 0], view_dirs[:, 1], view_dirs[:, 2]
    basis = torch.stack([torch.full_like(x, SH_C0), -SH_C1 * y, SH_C1 * z, -SH_C1 * x], dim=-1)
    return torch.clamp(torch.einsum("nb,nbc->nc", basis, sh) + 0.5, 0.0, 1.0)
