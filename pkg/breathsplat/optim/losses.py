import numpy as np
import torch
import torch.nn.functional as F

from breathsplat.errors import ShapeError, SizeError
from breathsplat.globals import SSIM_C1, SSIM_C2, SSIM_SIGMA, SSIM_WINDOW
from breathsplat.types.config_types import LossWeights


def gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> torch.Tensor:
    coords = torch.arange(size, dtype=torch.float64) - (size - 1) / 2.0
    g = torch.exp(-(coords**2) / (2.0 * sigma**2))
    g = g / g.sum()
    return torch.outer(g, g)[None, None]


def ssim(a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
    """Mean SSIM of two (H, W, C) images over every full 11x11 window and channel.

    Raises:
        SizeError: If the image is smaller than the window.
    """
    height, width = a.shape[:2]
    if height < SSIM_WINDOW or width < SSIM_WINDOW:
        raise SizeError(f"image {height}x{width} smaller than the {SSIM_WINDOW}px SSIM window")
    window = gaussian_window().to(a.dtype)
    x = a.permute(2, 0, 1)[:, None]
    y = b.permute(2, 0, 1)[:, None]
    mu_x, mu_y = F.conv2d(x, window), F.conv2d(y, window)
    var_x = F.conv2d(x * x, window) - mu_x**2
    var_y = F.conv2d(y * y, window) - mu_y**2
    cov_xy = F.conv2d(x * y, window) - mu_x * mu_y
    numerator = (2.0 * mu_x * mu_y + SSIM_C1) * (2.0 * cov_xy + SSIM_C2)
    denominator = (mu_x**2 + mu_y**2 + SSIM_C1) * (var_x + var_y + SSIM_C2)
    return (numerator / denominator).mean()


def photometric_loss_tensor(
    rendered: torch.Tensor, target: torch.Tensor, weights: LossWeights
) -> torch.Tensor:
    l1 = torch.abs(rendered - target).mean()
    value = (1.0 - weights.w_s) * l1
    if weights.w_s > 0:
        value = value + weights.w_s * (1.0 - ssim(rendered, target))
    return weights.w_c * value


def photometric_loss(
    rendered: np.ndarray, target: np.ndarray, weights: LossWeights
) -> tuple[float, np.ndarray]:
    """w_c[(1-w_s)·L1 + w_s·(1-SSIM)] and its gradient with respect to `rendered`.

    Raises:
        ShapeError: If the images differ in shape.
    """
    rendered, target = np.asarray(rendered), np.asarray(target)
    if rendered.shape != target.shape:
        raise ShapeError(f"rendered {rendered.shape} and target {target.shape} differ")
    x = torch.tensor(rendered, dtype=torch.float64, requires_grad=True)
    y = torch.tensor(target, dtype=torch.float64)
    with torch.enable_grad():
        value = photometric_loss_tensor(x, y, weights)
        (grad,) = torch.autograd.grad(value, x)
    return float(value), grad.numpy()


def temporal_loss(alpha_t: float, alpha_prev: float | None, w_t: float) -> tuple[float, float]:
    """w_t(α̂_t - α̂_prev)² and its derivative in α̂_t; zero for the first frame."""
    if alpha_prev is None:
        return 0.0, 0.0
    diff = alpha_t - alpha_prev
    return w_t * diff * diff, 2.0 * w_t * diff
