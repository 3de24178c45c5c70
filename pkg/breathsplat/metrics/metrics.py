import math

import numpy as np
import torch
from scipy.stats import pearsonr

from breathsplat.errors import LengthError, NoOverlapError, ShapeError, UndefinedCorrelationError
from breathsplat.globals import PSNR_CAP_DB
from breathsplat.optim.losses import ssim


def _same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"shapes differ: {a.shape} vs {b.shape}")


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """PSNR in dB for images in [0, 1]; capped at 99 dB."""
    a, b = np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)
    _same_shape(a, b)
    mse = float(np.mean((a - b) ** 2))
    if mse < 1e-12:
        return PSNR_CAP_DB
    return min(PSNR_CAP_DB, 10.0 * math.log10(1.0 / mse))


def ssim_eval(a: np.ndarray, b: np.ndarray) -> float:
    """SSIM of the channel-mean grey images.

    Raises:
        SizeError: If the images are smaller than the 11x11 window.
    """
    a, b = np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)
    _same_shape(a, b)
    grey_a = a.mean(axis=-1) if a.ndim == 3 else a
    grey_b = b.mean(axis=-1) if b.ndim == 3 else b
    with torch.no_grad():
        value = ssim(torch.from_numpy(grey_a[..., None]), torch.from_numpy(grey_b[..., None]))
    return float(value)


def _depth_mask(pred: np.ndarray, gt: np.ndarray) -> np.ndarray:
    _same_shape(pred, gt)
    mask = np.isfinite(pred) & np.isfinite(gt) & (pred > 0) & (gt > 0)
    if not mask.any():
        raise NoOverlapError("no pixel has valid depth in both images")
    return mask


def depth_rmse(pred: np.ndarray, gt: np.ndarray) -> float:
    """RMSE over pixels finite and positive in both maps.

    Raises:
        NoOverlapError: If no such pixel exists.
    """
    pred, gt = np.asarray(pred, dtype=np.float64), np.asarray(gt, dtype=np.float64)
    mask = _depth_mask(pred, gt)
    return float(np.sqrt(np.mean((pred[mask] - gt[mask]) ** 2)))


def delta_ratio(pred: np.ndarray, gt: np.ndarray, threshold: float = 1.25) -> float:
    """Fraction of valid pixels with max(pred/gt, gt/pred) < threshold."""
    pred, gt = np.asarray(pred, dtype=np.float64), np.asarray(gt, dtype=np.float64)
    mask = _depth_mask(pred, gt)
    ratio = np.maximum(pred[mask] / gt[mask], gt[mask] / pred[mask])
    return float(np.mean(ratio < threshold))


def phase_mae(pred, gt) -> float:
    pred, gt = np.asarray(pred, dtype=np.float64), np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape or len(pred) == 0:
        raise LengthError(f"phase sequences of length {len(pred)} and {len(gt)}")
    return float(np.mean(np.abs(pred - gt)))


def pearson_r(pred, gt) -> float:
    """Sample Pearson correlation of two phase sequences.

    Raises:
        LengthError: On unequal lengths or fewer than two samples.
        UndefinedCorrelationError: If either sequence is constant.
    """
    pred, gt = np.asarray(pred, dtype=np.float64), np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape or len(pred) < 2:
        raise LengthError(f"need two equal-length sequences of at least 2, got {len(pred)} and {len(gt)}")
    if np.ptp(pred) == 0 or np.ptp(gt) == 0:
        raise UndefinedCorrelationError("correlation is undefined for a constant sequence")
    return float(np.clip(pearsonr(pred, gt).statistic, -1.0, 1.0))
