import csv
from pathlib import Path

import numpy as np

from breathsplat.errors import CoverageError, NoOverlapError, UndefinedCorrelationError
from breathsplat.geometry.mesh import deform_mesh
from breathsplat.geometry.slicing import contour_rmse, slice_mesh_plane, target_displacement
from breathsplat.globals import PER_FRAME_CSV, REPORT_FILE
from breathsplat.metrics.metrics import delta_ratio, depth_rmse, pearson_r, phase_mae, psnr, ssim_eval
from breathsplat.optim.run_io import load_phases, load_timing, render_paths
from breathsplat.raster.image_io import read_depth, read_ppm
from breathsplat.sim.dataset import Dataset
from breathsplat.types.camera_types import Camera
from breathsplat.types.report_types import EvalReport, FrameMetrics
from breathsplat.utils.logger import logger


def slice_plane(camera: Camera, slice_offset: float = 0.0) -> tuple[np.ndarray, float]:
    """Plane through the camera centre (moved `slice_offset` mm along the view) normal to the optical axis."""
    normal = camera.optical_axis
    return normal, float(normal @ camera.center) + slice_offset


def _valid_mean(values: list[float]) -> float | None:
    values = np.asarray(values)
    values = values[np.isfinite(values)]
    return float(values.mean()) if len(values) else None


def _check_coverage(dataset: Dataset, run_dir: Path, predicted: np.ndarray) -> None:
    if len(predicted) != len(dataset):
        raise CoverageError(f"run has {len(predicted)} phases for {len(dataset)} frames")
    for index in range(len(dataset)):
        for path in render_paths(run_dir, index):
            if not path.exists():
                raise CoverageError(f"frame {index}: missing {path.name}")


def evaluate_run(
    dataset: Dataset, run_dir: Path, out_dir: Path | None = None, slice_offset: float = 0.0
) -> tuple[EvalReport, list[FrameMetrics]]:
    """Score a reconstruction run against its dataset and write report.json and per_frame.csv.

    Frame metrics are averaged in frame order. Contour and target errors
    compare the dataset mesh at the true and at the recovered final phase,
    sliced by the final camera's plane; they are None when the slices share
    no edge. Pearson r is None when either phase sequence is constant.

    Raises:
        CoverageError: If a frame's phase or render is missing.
    """
    run_dir = Path(run_dir)
    track = load_phases(run_dir)
    predicted = track.alphas
    _check_coverage(dataset, run_dir, predicted)
    truth = dataset.phases

    frames = []
    for index in range(len(dataset)):
        rgb_path, depth_path = render_paths(run_dir, index)
        rgb_gt, depth_gt = dataset.frame_rgb(index), dataset.frame_depth(index)
        rgb = read_ppm(rgb_path)
        depth = read_depth(depth_path, dataset.meta.width, dataset.meta.height)
        try:
            d_rmse, d_ratio = depth_rmse(depth, depth_gt), delta_ratio(depth, depth_gt)
        except NoOverlapError:
            logger.warning(f"⚠️ Frame {index}: no overlapping depth, depth metrics skipped")
            d_rmse, d_ratio = float("nan"), float("nan")
        frames.append(
            FrameMetrics(
                frame=index,
                psnr=psnr(rgb, rgb_gt),
                ssim=ssim_eval(rgb, rgb_gt),
                depth_rmse=d_rmse,
                delta=d_ratio,
                alpha_gt=float(truth[index]),
                alpha_pred=float(predicted[index]),
            )
        )

    try:
        r = pearson_r(predicted, truth)
    except UndefinedCorrelationError:
        logger.warning("⚠️ Constant phase sequence, Pearson r undefined")
        r = None

    last = len(dataset) - 1
    camera = dataset.camera(last)
    plane = slice_plane(camera, slice_offset)
    bm = dataset.mesh
    gt_contour = slice_mesh_plane(deform_mesh(bm, float(truth[last])), bm.faces, plane)
    pred_contour = slice_mesh_plane(deform_mesh(bm, float(predicted[last])), bm.faces, plane)
    try:
        match = contour_rmse(gt_contour, pred_contour)
        contour, matched_fraction = match.rmse, match.matched_fraction
        target = target_displacement(gt_contour, pred_contour, camera)
    except NoOverlapError:
        logger.warning("⚠️ Final-frame contours share no edge, contour metrics skipped")
        contour, matched_fraction, target = None, 0.0, None

    timing = load_timing(run_dir)
    report = EvalReport(
        psnr=float(np.mean([f.psnr for f in frames])),
        ssim=float(np.mean([f.ssim for f in frames])),
        depth_rmse=_valid_mean([f.depth_rmse for f in frames]),
        delta_125=_valid_mean([f.delta for f in frames]),
        phase_mae=phase_mae(predicted, truth),
        pearson_r=r,
        contour_rmse=contour,
        contour_matched_fraction=matched_fraction,
        target_error=target,
        total_time=timing.total_seconds if timing else None,
        seconds_per_frame=timing.seconds_per_frame if timing else None,
        frame_count=len(frames),
    )

    out_dir = Path(out_dir) if out_dir is not None else run_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / REPORT_FILE, "w", encoding="utf-8") as f:
        f.write(report.model_dump_json(indent=2))
    write_per_frame_csv(out_dir / PER_FRAME_CSV, frames)
    logger.info(f"✅ Evaluated {len(frames)} frames, report written to {out_dir / REPORT_FILE}")
    return report, frames


def write_per_frame_csv(file_path: Path, frames: list[FrameMetrics]) -> Path:
    columns = list(FrameMetrics.model_fields)
    with open(file_path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(columns)
        for frame in frames:
            writer.writerow([getattr(frame, name) for name in columns])
    return Path(file_path)


REPORT_ROWS = [
    ("Rendering", "PSNR (dB)", "psnr"),
    ("Rendering", "SSIM", "ssim"),
    ("Depth", "RMSE (mm)", "depth_rmse"),
    ("Depth", "delta<1.25", "delta_125"),
    ("Breathing", "MAE", "phase_mae"),
    ("Breathing", "Pearson r", "pearson_r"),
    ("Target", "Contour RMSE (mm)", "contour_rmse"),
    ("Target", "Matched edges", "contour_matched_fraction"),
    ("Target", "Target error (mm)", "target_error"),
    ("Runtime", "Total (s)", "total_time"),
    ("Runtime", "s/frame", "seconds_per_frame"),
]


def format_report(report: EvalReport) -> str:
    """Aligned plain-text table, one metric per row, grouped like the report sections."""
    rows = []
    for group, label, field in REPORT_ROWS:
        value = getattr(report, field)
        rows.append((group, label, "n/a" if value is None else f"{value:.4f}"))
    widths = [max(len(row[i]) for row in rows) for i in range(3)]
    lines = [
        f"{group:<{widths[0]}}  {label:<{widths[1]}}  {value:>{widths[2]}}"
        for group, label, value in rows
    ]
    rule = "-" * len(lines[0])
    return "\n".join([f"Evaluation over {report.frame_count} frames", rule, *lines, rule])
