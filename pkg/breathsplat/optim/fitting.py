"""Per-frame breathing phase and appearance fitting.

Each frame t>0 runs three stages: phase only (appearance frozen), appearance
only (phase frozen) and joint. Frame 0 gets its phase from a depth grid
search and then fits appearance with the phase frozen.
"""

import time
from typing import NamedTuple

import numpy as np
import torch
from tqdm import tqdm

from breathsplat.geometry.mesh import deform_mesh
from breathsplat.globals import PHASE_EPSILON
from breathsplat.optim.activation import activation, inverse_activation
from breathsplat.optim.adam import adam_step, appearance_optimizer, phase_gradient, phase_optimizer
from breathsplat.optim.grid_search import init_first_frame_phase
from breathsplat.optim.losses import photometric_loss_tensor, temporal_loss
from breathsplat.raster.rasterizer import (
    DTYPE,
    check_anchoring,
    cloud_tensors,
    render,
    render_tensors,
    to_tensor,
)
from breathsplat.sim.dataset import Dataset
from breathsplat.splat.gaussians import density_for, seed_gaussians
from breathsplat.types.camera_types import Camera, RasterSettings, RenderOutput
from breathsplat.types.config_types import LossWeights, ReconstructConfig, Schedule
from breathsplat.types.mesh_types import BreathingMesh
from breathsplat.types.phase_types import PhaseParam, PhaseTrack
from breathsplat.types.report_types import TimingRecord
from breathsplat.types.splat_types import GaussianCloud
from breathsplat.utils.logger import logger


class AppearanceState:
    """Learnable Gaussian parameters and their optimizer, carried across frames."""

    def __init__(self, cloud: GaussianCloud, schedule: Schedule):
        self.template = cloud
        self.params = cloud_tensors(cloud, requires_grad=True)
        self.optimizer = appearance_optimizer(
            self.params.bary_logits, self.params.log_scales, self.params.sh, schedule
        )

    @property
    def blocks(self) -> list[torch.Tensor]:
        return [self.params.bary_logits, self.params.log_scales, self.params.sh]

    def to_cloud(self) -> GaussianCloud:
        return self.template.with_appearance(
            *(block.detach().numpy().copy() for block in self.blocks)
        )


class FrameFit(NamedTuple):
    phase: PhaseParam
    losses: list[float]


class SequenceFit(NamedTuple):
    track: PhaseTrack
    cloud: GaussianCloud
    timing: TimingRecord


class _FrameProblem:
    """Everything one frame's iterations share."""

    def __init__(
        self,
        appearance: AppearanceState,
        bm: BreathingMesh,
        camera: Camera,
        frame_rgb: np.ndarray,
        prev_alpha: float | None,
        weights: LossWeights,
        raster: RasterSettings | None,
        epsilon: float,
    ):
        check_anchoring(appearance.template, bm.insp.vertices, bm.faces)
        self.appearance = appearance
        self.bm = bm
        self.camera = camera
        self.target = to_tensor(frame_rgb)
        self.faces = torch.as_tensor(bm.faces, dtype=torch.long)
        self.delta = to_tensor(bm.delta)
        self.prev_alpha = prev_alpha
        self.weights = weights
        self.raster = raster
        self.epsilon = epsilon

    def step(
        self,
        theta: torch.Tensor,
        phase_opt: torch.optim.Adam | None,
        optimize_appearance: bool,
    ) -> float:
        """One forward/backward pass and the Adam updates of the active blocks; returns the loss."""
        theta_value = float(theta.detach()[0])
        alpha_hat, _ = activation(theta_value, self.epsilon)
        vertices = to_tensor(deform_mesh(self.bm, alpha_hat), requires_grad=phase_opt is not None)

        with torch.enable_grad():
            out = render_tensors(
                vertices,
                self.faces,
                self.appearance.params,
                self.appearance.template.normal_scale,
                self.camera,
                self.raster,
            )
            photo = photometric_loss_tensor(out.rgb, self.target, self.weights)
            inputs = list(self.appearance.blocks) if optimize_appearance else []
            if phase_opt is not None:
                inputs.append(vertices)
            if photo.requires_grad:
                grads = torch.autograd.grad(photo, inputs, allow_unused=True)
            else:
                grads = [None] * len(inputs)
        grads = [torch.zeros_like(x) if g is None else g for g, x in zip(grads, inputs)]

        temporal, d_temporal = temporal_loss(alpha_hat, self.prev_alpha, self.weights.w_t)
        if phase_opt is not None:
            d_theta = phase_gradient(grads.pop(), self.delta, theta_value, self.epsilon, d_temporal)
            adam_step(phase_opt, {theta: d_theta}, theta=theta)
        if optimize_appearance:
            adam_step(self.appearance.optimizer, dict(zip(self.appearance.blocks, grads)))
        return float(photo.detach()) + temporal


def fit_appearance(
    appearance: AppearanceState,
    bm: BreathingMesh,
    camera: Camera,
    frame_rgb: np.ndarray,
    theta: float,
    iterations: int,
    weights: LossWeights,
    raster: RasterSettings | None = None,
    epsilon: float = PHASE_EPSILON,
) -> list[float]:
    """Appearance-only fitting at a fixed phase (frame 0 and the frozen-phase ablation)."""
    problem = _FrameProblem(appearance, bm, camera, frame_rgb, None, weights, raster, epsilon)
    theta_t = torch.tensor([theta], dtype=DTYPE)
    return [problem.step(theta_t, None, True) for _ in range(iterations)]


def fit_frame(
    appearance: AppearanceState,
    bm: BreathingMesh,
    camera: Camera,
    frame_rgb: np.ndarray,
    prev_phase: PhaseParam | None,
    schedule: Schedule,
    weights: LossWeights,
    raster: RasterSettings | None = None,
    initial_theta: float | None = None,
) -> FrameFit:
    """Fit one frame: phase only, then appearance only, then both.

    θ starts from the previous frame's θ (or `initial_theta`, or π/2 when
    neither exists). The appearance optimizer in `appearance` keeps its Adam
    moments across calls; θ gets a fresh optimizer every frame.
    """
    epsilon = prev_phase.epsilon if prev_phase is not None else PHASE_EPSILON
    if prev_phase is not None:
        start = prev_phase.theta
    elif initial_theta is not None:
        start = initial_theta
    else:
        start = inverse_activation(0.5, epsilon)
    prev_alpha = prev_phase.alpha_hat if prev_phase is not None else None

    problem = _FrameProblem(appearance, bm, camera, frame_rgb, prev_alpha, weights, raster, epsilon)
    theta = torch.tensor([start], dtype=DTYPE, requires_grad=True)
    phase_opt = phase_optimizer(theta, schedule)

    losses = []
    for _ in range(schedule.iters_phase_only):
        losses.append(problem.step(theta, phase_opt, False))
    for _ in range(schedule.iters_appearance_only):
        losses.append(problem.step(theta, None, True))
    for _ in range(schedule.iters_joint):
        losses.append(problem.step(theta, phase_opt, True))

    phase = PhaseParam(theta=float(theta.detach()[0]), epsilon=epsilon)
    logger.debug(f"Fitted phase {phase.alpha_hat:.4f}, loss {losses[0]:.5f} -> {losses[-1]:.5f}")
    return FrameFit(phase=phase, losses=losses)


def render_phase(
    cloud: GaussianCloud,
    bm: BreathingMesh,
    camera: Camera,
    phase: PhaseParam,
    raster: RasterSettings | None = None,
) -> RenderOutput:
    return render(cloud, deform_mesh(bm, phase.alpha_hat), bm.faces, camera, raster)


def fit_sequence(
    dataset: Dataset,
    config: ReconstructConfig,
    on_frame=None,
) -> SequenceFit:
    """Recover the breathing phase of every frame from RGB alone.

    Ground-truth depth is read for frame 0 only, by the grid search.

    Args:
        dataset: A loaded synthetic dataset.
        config: Reconstruction configuration.
        on_frame: Optional callback ``on_frame(index, phase, cloud)`` invoked
            after each frame (used to write per-frame renders).

    Returns:
        SequenceFit with the phase track, the final cloud and wall-clock timings.
    """
    start_time = time.perf_counter()
    bm = dataset.mesh
    density = config.density or density_for(bm.insp, config.gaussians_per_face)
    cloud = seed_gaussians(bm.insp, density, config.seed, init_color=config.init_color)
    appearance = AppearanceState(cloud, config.schedule)
    schedule, weights, raster = config.schedule, config.weights, config.raster
    settle_iters = schedule.iters_appearance_only + schedule.iters_joint

    frozen_theta = inverse_activation(config.phase_value) if config.frozen_phase else None
    if frozen_theta is not None:
        logger.info(f"🚀 Frozen-phase run at alpha {config.phase_value}")

    track = PhaseTrack()
    per_frame: list[float] = []
    prev: PhaseParam | None = None
    for index in tqdm(range(len(dataset)), desc="Fitting frames", unit="frame"):
        frame_start = time.perf_counter()
        camera = dataset.camera(index)
        target = dataset.frame_rgb(index)
        if frozen_theta is not None or index == 0:
            if frozen_theta is not None:
                theta = frozen_theta
            else:
                theta = init_first_frame_phase(bm, camera, dataset.frame_depth(0), config.grid_size)
            losses = fit_appearance(appearance, bm, camera, target, theta, settle_iters, weights, raster)
            phase = PhaseParam(theta=theta)
        else:
            phase, losses = fit_frame(appearance, bm, camera, target, prev, schedule, weights, raster)
        per_frame.append(time.perf_counter() - frame_start)
        logger.debug(f"Frame {index}: alpha {phase.alpha_hat:.4f}, final loss {losses[-1]:.5f}")

        track.append(index, phase)
        if on_frame is not None:
            on_frame(index, phase, appearance.to_cloud())
        prev = phase

    total = time.perf_counter() - start_time
    timing = TimingRecord(
        total_seconds=total, seconds_per_frame=total / len(dataset), per_frame=per_frame
    )
    logger.info(f"✅ Fitted {len(dataset)} frames in {total:.1f} s ({timing.seconds_per_frame:.2f} s/frame)")
    return SequenceFit(track=track, cloud=appearance.to_cloud(), timing=timing)
