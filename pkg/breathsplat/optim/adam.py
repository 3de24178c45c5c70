import math

import torch

from breathsplat.errors import NonFiniteGradientError
from breathsplat.optim.activation import activation
from breathsplat.types.config_types import Schedule


ADAM_BETAS = (0.9, 0.999)
ADAM_EPS = 1e-8


def appearance_optimizer(
    bary_logits: torch.Tensor, log_scales: torch.Tensor, sh: torch.Tensor, schedule: Schedule
) -> torch.optim.Adam:
    """One Adam instance, one parameter group per learnable block; it lives for the whole sequence."""
    return torch.optim.Adam(
        [
            {"params": [bary_logits], "lr": schedule.lr_bary_logits, "name": "bary_logits"},
            {"params": [log_scales], "lr": schedule.lr_log_scales, "name": "log_scales"},
            {"params": [sh], "lr": schedule.lr_sh, "name": "sh"},
        ],
        betas=ADAM_BETAS,
        eps=ADAM_EPS,
    )


def phase_optimizer(theta: torch.Tensor, schedule: Schedule) -> torch.optim.Adam:
    return torch.optim.Adam(
        [{"params": [theta], "lr": schedule.lr_theta, "name": "theta"}], betas=ADAM_BETAS, eps=ADAM_EPS
    )


def adam_step(
    optimizer: torch.optim.Adam,
    grads: dict[torch.Tensor, torch.Tensor],
    theta: torch.Tensor | None = None,
) -> None:
    """Apply one Adam update with the given gradients.

    Parameters missing from `grads` keep a None gradient, so Adam leaves both
    them and their moments untouched. `theta`, if given, is clamped to [0, π]
    afterwards.

    Raises:
        NonFiniteGradientError: If any supplied gradient holds NaN or inf.
    """
    for param, grad in grads.items():
        if not torch.isfinite(grad).all():
            raise NonFiniteGradientError("non-finite gradient; aborting instead of corrupting the fit")
    optimizer.zero_grad(set_to_none=True)
    for param, grad in grads.items():
        param.grad = grad.detach().clone()
    optimizer.step()
    optimizer.zero_grad(set_to_none=True)
    if theta is not None:
        with torch.no_grad():
            theta.clamp_(0.0, math.pi)


def phase_gradient(
    vertex_grad: torch.Tensor,
    delta: torch.Tensor,
    theta: float,
    epsilon: float,
    d_temporal: float = 0.0,
) -> torch.Tensor:
    """dLoss/dθ: vertex gradients contracted with the displacement field, through the activation."""
    _, d_alpha = activation(theta, epsilon)
    d_loss_d_alpha = torch.sum(vertex_grad * delta) + d_temporal
    return (d_loss_d_alpha * d_alpha).reshape(1)
