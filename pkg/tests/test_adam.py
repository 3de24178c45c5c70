import math

import pytest
import torch

from breathsplat.errors import NonFiniteGradientError
from breathsplat.optim.activation import activation
from breathsplat.optim.adam import adam_step, appearance_optimizer, phase_gradient, phase_optimizer
from breathsplat.types.config_types import Schedule


def theta_tensor(value: float) -> torch.Tensor:
    return torch.tensor([value], dtype=torch.float64, requires_grad=True)


def test_first_step_moves_by_learning_rate():
    theta = theta_tensor(1.0)
    optimizer = phase_optimizer(theta, Schedule(lr_theta=0.05))
    adam_step(optimizer, {theta: torch.tensor([0.3], dtype=torch.float64)}, theta=theta)
    assert float(theta) == pytest.approx(1.0 - 0.05, abs=1e-6)


def test_zero_gradient_leaves_parameter_unchanged():
    theta = theta_tensor(1.0)
    optimizer = phase_optimizer(theta, Schedule())
    adam_step(optimizer, {theta: torch.zeros(1, dtype=torch.float64)}, theta=theta)
    assert float(theta) == 1.0


def test_theta_is_clamped_to_pi():
    theta = theta_tensor(math.pi - 0.01)
    optimizer = phase_optimizer(theta, Schedule(lr_theta=0.05))
    adam_step(optimizer, {theta: torch.tensor([-2.0], dtype=torch.float64)}, theta=theta)
    assert float(theta) == math.pi


def test_non_finite_gradient_aborts_before_update():
    theta = theta_tensor(1.0)
    optimizer = phase_optimizer(theta, Schedule())
    with pytest.raises(NonFiniteGradientError):
        adam_step(optimizer, {theta: torch.tensor([float("nan")], dtype=torch.float64)})
    assert float(theta) == 1.0


def test_appearance_groups_and_untouched_blocks():
    blocks = [torch.zeros(shape, dtype=torch.float64, requires_grad=True) for shape in ((2, 3), (2, 2), (2, 4, 3))]
    schedule = Schedule()
    optimizer = appearance_optimizer(*blocks, schedule)
    names = [group["name"] for group in optimizer.param_groups]
    assert names == ["bary_logits", "log_scales", "sh"]
    assert [group["lr"] for group in optimizer.param_groups] == [
        schedule.lr_bary_logits, schedule.lr_log_scales, schedule.lr_sh
    ]

    adam_step(optimizer, {blocks[2]: torch.ones((2, 4, 3), dtype=torch.float64)})
    assert not blocks[0].detach().any() and not blocks[1].detach().any()
    assert torch.allclose(blocks[2].detach(), torch.full((2, 4, 3), -schedule.lr_sh, dtype=torch.float64))


def test_phase_gradient_chain():
    vertex_grad = torch.ones((2, 3), dtype=torch.float64)
    delta = torch.full((2, 3), 0.5, dtype=torch.float64)
    theta = 1.2
    expected = (3.0 + 0.25) * activation(theta, 0.05)[1]
    assert float(phase_gradient(vertex_grad, delta, theta, 0.05, d_temporal=0.25)) == pytest.approx(expected)


def test_schedule_requires_iterations():
    with pytest.raises(ValueError):
        Schedule(iters_joint=0)
