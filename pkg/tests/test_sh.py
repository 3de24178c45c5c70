import numpy as np
import pytest
import torch

from breathsplat.globals import SH_C0
from breathsplat.splat.sh import evaluate_sh, sh_to_rgb


@pytest.mark.parametrize("direction", [[0, 0, 1], [1, 0, 0], [0.3, -0.4, 0.866]])
def test_zero_coefficients_give_mid_grey(direction):
    assert np.allclose(evaluate_sh(np.zeros(12), direction), 0.5)


def test_dc_only_is_view_independent():
    sh = np.zeros((4, 3))
    sh[0] = [0.2, -0.4, 1.0]
    expected = np.array([0.2, -0.4, 1.0]) * SH_C0 + 0.5
    for direction in ([0, 0, 1], [0, 1, 0], [-1, 0, 0]):
        assert np.allclose(evaluate_sh(sh, direction), expected)


def test_linear_terms_are_odd():
    sh = np.zeros((4, 3))
    sh[1:] = 0.3
    d = np.array([0.2, 0.5, 0.84])
    up, down = evaluate_sh(sh, d) - 0.5, evaluate_sh(sh, -d) - 0.5
    assert np.allclose(up, -down)
    assert not np.allclose(up, 0.0)


def test_direction_is_normalized():
    sh = np.random.default_rng(0).normal(scale=0.2, size=(4, 3))
    assert np.allclose(evaluate_sh(sh, [0, 0, 5]), evaluate_sh(sh, [0, 0, 1]))


def test_output_is_clamped():
    sh = np.full((4, 3), 10.0)
    rgb = evaluate_sh(sh, [0, 0, 1])
    assert np.all((rgb >= 0) & (rgb <= 1))


def test_batched_matches_single():
    rng = np.random.default_rng(1)
    sh = rng.normal(scale=0.3, size=(5, 4, 3))
    dirs = rng.normal(size=(5, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    batched = sh_to_rgb(torch.from_numpy(sh), torch.from_numpy(dirs)).numpy()
    for k in range(5):
        assert np.allclose(batched[k], evaluate_sh(sh[k], dirs[k]))
