import numpy as np
import pytest

from breathsplat.errors import DomainError
from breathsplat.sim.breathing import breathing_profile
from breathsplat.types.config_types import BreathingProfile


PROFILE = BreathingProfile()


@pytest.mark.parametrize(
    "t, expected",
    [(0.0, 1.0), (0.75, 0.5), (1.5, 0.0), (2.75, 0.5), (4.0, 1.0)],
)
def test_profile_values(t, expected):
    assert breathing_profile(PROFILE, t) == pytest.approx(expected, abs=1e-12)


def test_periodic_and_bounded():
    for t in np.linspace(0.0, 12.0, 241):
        value = breathing_profile(PROFILE, t)
        assert 0.0 <= value <= 1.0
        assert breathing_profile(PROFILE, t + PROFILE.period) == pytest.approx(value, abs=1e-9)


def test_rate_scale_speeds_up_the_cycle():
    fast = BreathingProfile(rate_scale=2.0)
    assert breathing_profile(fast, 0.75) == pytest.approx(0.0, abs=1e-12)


def test_negative_time():
    with pytest.raises(DomainError):
        breathing_profile(PROFILE, -0.1)
