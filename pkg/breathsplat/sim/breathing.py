import math

from breathsplat.errors import DomainError
from breathsplat.types.config_types import BreathingProfile


def breathing_profile(profile: BreathingProfile, t: float) -> float:
    """Tidal breathing phase at time t (s): raised-cosine inhale 1 -> 0, then exhale 0 -> 1.

    The cycle starts at full expiration and repeats every `profile.period` seconds.

    Raises:
        DomainError: If t is negative.
    """
    if t < 0:
        raise DomainError(f"time must be non-negative, got {t}")
    cycle = profile.t_inhale + profile.t_exhale
    tau = math.fmod(t * profile.rate_scale, cycle)
    if tau < profile.t_inhale:
        return 0.5 * (1.0 + math.cos(math.pi * tau / profile.t_inhale))
    return 0.5 * (1.0 - math.cos(math.pi * (tau - profile.t_inhale) / profile.t_exhale))
