import math

from breathsplat.errors import DomainError
from breathsplat.globals import PHASE_EPSILON


BISECTION_TOLERANCE = 1e-10


def activation(theta: float, epsilon: float = PHASE_EPSILON) -> tuple[float, float]:
    """Leaky-cosine phase: (1-ε)·½(1-cos θ) + ε·θ/π and its derivative in θ.

    The derivative never drops below ε/π, so the phase keeps receiving a
    gradient at both ends of the breathing cycle.

    Raises:
        DomainError: If theta lies outside [0, π].
    """
    if not 0.0 <= theta <= math.pi:
        raise DomainError(f"theta must lie in [0, pi], got {theta}")
    if theta == math.pi:
        return 1.0, epsilon / math.pi
    alpha_hat = (1.0 - epsilon) * 0.5 * (1.0 - math.cos(theta)) + epsilon * theta / math.pi
    derivative = (1.0 - epsilon) * 0.5 * math.sin(theta) + epsilon / math.pi
    return alpha_hat, derivative


def inverse_activation(alpha_target: float, epsilon: float = PHASE_EPSILON) -> float:
    """θ in [0, π] with activation(θ) = alpha_target, found by bisection.

    Raises:
        DomainError: If alpha_target lies outside [0, 1].
    """
    if not 0.0 <= alpha_target <= 1.0:
        raise DomainError(f"phase must lie in [0, 1], got {alpha_target}")
    if alpha_target == 0.0:
        return 0.0
    if alpha_target == 1.0:
        return math.pi
    low, high = 0.0, math.pi
    mid = 0.5 * (low + high)
    for _ in range(200):
        mid = 0.5 * (low + high)
        value = activation(mid, epsilon)[0]
        if abs(value - alpha_target) < BISECTION_TOLERANCE:
            break
        if value < alpha_target:
            low = mid
        else:
            high = mid
    return mid
