from __future__ import annotations

import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from breathsplat.globals import PHASE_EPSILON
from breathsplat.optim.activation import activation


class PhaseParam(BaseModel):
    """Breathing phase of one frame in its optimized parameterization."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    theta: float = Field(ge=0, le=math.pi)
    epsilon: float = Field(PHASE_EPSILON, ge=0, le=1)

    @property
    def alpha_hat(self) -> float:
        return activation(self.theta, self.epsilon)[0]


class PhaseRecord(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    frame: int = Field(ge=0)
    theta: float = Field(ge=0, le=math.pi)
    alpha_hat: float = Field(ge=0, le=1)


class PhaseTrack(BaseModel):
    """Recovered phases of a sequence, serialized to phases.json as a bare array."""

    records: list[PhaseRecord] = []

    def append(self, frame: int, phase: PhaseParam) -> None:
        self.records.append(PhaseRecord(frame=frame, theta=phase.theta, alpha_hat=phase.alpha_hat))

    def __len__(self) -> int:
        return len(self.records)

    @property
    def thetas(self) -> np.ndarray:
        return np.array([r.theta for r in self.records])

    @property
    def alphas(self) -> np.ndarray:
        return np.array([r.alpha_hat for r in self.records])
