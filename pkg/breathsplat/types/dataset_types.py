from __future__ import annotations

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from breathsplat.types.camera_types import Camera, Intrinsics


class FrameRecord(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    index: int = Field(ge=0)
    pose: list[float]
    alpha_gt: float = Field(ge=0, le=1)
    exposure_gain: float = Field(gt=0)

    @field_validator("pose")
    @classmethod
    def _sixteen(cls, value: list[float]) -> list[float]:
        if len(value) != 16:
            raise ValueError(f"pose needs 16 row-major values, got {len(value)}")
        return value

    @property
    def pose_matrix(self) -> np.ndarray:
        return np.asarray(self.pose, dtype=np.float64).reshape(4, 4)


class DatasetMeta(BaseModel):
    """Contents of meta.json."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    width: int = Field(ge=8)
    height: int = Field(ge=8)
    fx: float = Field(gt=0)
    fy: float = Field(gt=0)
    cx: float
    cy: float
    fps: float = Field(gt=0)
    frame_count: int = Field(ge=1)
    frames: list[FrameRecord]

    @model_validator(mode="after")
    def _consistent(self) -> DatasetMeta:
        if len(self.frames) != self.frame_count:
            raise ValueError(f"frame_count {self.frame_count} but {len(self.frames)} frame records")
        for expected, record in enumerate(self.frames):
            if record.index != expected:
                raise ValueError(f"frame record {expected} carries index {record.index}")
        return self

    @property
    def intrinsics(self) -> Intrinsics:
        return Intrinsics(
            fx=self.fx, fy=self.fy, cx=self.cx, cy=self.cy, width=self.width, height=self.height
        )

    def camera(self, index: int) -> Camera:
        return Camera.from_intrinsics(self.intrinsics, self.frames[index].pose_matrix)

    @property
    def phases(self) -> np.ndarray:
        return np.array([record.alpha_gt for record in self.frames])
