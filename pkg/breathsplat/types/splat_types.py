from __future__ import annotations

import numpy as np
from pydantic import Field, field_validator, model_validator

from breathsplat.errors import AnchoringError
from breathsplat.types.mesh_types import ArrayModel


class AnchoredGaussian(ArrayModel):
    """Thin-disc Gaussian owned by one mesh face."""

    face_id: int = Field(ge=0)
    bary_logits: np.ndarray
    log_scales: np.ndarray
    sh: np.ndarray
    opacity: float = Field(gt=0, le=1)

    @field_validator("bary_logits", "log_scales", "sh", mode="before")
    @classmethod
    def _as_float(cls, value) -> np.ndarray:
        return np.asarray(value, dtype=np.float64)

    @model_validator(mode="after")
    def _check_shapes(self) -> AnchoredGaussian:
        if self.bary_logits.shape != (3,) or self.log_scales.shape != (2,):
            raise ValueError("bary_logits must have 3 entries and log_scales 2")
        if self.sh.shape != (4, 3):
            raise ValueError(f"sh must be (4, 3), got {self.sh.shape}")
        return self


class GaussianCloud(ArrayModel):
    """Structure-of-arrays storage for the anchored Gaussians of one mesh.

    sh is (N, 4, 3): basis (Y00, Y1-1, Y10, Y11) by channel (r, g, b).
    """

    face_id: np.ndarray
    bary_logits: np.ndarray
    log_scales: np.ndarray
    sh: np.ndarray
    opacity: np.ndarray
    normal_scale: float = Field(gt=0)

    @field_validator("face_id", mode="before")
    @classmethod
    def _as_index(cls, value) -> np.ndarray:
        return np.asarray(value, dtype=np.int64).reshape(-1)

    @field_validator("bary_logits", mode="before")
    @classmethod
    def _as_logits(cls, value) -> np.ndarray:
        return np.asarray(value, dtype=np.float64).reshape(-1, 3)

    @field_validator("log_scales", mode="before")
    @classmethod
    def _as_scales(cls, value) -> np.ndarray:
        return np.asarray(value, dtype=np.float64).reshape(-1, 2)

    @field_validator("sh", mode="before")
    @classmethod
    def _as_sh(cls, value) -> np.ndarray:
        return np.asarray(value, dtype=np.float64).reshape(-1, 4, 3)

    @field_validator("opacity", mode="before")
    @classmethod
    def _as_opacity(cls, value) -> np.ndarray:
        return np.asarray(value, dtype=np.float64).reshape(-1)

    @model_validator(mode="after")
    def _check_shapes(self) -> GaussianCloud:
        n = len(self.face_id)
        for name in ("bary_logits", "log_scales", "sh", "opacity"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} has {len(getattr(self, name))} rows, expected {n}")
        if n and (np.any(self.opacity <= 0) or np.any(self.opacity > 1)):
            raise ValueError("opacity must lie in (0, 1]")
        return self

    @classmethod
    def empty(cls, normal_scale: float) -> GaussianCloud:
        return cls(
            face_id=np.zeros(0),
            bary_logits=np.zeros((0, 3)),
            log_scales=np.zeros((0, 2)),
            sh=np.zeros((0, 4, 3)),
            opacity=np.zeros(0),
            normal_scale=normal_scale,
        )

    def __len__(self) -> int:
        return len(self.face_id)

    def __getitem__(self, k: int) -> AnchoredGaussian:
        return AnchoredGaussian(
            face_id=int(self.face_id[k]),
            bary_logits=self.bary_logits[k],
            log_scales=self.log_scales[k],
            sh=self.sh[k],
            opacity=float(self.opacity[k]),
        )

    def check_anchoring(self, face_count: int) -> None:
        if len(self) and (self.face_id.min() < 0 or self.face_id.max() >= face_count):
            raise AnchoringError(
                f"cloud references face {int(self.face_id.max())} but the mesh has {face_count} faces"
            )

    def with_appearance(
        self, bary_logits: np.ndarray, log_scales: np.ndarray, sh: np.ndarray
    ) -> GaussianCloud:
        """Copy with new learnable parameters; face ids, opacity and normal scale are kept."""
        return self.model_copy(
            update={
                "bary_logits": np.array(bary_logits, dtype=np.float64).reshape(-1, 3),
                "log_scales": np.array(log_scales, dtype=np.float64).reshape(-1, 2),
                "sh": np.array(sh, dtype=np.float64).reshape(-1, 4, 3),
            }
        )
