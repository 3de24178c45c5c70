from __future__ import annotations

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from breathsplat.globals import (
    COMPOSITE_CHUNK,
    COV2D_FLOOR,
    MAX_SPLAT_EXTENT,
    MIN_ALPHA,
    MIN_TRANSMITTANCE,
    NEAR_PLANE_MM,
)
from breathsplat.types.mesh_types import ArrayModel


class Intrinsics(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    fx: float = Field(gt=0)
    fy: float = Field(gt=0)
    cx: float
    cy: float
    width: int = Field(ge=8)
    height: int = Field(ge=8)

    @classmethod
    def from_fov(cls, width: int, height: int, fov_deg: float = 90.0) -> Intrinsics:
        """Square pixels, horizontal field of view, principal point at the image centre."""
        fx = 0.5 * width / np.tan(np.radians(fov_deg) / 2.0)
        return cls(fx=fx, fy=fx, cx=width / 2.0, cy=height / 2.0, width=width, height=height)


class Camera(ArrayModel):
    """Pinhole camera; `pose` maps world to camera coordinates (x right, y down, z forward)."""

    fx: float = Field(gt=0)
    fy: float = Field(gt=0)
    cx: float
    cy: float
    width: int = Field(ge=8)
    height: int = Field(ge=8)
    pose: np.ndarray

    @field_validator("pose", mode="before")
    @classmethod
    def _as_matrix(cls, value) -> np.ndarray:
        pose = np.asarray(value, dtype=np.float64).reshape(4, 4)
        return pose

    @model_validator(mode="after")
    def _check_rigid(self) -> Camera:
        rotation = self.pose[:3, :3]
        if not np.allclose(rotation @ rotation.T, np.eye(3), atol=1e-6):
            raise ValueError("pose rotation is not orthonormal")
        if abs(np.linalg.det(rotation) - 1.0) > 1e-6:
            raise ValueError("pose rotation must have determinant +1")
        if not np.allclose(self.pose[3], [0.0, 0.0, 0.0, 1.0]):
            raise ValueError("pose last row must be (0, 0, 0, 1)")
        return self

    @classmethod
    def from_intrinsics(cls, intrinsics: Intrinsics, pose: np.ndarray) -> Camera:
        return cls(**intrinsics.model_dump(), pose=pose)

    @property
    def intrinsics(self) -> Intrinsics:
        return Intrinsics(
            fx=self.fx, fy=self.fy, cx=self.cx, cy=self.cy, width=self.width, height=self.height
        )

    @property
    def rotation(self) -> np.ndarray:
        return self.pose[:3, :3]

    @property
    def translation(self) -> np.ndarray:
        return self.pose[:3, 3]

    @property
    def center(self) -> np.ndarray:
        """Camera centre in world coordinates."""
        return -self.rotation.T @ self.translation

    @property
    def optical_axis(self) -> np.ndarray:
        """Unit viewing direction in world coordinates."""
        return self.rotation[2].copy()

    def to_camera(self, points: np.ndarray) -> np.ndarray:
        return points @ self.rotation.T + self.translation

    def pixel_rays(self) -> np.ndarray:
        """Camera-space ray directions with unit z, shape (H, W, 3), pixel (x, y) at image position (x, y)."""
        xs = (np.arange(self.width, dtype=np.float64) - self.cx) / self.fx
        ys = (np.arange(self.height, dtype=np.float64) - self.cy) / self.fy
        grid_x, grid_y = np.meshgrid(xs, ys, indexing="xy")
        return np.stack([grid_x, grid_y, np.ones_like(grid_x)], axis=-1)


def look_at_pose(center: np.ndarray, forward: np.ndarray, up: np.ndarray) -> np.ndarray:
    """World-to-camera pose of a camera at `center` looking along `forward`; image y points away from `up`."""
    z = np.asarray(forward, dtype=np.float64)
    z = z / np.linalg.norm(z)
    down = -np.asarray(up, dtype=np.float64)
    y = down - np.dot(down, z) * z
    y = y / np.linalg.norm(y)
    x = np.cross(y, z)
    rotation = np.stack([x, y, z], axis=0)
    pose = np.eye(4)
    pose[:3, :3] = rotation
    pose[:3, 3] = -rotation @ np.asarray(center, dtype=np.float64)
    return pose


class RasterSettings(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    tile_size: int = Field(16, ge=4)
    near: float = Field(NEAR_PLANE_MM, gt=0)
    cov2d_floor: float = Field(COV2D_FLOOR, ge=0)
    min_transmittance: float = Field(MIN_TRANSMITTANCE, gt=0, lt=1)
    min_alpha: float = Field(MIN_ALPHA, gt=0, lt=1)
    chunk_size: int = Field(COMPOSITE_CHUNK, ge=1)
    max_extent: float = Field(MAX_SPLAT_EXTENT, gt=0)


class RenderOutput(ArrayModel):
    rgb: np.ndarray
    depth: np.ndarray
    alpha: np.ndarray


class RenderGradients(ArrayModel):
    bary_logits: np.ndarray
    log_scales: np.ndarray
    sh: np.ndarray
    vertices: np.ndarray
