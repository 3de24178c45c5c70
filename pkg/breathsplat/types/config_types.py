from __future__ import annotations

import json
from pathlib import Path
from typing import TypeVar

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from breathsplat.errors import ConfigError
from breathsplat.types.camera_types import RasterSettings
from breathsplat.utils.logger import logger


class Spec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


def _check_range(value: tuple[float, float]) -> tuple[float, float]:
    low, high = value
    if not 0 < low <= high:
        raise ValueError(f"range must satisfy 0 < low <= high, got {value}")
    return value


class AirwaySpec(Spec):
    tree_depth: int = Field(3, ge=0)
    root_length: float = Field(40.0, gt=0)
    root_radius: float = Field(9.0, gt=0)
    length_taper: float = Field(0.75, gt=0)
    radius_taper: float = Field(0.7, gt=0)
    branch_angle: float = Field(35.0, gt=0, lt=90)
    ring_vertices: int = Field(24, ge=8)
    rings_per_segment: int = Field(16, ge=1)
    rng_seed: int = 0


class DeformationSpec(Spec):
    radial_amplitude: float = Field(3.0, ge=0)
    axial_amplitude: float = Field(8.0, ge=0)
    depth_weighting: float = Field(1.0, ge=0)
    axial_direction: tuple[float, float, float] = (0.0, 0.0, 1.0)

    @field_validator("axial_direction")
    @classmethod
    def _unit(cls, value: tuple[float, float, float]) -> tuple[float, float, float]:
        norm = float(np.linalg.norm(value))
        if norm < 1e-12:
            raise ValueError("axial_direction must be nonzero")
        return tuple(float(v) / norm for v in value)


class BreathingProfile(Spec):
    t_inhale: float = Field(1.5, gt=0)
    t_exhale: float = Field(2.5, gt=0)
    rate_scale: float = Field(1.0, gt=0)

    @property
    def period(self) -> float:
        return (self.t_inhale + self.t_exhale) / self.rate_scale


class TrajectorySpec(Spec):
    speed: float = Field(10.0, gt=0)
    fps: float = Field(15.0, gt=0)
    frame_count: int = Field(400, ge=1)
    rng_seed: int = 0


class SceneMaterial(Spec):
    base_albedo: tuple[float, float, float] = (0.80, 0.45, 0.42)
    albedo_noise_amplitude: float = Field(0.2, ge=0)
    albedo_noise_scale: float = Field(2.0, gt=0)
    specular_exponent: float = Field(40.0, gt=0)
    specular_strength: float = Field(0.25, ge=0)
    light_intensity: float = Field(80.0, gt=0)
    exposure_jitter_range: tuple[float, float] = (0.9, 1.1)
    white_balance_jitter_range: tuple[float, float] = (0.97, 1.03)
    vignetting_power: float = Field(0.0, ge=0)
    rng_seed: int = 0

    @field_validator("exposure_jitter_range", "white_balance_jitter_range")
    @classmethod
    def _ordered(cls, value: tuple[float, float]) -> tuple[float, float]:
        return _check_range(value)


class LossWeights(Spec):
    w_c: float = Field(1.0, ge=0)
    w_s: float = Field(0.2, ge=0, le=1)
    w_t: float = Field(0.1, ge=0)


class Schedule(Spec):
    iters_phase_only: int = Field(30, ge=1)
    iters_appearance_only: int = Field(50, ge=1)
    iters_joint: int = Field(40, ge=1)
    lr_theta: float = Field(0.05, gt=0)
    lr_bary_logits: float = Field(0.01, gt=0)
    lr_log_scales: float = Field(0.005, gt=0)
    lr_sh: float = Field(0.0025, gt=0)


class SimulateConfig(BaseSettings):
    """Everything `generate_dataset` needs; env vars such as BREATHSPLAT_WIDTH override defaults."""

    model_config = SettingsConfigDict(
        env_prefix="BREATHSPLAT_", env_nested_delimiter="__", extra="forbid", frozen=True
    )

    airway: AirwaySpec = AirwaySpec()
    deformation: DeformationSpec = DeformationSpec()
    breathing: BreathingProfile = BreathingProfile()
    trajectory: TrajectorySpec = TrajectorySpec()
    material: SceneMaterial = SceneMaterial()
    width: int = Field(128, ge=8)
    height: int = Field(128, ge=8)
    fov_deg: float = Field(90.0, gt=0, lt=180)
    write_intermediate_meshes: bool = False


class ReconstructConfig(BaseSettings):
    model_config = SettingsConfigDict(
        env_prefix="BREATHSPLAT_", env_nested_delimiter="__", extra="forbid", frozen=True
    )

    weights: LossWeights = LossWeights()
    schedule: Schedule = Schedule()
    raster: RasterSettings = RasterSettings()
    seed: int = 0
    gaussians_per_face: float = Field(3.0, gt=0)
    density: float | None = Field(None, gt=0)
    init_color: float = Field(0.5, ge=0, le=1)
    frozen_phase: bool = False
    phase_value: float = Field(0.5, ge=0, le=1)
    grid_size: int = Field(33, ge=2)
    save_renders: bool = True


ConfigT = TypeVar("ConfigT", SimulateConfig, ReconstructConfig)


def _offending_key(error: ValidationError) -> str | None:
    loc = error.errors()[0].get("loc", ())
    return ".".join(str(part) for part in loc) or None


def build_config(config_cls: type[ConfigT], values: dict) -> ConfigT:
    """Validate `values`, converting pydantic failures into a ConfigError naming the key."""
    try:
        return config_cls(**values)
    except ValidationError as e:
        key = _offending_key(e)
        raise ConfigError(f"invalid configuration at '{key}': {e.errors()[0]['msg']}", key=key) from e


def load_config(config_cls: type[ConfigT], file_path: Path | None = None, **overrides) -> ConfigT:
    """Read a JSON config file (all keys optional) and apply command-line overrides.

    Overrides use dotted keys, e.g. ``{"trajectory.frame_count": 60}``.

    Raises:
        ConfigError: If the file is unreadable, not JSON, or fails validation.
    """
    values: dict = {}
    if file_path is not None:
        try:
            with open(file_path, "r", encoding="utf-8") as f:
                values = json.load(f)
        except FileNotFoundError as e:
            logger.error(f"❌ Config file not found: {file_path}")
            raise ConfigError(f"config file not found: {file_path}") from e
        except json.JSONDecodeError as e:
            logger.error(f"❌ Malformed JSON in {file_path}: {e}")
            raise ConfigError(f"malformed JSON in {file_path}: {e}") from e
        if not isinstance(values, dict):
            raise ConfigError(f"config in {file_path} must be a JSON object")

    for dotted, value in overrides.items():
        node = values
        *parents, leaf = dotted.split(".")
        for part in parents:
            node = node.setdefault(part, {})
        node[leaf] = value
    return build_config(config_cls, values)


def save_config(file_path: Path, config: BaseModel) -> Path:
    with open(file_path, "w", encoding="utf-8") as f:
        f.write(config.model_dump_json(indent=2))
    return Path(file_path)
