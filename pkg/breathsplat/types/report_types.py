from pydantic import BaseModel, ConfigDict, Field


class TimingRecord(BaseModel):
    """Contents of timing.json."""

    model_config = ConfigDict(extra="forbid")

    total_seconds: float = Field(ge=0)
    seconds_per_frame: float = Field(ge=0)
    per_frame: list[float] = []


class FrameMetrics(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    frame: int
    psnr: float
    ssim: float
    depth_rmse: float
    delta: float
    alpha_gt: float
    alpha_pred: float


class EvalReport(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    psnr: float
    ssim: float = Field(ge=-1, le=1)
    depth_rmse: float | None = Field(None, ge=0)
    delta_125: float | None = Field(None, ge=0, le=1)
    phase_mae: float = Field(ge=0)
    pearson_r: float | None = Field(None, ge=-1, le=1)
    contour_rmse: float | None = Field(None, ge=0)
    contour_matched_fraction: float = Field(0.0, ge=0, le=1)
    target_error: float | None = Field(None, ge=0)
    total_time: float | None = Field(None, ge=0)
    seconds_per_frame: float | None = Field(None, ge=0)
    frame_count: int = Field(0, ge=0)
