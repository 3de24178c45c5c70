import json
from pathlib import Path

from pydantic import TypeAdapter, ValidationError

from breathsplat.errors import DatasetError
from breathsplat.globals import FRAME_NAME, PHASES_FILE, RENDERS_DIR, TIMING_FILE
from breathsplat.raster.image_io import write_depth, write_ppm
from breathsplat.types.camera_types import RenderOutput
from breathsplat.types.phase_types import PhaseRecord, PhaseTrack
from breathsplat.types.report_types import TimingRecord
from breathsplat.utils.logger import logger


_records = TypeAdapter(list[PhaseRecord])


def save_phases(run_dir: Path, track: PhaseTrack) -> Path:
    """phases.json: a bare array of {frame, theta, alpha_hat}."""
    file_path = Path(run_dir) / PHASES_FILE
    with open(file_path, "wb") as f:
        f.write(_records.dump_json(track.records, indent=2))
    return file_path


def load_phases(run_dir: Path) -> PhaseTrack:
    file_path = Path(run_dir) / PHASES_FILE
    try:
        with open(file_path, "rb") as f:
            return PhaseTrack(records=_records.validate_json(f.read()))
    except FileNotFoundError as e:
        logger.error(f"❌ Phase file not found: {file_path}")
        raise DatasetError(f"phase file not found: {file_path}") from e
    except ValidationError as e:
        raise DatasetError(f"invalid phase file {file_path}: {e}") from e


def save_timing(run_dir: Path, timing: TimingRecord) -> Path:
    file_path = Path(run_dir) / TIMING_FILE
    with open(file_path, "w", encoding="utf-8") as f:
        f.write(timing.model_dump_json(indent=2))
    return file_path


def load_timing(run_dir: Path) -> TimingRecord | None:
    """Timings of a run, or None for directories without a timing.json (e.g. ground truth)."""
    file_path = Path(run_dir) / TIMING_FILE
    if not file_path.exists():
        return None
    with open(file_path, "r", encoding="utf-8") as f:
        return TimingRecord.model_validate(json.load(f))


def render_paths(run_dir: Path, index: int) -> tuple[Path, Path]:
    stem = Path(run_dir) / RENDERS_DIR / FRAME_NAME.format(index=index)
    return stem.with_suffix(".ppm"), stem.with_suffix(".f32")


def save_render(run_dir: Path, index: int, output: RenderOutput) -> None:
    rgb_path, depth_path = render_paths(run_dir, index)
    rgb_path.parent.mkdir(parents=True, exist_ok=True)
    write_ppm(rgb_path, output.rgb)
    write_depth(depth_path, output.depth)
