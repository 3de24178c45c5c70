import json
from pathlib import Path

from breathsplat.errors import DatasetError
from breathsplat.types.splat_types import GaussianCloud
from breathsplat.utils.logger import logger


def save_cloud(file_path: Path, cloud: GaussianCloud, mesh_file: str | None = None) -> Path:
    """Write the cloud as one JSON document; floats are written round-trip exact."""
    document = {
        "mesh_file": mesh_file,
        "normal_scale": cloud.normal_scale,
        "face_id": cloud.face_id.tolist(),
        "bary_logits": cloud.bary_logits.tolist(),
        "log_scales": cloud.log_scales.tolist(),
        "sh": cloud.sh.reshape(len(cloud), 12).tolist(),
        "opacity": cloud.opacity.tolist(),
    }
    file_path = Path(file_path)
    with open(file_path, "w", encoding="utf-8") as f:
        json.dump(document, f)
    logger.debug(f"Saved {len(cloud)} Gaussians to {file_path}")
    return file_path


def load_cloud(file_path: Path) -> tuple[GaussianCloud, str | None]:
    """Load a cloud written by `save_cloud`.

    Returns:
        The cloud and the mesh file it anchors to.

    Raises:
        DatasetError: If the file is missing or not a valid cloud document.
    """
    file_path = Path(file_path)
    try:
        with open(file_path, "r", encoding="utf-8") as f:
            document = json.load(f)
        cloud = GaussianCloud(
            face_id=document["face_id"],
            bary_logits=document["bary_logits"],
            log_scales=document["log_scales"],
            sh=document["sh"],
            opacity=document["opacity"],
            normal_scale=document["normal_scale"],
        )
    except FileNotFoundError as e:
        logger.error(f"❌ Cloud file not found: {file_path}")
        raise DatasetError(f"cloud file not found: {file_path}") from e
    except (json.JSONDecodeError, KeyError, ValueError) as e:
        logger.error(f"❌ Invalid cloud document {file_path}: {e}")
        raise DatasetError(f"invalid cloud document {file_path}: {e}") from e
    return cloud, document.get("mesh_file")
