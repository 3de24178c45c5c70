from pathlib import Path

import numpy as np

from breathsplat.errors import MeshFormatError
from breathsplat.types.mesh_types import BreathingMesh, TriMesh
from breathsplat.utils.logger import logger


def save_obj(file_path: Path, vertices: np.ndarray, faces: np.ndarray) -> Path:
    """Write the `v x y z` / `f i j k` OBJ subset (1-indexed, LF, UTF-8)."""
    lines = [f"v {float(x)!r} {float(y)!r} {float(z)!r}" for x, y, z in vertices]
    lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in np.asarray(faces, dtype=np.int64)]
    file_path = Path(file_path)
    with open(file_path, "w", encoding="utf-8", newline="\n") as f:
        f.write("\n".join(lines) + "\n")
    logger.debug(f"Saved mesh with {len(vertices)} vertices to {file_path}")
    return file_path


def load_obj(file_path: Path) -> TriMesh:
    """Read the OBJ subset written by `save_obj`.

    Raises:
        FileNotFoundError: If the file does not exist.
        MeshFormatError: On any line outside the `v`/`f` subset.
    """
    file_path = Path(file_path)
    vertices, faces = [], []
    try:
        with open(file_path, "r", encoding="utf-8") as f:
            for number, line in enumerate(f, start=1):
                parts = line.split()
                if not parts:
                    continue
                if parts[0] == "v" and len(parts) == 4:
                    vertices.append([float(p) for p in parts[1:]])
                elif parts[0] == "f" and len(parts) == 4:
                    faces.append([int(p) - 1 for p in parts[1:]])
                else:
                    raise MeshFormatError(f"{file_path}:{number}: unsupported OBJ line {line!r}")
    except FileNotFoundError:
        logger.error(f"❌ Mesh file not found: {file_path}")
        raise
    except ValueError as e:
        if isinstance(e, MeshFormatError):
            raise
        raise MeshFormatError(f"{file_path}: {e}") from e

    try:
        return TriMesh(vertices=vertices, faces=faces)
    except ValueError as e:
        raise MeshFormatError(f"{file_path}: {e}") from e


def load_breathing_mesh(insp_path: Path, exp_path: Path) -> BreathingMesh:
    insp, exp = load_obj(insp_path), load_obj(exp_path)
    if insp.vertex_count != exp.vertex_count or not np.array_equal(insp.faces, exp.faces):
        raise MeshFormatError(f"{insp_path} and {exp_path} do not share topology")
    return BreathingMesh.from_pair(insp, exp)
