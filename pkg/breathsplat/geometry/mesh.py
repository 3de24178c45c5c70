import numpy as np

from breathsplat.errors import DegenerateFaceError, DomainError
from breathsplat.types.mesh_types import BreathingMesh, FaceFrame, TriMesh


MIN_FACE_AREA = 1e-12


def deform_mesh(bm: BreathingMesh, alpha: float) -> np.ndarray:
    """Vertices of the airway at breathing phase `alpha`.

    Args:
        bm: Inspiration mesh and displacement field.
        alpha: Breathing phase, 0 = full inspiration, 1 = full expiration.

    Returns:
        (N_v, 3) array V_insp + alpha * delta.

    Raises:
        DomainError: If alpha is outside [0, 1].
    """
    if not 0.0 <= alpha <= 1.0:
        raise DomainError(f"breathing phase {alpha} outside [0, 1]")
    return bm.insp.vertices + alpha * bm.delta


def face_corners(vertices: np.ndarray, faces: np.ndarray) -> np.ndarray:
    return np.asarray(vertices, dtype=np.float64)[np.asarray(faces, dtype=np.int64)]


def face_areas(vertices: np.ndarray, faces: np.ndarray) -> np.ndarray:
    tri = face_corners(vertices, faces)
    return 0.5 * np.linalg.norm(np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0]), axis=1)


def mean_edge_length(mesh: TriMesh) -> float:
    tri = face_corners(mesh.vertices, mesh.faces)
    lengths = np.linalg.norm(tri - np.roll(tri, -1, axis=1), axis=2)
    return float(lengths.mean())


def face_frame(vertices: np.ndarray, face) -> FaceFrame:
    """Orthonormal frame of one triangle: centroid origin, first-edge tangent.

    Raises:
        DegenerateFaceError: If the triangle area is below 1e-12 mm².
    """
    v0, v1, v2 = np.asarray(vertices, dtype=np.float64)[np.asarray(face, dtype=np.int64)]
    cross = np.cross(v1 - v0, v2 - v0)
    twice_area = np.linalg.norm(cross)
    if 0.5 * twice_area <= MIN_FACE_AREA:
        raise DegenerateFaceError(f"face {tuple(face)} has near-zero area")
    normal = cross / twice_area
    edge = v1 - v0
    edge = edge - np.dot(edge, normal) * normal
    tangent = edge / np.linalg.norm(edge)
    bitangent = np.cross(normal, tangent)
    return FaceFrame(
        origin=(v0 + v1 + v2) / 3.0, normal=normal, tangent=tangent, bitangent=bitangent
    )


def face_frames(vertices: np.ndarray, faces: np.ndarray) -> np.ndarray:
    """Vectorized face frames as rotation matrices (F, 3, 3), columns tangent/bitangent/normal."""
    tri = face_corners(vertices, faces)
    e1 = tri[:, 1] - tri[:, 0]
    cross = np.cross(e1, tri[:, 2] - tri[:, 0])
    norms = np.linalg.norm(cross, axis=1)
    if np.any(0.5 * norms <= MIN_FACE_AREA):
        bad = int(np.argmax(0.5 * norms <= MIN_FACE_AREA))
        raise DegenerateFaceError(f"face {bad} has near-zero area")
    normal = cross / norms[:, None]
    e1 = e1 - np.sum(e1 * normal, axis=1, keepdims=True) * normal
    tangent = e1 / np.linalg.norm(e1, axis=1, keepdims=True)
    bitangent = np.cross(normal, tangent)
    return np.stack([tangent, bitangent, normal], axis=2)


def vertex_normals(vertices: np.ndarray, faces: np.ndarray) -> np.ndarray:
    """Area-weighted unit vertex normals."""
    tri = face_corners(vertices, faces)
    weighted = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
    normals = np.zeros((len(vertices), 3))
    for corner in range(3):
        np.add.at(normals, faces[:, corner], weighted)
    lengths = np.linalg.norm(normals, axis=1, keepdims=True)
    return normals / np.where(lengths > 0, lengths, 1.0)
