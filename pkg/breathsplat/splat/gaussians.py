import numpy as np

from breathsplat.errors import DomainError, EmptyMeshError
from breathsplat.geometry.mesh import face_areas, mean_edge_length
from breathsplat.globals import SH_C0
from breathsplat.types.mesh_types import FaceFrame, TriMesh
from breathsplat.types.splat_types import AnchoredGaussian, GaussianCloud
from breathsplat.utils.logger import logger


INIT_OPACITY = 0.8
NORMAL_SCALE_FRACTION = 1e-2


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - np.max(logits, axis=-1, keepdims=True)
    weights = np.exp(shifted)
    return weights / np.sum(weights, axis=-1, keepdims=True)


def resolve_position(g: AnchoredGaussian, vertices: np.ndarray, faces: np.ndarray) -> np.ndarray:
    """Centre of a Gaussian: softmax(bary_logits)-weighted corners of its parent face.

    Raises:
        IndexError: If the face id is not a face of `faces`.
    """
    faces = np.asarray(faces, dtype=np.int64)
    if not 0 <= g.face_id < len(faces):
        raise IndexError(f"face id {g.face_id} out of range for {len(faces)} faces")
    corners = np.asarray(vertices, dtype=np.float64)[faces[g.face_id]]
    return softmax(g.bary_logits) @ corners


def resolve_covariance(g: AnchoredGaussian, frame: FaceFrame, normal_scale: float) -> np.ndarray:
    """R diag(s_u², s_v², ε_n²) Rᵀ with R = [tangent | bitangent | normal]."""
    s_u, s_v = np.exp(g.log_scales)
    rotation = frame.rotation
    return rotation @ np.diag([s_u**2, s_v**2, normal_scale**2]) @ rotation.T


def seed_gaussians(
    mesh: TriMesh,
    per_area_density: float,
    rng_seed: int,
    init_color: float = 0.5,
    opacity: float = INIT_OPACITY,
) -> GaussianCloud:
    """Tile every face with max(1, round(density * area)) thin discs.

    Args:
        mesh: Mesh the cloud anchors to (its topology, not its pose, matters).
        per_area_density: Gaussians per mm².
        rng_seed: Seed for the barycentric logits.
        init_color: Rendered grey level of a fresh Gaussian; 0.5 gives zero SH coefficients.
        opacity: Frozen opacity given to every Gaussian.

    Returns:
        GaussianCloud with ε_n = 1e-2 x mean edge length.

    Raises:
        DomainError: If the density is not positive.
        EmptyMeshError: If the mesh has no faces.
    """
    if per_area_density <= 0:
        raise DomainError(f"density must be positive, got {per_area_density}")
    if len(mesh.faces) == 0:
        raise EmptyMeshError("cannot seed Gaussians on a mesh without faces")

    areas = face_areas(mesh.vertices, mesh.faces)
    counts = np.maximum(1, np.rint(per_area_density * areas)).astype(np.int64)
    face_id = np.repeat(np.arange(len(areas)), counts)
    n = len(face_id)

    rng = np.random.default_rng(rng_seed)
    bary_logits = rng.uniform(-1.0, 1.0, size=(n, 3))
    half_side = np.sqrt(areas[face_id]) / 2.0
    log_scales = np.repeat(np.log(half_side)[:, None], 2, axis=1)
    sh = np.zeros((n, 4, 3))
    sh[:, 0, :] = (init_color - 0.5) / SH_C0

    cloud = GaussianCloud(
        face_id=face_id,
        bary_logits=bary_logits,
        log_scales=log_scales,
        sh=sh,
        opacity=np.full(n, opacity),
        normal_scale=NORMAL_SCALE_FRACTION * mean_edge_length(mesh),
    )
    logger.info(f"Seeded {n} Gaussians on {len(areas)} faces")
    return cloud


def density_for(mesh: TriMesh, gaussians_per_face: float) -> float:
    """Per-area density that yields `gaussians_per_face` on a face of mean area."""
    return gaussians_per_face / float(face_areas(mesh.vertices, mesh.faces).mean())
