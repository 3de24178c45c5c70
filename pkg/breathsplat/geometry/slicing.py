import numpy as np

from breathsplat.errors import NoOverlapError
from breathsplat.types.camera_types import Camera
from breathsplat.types.mesh_types import ContourMatch, PlaneContour


def unique_edges(faces: np.ndarray) -> np.ndarray:
    """Undirected mesh edges as sorted vertex pairs, lexicographically ordered."""
    faces = np.asarray(faces, dtype=np.int64)
    edges = np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]])
    return np.unique(np.sort(edges, axis=1), axis=0)


def slice_mesh_plane(
    vertices: np.ndarray, faces: np.ndarray, plane: tuple[np.ndarray, float]
) -> PlaneContour:
    """Intersect a mesh with the plane {x : n·x = offset}.

    Only edges whose endpoints lie strictly on opposite sides contribute, so a
    vertex lying exactly on the plane produces no contour point.
    """
    normal, offset = plane
    vertices = np.asarray(vertices, dtype=np.float64)
    signed = vertices @ np.asarray(normal, dtype=np.float64) - float(offset)
    edges = unique_edges(faces)
    sa, sb = signed[edges[:, 0]], signed[edges[:, 1]]
    crossing = ((sa > 0) & (sb < 0)) | ((sa < 0) & (sb > 0))
    edges = edges[crossing]
    sa, sb = sa[crossing], sb[crossing]
    t = sa / (sa - sb)
    va, vb = vertices[edges[:, 0]], vertices[edges[:, 1]]
    points = va + t[:, None] * (vb - va)
    return PlaneContour(edges=edges, points=points)


def _edge_keys(edges: np.ndarray) -> np.ndarray:
    return (edges[:, 0] << 32) | edges[:, 1]


def match_contours(a: PlaneContour, b: PlaneContour) -> tuple[np.ndarray, np.ndarray]:
    """Indices into `a` and `b` of the entries sharing an edge id, ordered by edge id."""
    _, ia, ib = np.intersect1d(
        _edge_keys(a.edges), _edge_keys(b.edges), assume_unique=True, return_indices=True
    )
    return ia, ib


def contour_rmse(a: PlaneContour, b: PlaneContour) -> ContourMatch:
    """RMSE over contour points matched by edge identity.

    Raises:
        NoOverlapError: If the contours share no edge.
    """
    ia, ib = match_contours(a, b)
    if len(ia) == 0:
        raise NoOverlapError("contours share no edge")
    distances = np.linalg.norm(a.points[ia] - b.points[ib], axis=1)
    total = len(np.union1d(_edge_keys(a.edges), _edge_keys(b.edges)))
    return ContourMatch(
        rmse=float(np.sqrt(np.mean(distances**2))), matched=len(ia), total=total
    )


def target_displacement(a: PlaneContour, b: PlaneContour, camera: Camera) -> float:
    """Displacement of the matched contour point of `a` closest in angle to the optical axis.

    Cosines are compared at 1e-12 resolution and ties go to the smallest edge id.
    """
    ia, ib = match_contours(a, b)
    if len(ia) == 0:
        raise NoOverlapError("contours share no edge")
    rays = a.points[ia] - camera.center
    lengths = np.linalg.norm(rays, axis=1)
    cosines = (rays @ camera.optical_axis) / np.where(lengths > 0, lengths, 1.0)
    cosines = np.round(cosines, 12)
    chosen = int(np.argmax(cosines))
    return float(np.linalg.norm(a.points[ia[chosen]] - b.points[ib[chosen]]))
