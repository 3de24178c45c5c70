import numpy as np

from breathsplat.globals import NEAR_PLANE_MM
from breathsplat.types.camera_types import Camera


PAIR_CHUNK = 1 << 21
EDGE_TOLERANCE = -1e-9


def clip_near(cam_tris: np.ndarray, near: float = NEAR_PLANE_MM) -> np.ndarray:
    """Clip camera-space triangles (F, 3, 3) against z = near.

    A triangle fully in front is kept, one fully behind is dropped, and a
    crossing one becomes the one or two triangles of its visible part.
    """
    inside = cam_tris[:, :, 2] > near
    n_inside = inside.sum(axis=1)
    kept = [cam_tris[n_inside == 3]]
    crossing = np.flatnonzero((n_inside > 0) & (n_inside < 3))
    for f in crossing:
        tri, mask = cam_tris[f], inside[f]
        polygon = []
        for i in range(3):
            a, b = tri[i], tri[(i + 1) % 3]
            if mask[i]:
                polygon.append(a)
            if mask[i] != mask[(i + 1) % 3]:
                t = (near - a[2]) / (b[2] - a[2])
                point = a + t * (b - a)
                point[2] = near
                polygon.append(point)
        for k in range(1, len(polygon) - 1):
            kept.append(np.stack([polygon[0], polygon[k], polygon[k + 1]])[None])
    return np.concatenate(kept, axis=0)


def _edge(ax, ay, bx, by, px, py):
    return (bx - ax) * (py - ay) - (by - ay) * (px - ax)


def render_mesh_depth(
    vertices: np.ndarray,
    faces: np.ndarray,
    camera: Camera,
    near: float = NEAR_PLANE_MM,
) -> np.ndarray:
    """Z-buffer the mesh; returns camera-space depth in mm, +inf where no surface is hit.

    Depth is interpolated perspective-correctly (linearly in 1/z) and the
    nearest surface wins at every pixel.
    """
    width, height = camera.width, camera.height
    depth = np.full(height * width, np.inf)
    faces = np.asarray(faces, dtype=np.int64)
    if len(faces) == 0:
        return depth.reshape(height, width)

    cam = camera.to_camera(np.asarray(vertices, dtype=np.float64))
    tris = clip_near(cam[faces], near)
    if len(tris) == 0:
        return depth.reshape(height, width)

    z = tris[:, :, 2]
    sx = camera.fx * tris[:, :, 0] / z + camera.cx
    sy = camera.fy * tris[:, :, 1] / z + camera.cy
    area = _edge(sx[:, 0], sy[:, 0], sx[:, 1], sy[:, 1], sx[:, 2], sy[:, 2])
    good = np.abs(area) > 1e-12
    sx, sy, z, area = sx[good], sy[good], z[good], area[good]

    x0 = np.clip(np.ceil(sx.min(axis=1)), 0, width).astype(np.int64)
    x1 = np.clip(np.floor(sx.max(axis=1)), -1, width - 1).astype(np.int64)
    y0 = np.clip(np.ceil(sy.min(axis=1)), 0, height).astype(np.int64)
    y1 = np.clip(np.floor(sy.max(axis=1)), -1, height - 1).astype(np.int64)
    span_x = np.maximum(x1 - x0 + 1, 0)
    pixels = span_x * np.maximum(y1 - y0 + 1, 0)

    ends = np.cumsum(pixels)
    start = 0
    while start < len(pixels):
        done = ends[start - 1] if start else 0
        stop = max(int(np.searchsorted(ends, done + PAIR_CHUNK, side="right")), start + 1)
        chunk = np.arange(start, stop)
        tri = np.repeat(chunk, pixels[chunk])
        offsets = np.cumsum(pixels[chunk]) - pixels[chunk]
        local = np.arange(len(tri)) - np.repeat(offsets, pixels[chunk])
        px = x0[tri] + local % np.maximum(span_x[tri], 1)
        py = y0[tri] + local // np.maximum(span_x[tri], 1)
        fx, fy = px.astype(np.float64), py.astype(np.float64)

        l0 = _edge(sx[tri, 1], sy[tri, 1], sx[tri, 2], sy[tri, 2], fx, fy) / area[tri]
        l1 = _edge(sx[tri, 2], sy[tri, 2], sx[tri, 0], sy[tri, 0], fx, fy) / area[tri]
        l2 = 1.0 - l0 - l1
        hit = (l0 >= EDGE_TOLERANCE) & (l1 >= EDGE_TOLERANCE) & (l2 >= EDGE_TOLERANCE)
        inv_z = l0 / z[tri, 0] + l1 / z[tri, 1] + l2 / z[tri, 2]
        hit &= inv_z > 0
        np.minimum.at(depth, py[hit] * width + px[hit], 1.0 / inv_z[hit])
        start = stop
    return depth.reshape(height, width)
