"""Ground-truth bronchoscope rendering: ray casting with a light at the camera centre."""

import math
from typing import NamedTuple

import numpy as np

from breathsplat.geometry.mesh import vertex_normals
from breathsplat.globals import NEAR_PLANE_MM
from breathsplat.types.camera_types import Camera
from breathsplat.types.config_types import SceneMaterial


TILE = 16
CANDIDATE_CHUNK = 2048
LATTICE = 256


class RayHits(NamedTuple):
    """Nearest hit per pixel; face is -1 and depth +inf where the ray escapes."""

    face: np.ndarray
    u: np.ndarray
    v: np.ndarray
    depth: np.ndarray


class ValueNoise:
    """Seeded 3-D value noise in [-1, 1], smoothly interpolated between integer lattice points."""

    def __init__(self, seed: int):
        rng = np.random.default_rng(seed)
        self.perm = rng.permutation(LATTICE)
        self.values = rng.uniform(-1.0, 1.0, LATTICE)

    def _lattice(self, i: np.ndarray, j: np.ndarray, k: np.ndarray) -> np.ndarray:
        p = self.perm
        return self.values[p[(p[(p[i % LATTICE] + j) % LATTICE] + k) % LATTICE]]

    def __call__(self, points: np.ndarray) -> np.ndarray:
        base = np.floor(points)
        frac = points - base
        s = frac * frac * (3.0 - 2.0 * frac)
        i, j, k = (base[:, axis].astype(np.int64) for axis in range(3))
        out = np.zeros(len(points))
        for di in (0, 1):
            wx = s[:, 0] if di else 1.0 - s[:, 0]
            for dj in (0, 1):
                wy = s[:, 1] if dj else 1.0 - s[:, 1]
                for dk in (0, 1):
                    wz = s[:, 2] if dk else 1.0 - s[:, 2]
                    out += wx * wy * wz * self._lattice(i + di, j + dj, k + dk)
        return out


def _tile_candidates(
    cam_tris: np.ndarray, camera: Camera, near: float
) -> tuple[list[np.ndarray], int]:
    """Triangle ids that may be hit by some ray of each 16x16 tile."""
    tiles_x, tiles_y = math.ceil(camera.width / TILE), math.ceil(camera.height / TILE)
    z = cam_tris[:, :, 2]
    in_front = np.all(z > near, axis=1)
    crossing = np.flatnonzero(np.any(z > near, axis=1) & ~in_front)

    ids = np.flatnonzero(in_front)
    tri = cam_tris[ids]
    sx = camera.fx * tri[:, :, 0] / tri[:, :, 2] + camera.cx
    sy = camera.fy * tri[:, :, 1] / tri[:, :, 2] + camera.cy
    x0 = np.clip(np.floor(sx.min(axis=1) / TILE), 0, tiles_x).astype(np.int64)
    x1 = np.clip(np.floor(sx.max(axis=1) / TILE), -1, tiles_x - 1).astype(np.int64)
    y0 = np.clip(np.floor(sy.min(axis=1) / TILE), 0, tiles_y).astype(np.int64)
    y1 = np.clip(np.floor(sy.max(axis=1) / TILE), -1, tiles_y - 1).astype(np.int64)

    candidates = []
    for ty in range(tiles_y):
        rows = (y0 <= ty) & (y1 >= ty)
        for tx in range(tiles_x):
            hit = ids[rows & (x0 <= tx) & (x1 >= tx)]
            candidates.append(np.concatenate([hit, crossing]))
    return candidates, tiles_x


def cast_rays(
    vertices: np.ndarray, faces: np.ndarray, camera: Camera, near: float = NEAR_PLANE_MM
) -> RayHits:
    """Nearest Möller-Trumbore hit for every pixel ray; depth is camera-space z."""
    height, width = camera.height, camera.width
    face = np.full((height, width), -1, dtype=np.int64)
    u_img, v_img = np.zeros((height, width)), np.zeros((height, width))
    depth = np.full((height, width), np.inf)
    faces = np.asarray(faces, dtype=np.int64)
    if len(faces) == 0:
        return RayHits(face, u_img, v_img, depth)

    cam_tris = camera.to_camera(np.asarray(vertices, dtype=np.float64))[faces]
    rays = camera.pixel_rays()
    candidates, tiles_x = _tile_candidates(cam_tris, camera, near)

    for tile_id, cand in enumerate(candidates):
        if len(cand) == 0:
            continue
        ty, tx = divmod(tile_id, tiles_x)
        ys = slice(ty * TILE, min((ty + 1) * TILE, height))
        xs = slice(tx * TILE, min((tx + 1) * TILE, width))
        d = rays[ys, xs].reshape(-1, 3)
        best_t = np.full(len(d), np.inf)
        best_f = np.full(len(d), -1, dtype=np.int64)
        best_u, best_v = np.zeros(len(d)), np.zeros(len(d))
        for start in range(0, len(cand), CANDIDATE_CHUNK):
            ids = cand[start : start + CANDIDATE_CHUNK]
            v0, e1, e2 = cam_tris[ids, 0], cam_tris[ids, 1] - cam_tris[ids, 0], cam_tris[ids, 2] - cam_tris[ids, 0]
            pvec = np.cross(d[:, None, :], e2[None, :, :])
            det = np.einsum("mk,pmk->pm", e1, pvec)
            ok = np.abs(det) > 1e-12
            inv = np.where(ok, 1.0 / np.where(ok, det, 1.0), 0.0)
            tvec = -v0
            u = np.einsum("mk,pmk->pm", tvec, pvec) * inv
            qvec = np.cross(tvec, e1)
            v = np.einsum("pk,mk->pm", d, qvec) * inv
            t = np.einsum("mk,mk->m", e2, qvec)[None, :] * inv
            hit = ok & (u >= 0) & (v >= 0) & (u + v <= 1) & (t > near)
            t = np.where(hit, t, np.inf)
            nearest = np.argmin(t, axis=1)
            rows = np.arange(len(d))
            t_min = t[rows, nearest]
            better = t_min < best_t
            best_t = np.where(better, t_min, best_t)
            best_f = np.where(better, ids[nearest], best_f)
            best_u = np.where(better, u[rows, nearest], best_u)
            best_v = np.where(better, v[rows, nearest], best_v)
        shape = (ys.stop - ys.start, xs.stop - xs.start)
        depth[ys, xs] = best_t.reshape(shape)
        face[ys, xs] = best_f.reshape(shape)
        u_img[ys, xs] = best_u.reshape(shape)
        v_img[ys, xs] = best_v.reshape(shape)
    return RayHits(face, u_img, v_img, depth)


def _interpolate(values: np.ndarray, faces: np.ndarray, hits: RayHits, mask: np.ndarray) -> np.ndarray:
    corners = values[faces[hits.face[mask]]]
    u, v = hits.u[mask][:, None], hits.v[mask][:, None]
    return (1.0 - u - v) * corners[:, 0] + u * corners[:, 1] + v * corners[:, 2]


def render_ground_truth(
    vertices: np.ndarray,
    faces: np.ndarray,
    camera: Camera,
    material: SceneMaterial,
    exposure_gain: float = 1.0,
    material_vertices: np.ndarray | None = None,
    white_balance: tuple[float, float, float] = (1.0, 1.0, 1.0),
) -> tuple[np.ndarray, np.ndarray]:
    """Shade the mesh as seen by a bronchoscope with its light at the lens.

    Args:
        vertices: Current (deformed) vertex positions.
        faces: Triangle indices.
        camera: Camera, also the point-light position.
        material: Albedo, specular and light parameters.
        exposure_gain: Scalar camera gain applied after clamping.
        material_vertices: Rest positions the albedo texture is attached to;
            defaults to `vertices`.
        white_balance: Per-channel gain multipliers.

    Returns:
        (rgb in [0, 1], depth in mm with +inf where no surface is hit).
    """
    faces = np.asarray(faces, dtype=np.int64)
    hits = cast_rays(vertices, faces, camera)
    rgb = np.zeros((camera.height, camera.width, 3))
    mask = hits.face >= 0
    if not mask.any():
        return rgb, hits.depth

    rest = vertices if material_vertices is None else material_vertices
    rest_points = _interpolate(np.asarray(rest, dtype=np.float64), faces, hits, mask)
    noise = ValueNoise(material.rng_seed)(rest_points / material.albedo_noise_scale)
    albedo = np.asarray(material.base_albedo) * (1.0 + material.albedo_noise_amplitude * noise[:, None])
    albedo = np.clip(albedo, 0.0, None)

    normals = _interpolate(vertex_normals(vertices, faces), faces, hits, mask) @ camera.rotation.T
    normals /= np.maximum(np.linalg.norm(normals, axis=1, keepdims=True), 1e-12)
    rays = camera.pixel_rays()[mask]
    points = rays * hits.depth[mask][:, None]
    distance = np.linalg.norm(points, axis=1)
    to_light = -points / distance[:, None]
    cos_nl = np.einsum("pk,pk->p", normals, to_light)
    # shade the side facing the scope
    cos_nl = np.abs(cos_nl)

    irradiance = material.light_intensity / distance**2
    diffuse = irradiance * cos_nl
    specular = material.specular_strength * irradiance * cos_nl**material.specular_exponent
    shaded = albedo * diffuse[:, None] + specular[:, None]
    if material.vignetting_power > 0:
        cos_axis = rays[:, 2] / np.linalg.norm(rays, axis=1)
        shaded *= (cos_axis**material.vignetting_power)[:, None]

    gain = exposure_gain * np.asarray(white_balance)
    rgb[mask] = np.clip(gain * np.clip(shaded, 0.0, 1.0), 0.0, 1.0)
    return rgb, hits.depth
