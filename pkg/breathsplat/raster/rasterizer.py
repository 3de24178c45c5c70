"""Differentiable tile-based rasterizer for mesh-anchored Gaussians.

Forward pass: Gaussians are projected with EWA, binned into screen tiles,
sorted front to back (ties by index) and alpha-composited per pixel in
fixed-size chunks of each tile's list, stopping once every pixel of a tile
is opaque. Gradients come from torch autograd over the same computation, so
they are exact for the forward pass as written, including the cut-offs.
"""

import math
from typing import NamedTuple

import numpy as np
import torch

from breathsplat.errors import AnchoringError, ShapeError
from breathsplat.geometry.mesh import face_frame, face_frames
from breathsplat.raster.projection import max_eigenvalue, project_gaussian, project_gaussians
from breathsplat.splat.gaussians import resolve_covariance, resolve_position
from breathsplat.splat.sh import evaluate_sh, sh_to_rgb
from breathsplat.types.camera_types import (
    Camera,
    RasterSettings,
    RenderGradients,
    RenderOutput,
)
from breathsplat.types.splat_types import GaussianCloud


DTYPE = torch.float64
DEPTH_ALPHA_EPS = 1e-8

torch.use_deterministic_algorithms(True)


class RenderTensors(NamedTuple):
    rgb: torch.Tensor
    depth: torch.Tensor
    alpha: torch.Tensor


class CloudTensors(NamedTuple):
    face_id: torch.Tensor
    bary_logits: torch.Tensor
    log_scales: torch.Tensor
    sh: torch.Tensor
    opacity: torch.Tensor


def to_tensor(array: np.ndarray, requires_grad: bool = False) -> torch.Tensor:
    tensor = torch.tensor(np.asarray(array), dtype=DTYPE)
    return tensor.requires_grad_(requires_grad)


def cloud_tensors(cloud: GaussianCloud, requires_grad: bool = False) -> CloudTensors:
    return CloudTensors(
        face_id=torch.as_tensor(cloud.face_id, dtype=torch.long),
        bary_logits=to_tensor(cloud.bary_logits, requires_grad),
        log_scales=to_tensor(cloud.log_scales, requires_grad),
        sh=to_tensor(cloud.sh, requires_grad),
        opacity=to_tensor(cloud.opacity),
    )


def check_anchoring(cloud: GaussianCloud, vertices: np.ndarray, faces: np.ndarray) -> None:
    faces = np.asarray(faces)
    cloud.check_anchoring(len(faces))
    if len(faces) and faces.max() >= len(vertices):
        raise AnchoringError(f"faces reference vertex {faces.max()} of {len(vertices)}")
    if len(cloud):
        face_frames(vertices, faces[np.unique(cloud.face_id)])


def oversized(covs: np.ndarray, width: int, height: int, settings: RasterSettings) -> np.ndarray:
    """Splats whose 3-sigma screen radius exceeds `max_extent` times the larger image side."""
    return 3.0 * np.sqrt(max_eigenvalue(covs)) > settings.max_extent * max(width, height)


def anchored_geometry(
    vertices: torch.Tensor,
    faces: torch.Tensor,
    face_id: torch.Tensor,
    bary_logits: torch.Tensor,
    log_scales: torch.Tensor,
    normal_scale: float,
) -> tuple[torch.Tensor, torch.Tensor]:
    """World-space centres (N, 3) and covariances (N, 3, 3) of anchored discs."""
    tri = vertices[faces[face_id]]
    weights = torch.softmax(bary_logits, dim=-1)
    mu = torch.einsum("nj,njk->nk", weights, tri)
    e1 = tri[:, 1] - tri[:, 0]
    cross = torch.linalg.cross(e1, tri[:, 2] - tri[:, 0], dim=-1)
    normal = cross / torch.linalg.norm(cross, dim=-1, keepdim=True)
    tangent = e1 / torch.linalg.norm(e1, dim=-1, keepdim=True)
    bitangent = torch.linalg.cross(normal, tangent, dim=-1)
    rotation = torch.stack([tangent, bitangent, normal], dim=-1)
    variances = torch.cat(
        [torch.exp(2.0 * log_scales), torch.full_like(log_scales[:, :1], normal_scale**2)], dim=-1
    )
    cov = (rotation * variances[:, None, :]) @ rotation.transpose(1, 2)
    return mu, cov


def bin_to_tiles(
    means: np.ndarray,
    covs: np.ndarray,
    opacity: np.ndarray,
    depths: np.ndarray,
    visible: np.ndarray,
    width: int,
    height: int,
    settings: RasterSettings,
) -> tuple[np.ndarray, np.ndarray, int, int]:
    """Assign Gaussians to the tiles their contribution ellipse can reach.

    Returns:
        index: (tiles, K) Gaussian ids per tile in front-to-back order, -1 padded.
        counts: number of Gaussians per tile.
        tiles_x, tiles_y: tile grid size.
    """
    ts = settings.tile_size
    tiles_x, tiles_y = math.ceil(width / ts), math.ceil(height / ts)
    n_tiles = tiles_x * tiles_y

    with np.errstate(divide="ignore"):
        q_max = 2.0 * np.log(opacity / settings.min_alpha)
    radius = np.sqrt(np.maximum(q_max, 0.0) * max_eigenvalue(covs))
    mx, my = means[:, 0], means[:, 1]
    live = (
        visible
        & ~oversized(covs, width, height, settings)
        & (q_max > 0)
        & (mx + radius >= 0)
        & (mx - radius <= width - 1)
        & (my + radius >= 0)
        & (my - radius <= height - 1)
    )

    x0 = np.clip(np.floor((mx - radius) / ts), 0, tiles_x - 1).astype(np.int64)
    x1 = np.clip(np.floor((mx + radius) / ts), 0, tiles_x - 1).astype(np.int64)
    y0 = np.clip(np.floor((my - radius) / ts), 0, tiles_y - 1).astype(np.int64)
    y1 = np.clip(np.floor((my + radius) / ts), 0, tiles_y - 1).astype(np.int64)
    span_x = np.where(live, x1 - x0 + 1, 0)
    span_y = np.where(live, y1 - y0 + 1, 0)
    per_gaussian = span_x * span_y

    n = len(means)
    rank = np.empty(n, dtype=np.int64)
    rank[np.argsort(depths, kind="stable")] = np.arange(n)

    gid = np.repeat(np.arange(n), per_gaussian)
    local = np.arange(len(gid)) - np.repeat(np.cumsum(per_gaussian) - per_gaussian, per_gaussian)
    tx = x0[gid] + local % np.maximum(span_x[gid], 1)
    ty = y0[gid] + local // np.maximum(span_x[gid], 1)
    tile = ty * tiles_x + tx

    order = np.argsort(tile * n + rank[gid], kind="stable")
    tile, gid = tile[order], gid[order]
    counts = np.bincount(tile, minlength=n_tiles)
    starts = np.cumsum(counts) - counts
    slot = np.arange(len(tile)) - starts[tile]
    index = np.full((n_tiles, max(int(counts.max(initial=0)), 1)), -1, dtype=np.int64)
    index[tile, slot] = gid
    return index, counts, tiles_x, tiles_y


def _composite_chunk(
    pixels: torch.Tensor,
    means: torch.Tensor,
    conics: torch.Tensor,
    opacity: torch.Tensor,
    colors: torch.Tensor,
    depths: torch.Tensor,
    valid: torch.Tensor,
    transmittance: torch.Tensor,
    min_alpha: float,
    min_transmittance: float,
) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor, torch.Tensor]:
    # pixels (T, P, 2); transmittance (T, P) entering the chunk; Gaussian attributes (T, C, ...)
    d = pixels[:, :, None, :] - means[:, None, :, :]
    dx, dy = d[..., 0], d[..., 1]
    q = (
        conics[:, None, :, 0] * dx * dx
        + 2.0 * conics[:, None, :, 1] * dx * dy
        + conics[:, None, :, 2] * dy * dy
    )
    alpha = opacity[:, None, :] * torch.exp(-0.5 * q)
    keep = valid[:, None, :] & (alpha >= min_alpha)
    alpha = torch.where(keep, alpha, torch.zeros_like(alpha))
    before = transmittance[..., None] * torch.cumprod(
        torch.cat([torch.ones_like(alpha[..., :1]), 1.0 - alpha[..., :-1]], dim=-1), dim=-1
    )
    weights = alpha * before * (before.detach() >= min_transmittance)
    rgb = torch.einsum("tpk,tkc->tpc", weights, colors)
    depth_sum = torch.einsum("tpk,tk->tp", weights, depths)
    after = before[..., -1] * (1.0 - alpha[..., -1])
    return rgb, weights.sum(dim=-1), depth_sum, after


def render_tensors(
    vertices: torch.Tensor,
    faces: torch.Tensor,
    params: CloudTensors,
    normal_scale: float,
    camera: Camera,
    settings: RasterSettings | None = None,
) -> RenderTensors:
    """Differentiable forward pass; images are (H, W[, 3]) tensors in the autograd graph."""
    settings = settings or RasterSettings()
    height, width, ts = camera.height, camera.width, settings.tile_size
    if len(params.face_id) == 0:
        zeros = torch.zeros((height, width), dtype=DTYPE)
        return RenderTensors(rgb=torch.zeros((height, width, 3), dtype=DTYPE), depth=zeros, alpha=zeros)

    mu, cov = anchored_geometry(
        vertices, faces, params.face_id, params.bary_logits, params.log_scales, normal_scale
    )
    projected = project_gaussians(mu, cov, camera, settings.near, settings.cov2d_floor)
    center = torch.as_tensor(camera.center, dtype=DTYPE)
    view = mu - center
    colors = sh_to_rgb(params.sh, view / torch.linalg.norm(view, dim=-1, keepdim=True))

    covs = projected.covs
    det = covs[:, 0, 0] * covs[:, 1, 1] - covs[:, 0, 1] ** 2
    conics = torch.stack([covs[:, 1, 1], -covs[:, 0, 1], covs[:, 0, 0]], dim=-1) / det[:, None]

    index, counts, tiles_x, tiles_y = bin_to_tiles(
        projected.means.detach().numpy(),
        covs.detach().numpy(),
        params.opacity.detach().numpy(),
        projected.depths.detach().numpy(),
        projected.visible.numpy(),
        width,
        height,
        settings,
    )
    n_tiles, n_pixels = tiles_x * tiles_y, ts * ts

    local_y, local_x = torch.meshgrid(
        torch.arange(ts, dtype=DTYPE), torch.arange(ts, dtype=DTYPE), indexing="ij"
    )
    local = torch.stack([local_x.reshape(-1), local_y.reshape(-1)], dim=-1)
    tile_ids = torch.arange(n_tiles)
    origins = torch.stack([(tile_ids % tiles_x) * ts, (tile_ids // tiles_x) * ts], dim=-1).to(DTYPE)
    pixels = origins[:, None, :] + local[None, :, :]

    rgb = torch.zeros((n_tiles, n_pixels, 3), dtype=DTYPE)
    acc = torch.zeros((n_tiles, n_pixels), dtype=DTYPE)
    depth_sum = torch.zeros((n_tiles, n_pixels), dtype=DTYPE)
    transmittance = torch.ones((n_tiles, n_pixels), dtype=DTYPE)
    index_t, counts_t = torch.as_tensor(index), torch.as_tensor(counts)
    active = tile_ids[counts_t > 0]
    for start in range(0, index.shape[1], settings.chunk_size):
        # tiles leave once their list is exhausted or every pixel is opaque
        alive = (counts_t[active] > start) & (
            transmittance[active].detach() >= settings.min_transmittance
        ).any(dim=-1)
        active = active[alive]
        if len(active) == 0:
            break
        ids = index_t[active, start : start + settings.chunk_size]
        valid = ids >= 0
        ids = ids.clamp(min=0)
        chunk_rgb, chunk_acc, chunk_depth, after = _composite_chunk(
            pixels[active],
            projected.means[ids],
            conics[ids],
            params.opacity[ids],
            colors[ids],
            projected.depths[ids],
            valid,
            transmittance[active],
            settings.min_alpha,
            settings.min_transmittance,
        )
        rgb = rgb.index_add(0, active, chunk_rgb)
        acc = acc.index_add(0, active, chunk_acc)
        depth_sum = depth_sum.index_add(0, active, chunk_depth)
        transmittance = transmittance.index_copy(0, active, after)

    def assemble(tiles: torch.Tensor, channels: int) -> torch.Tensor:
        stacked = tiles.reshape(tiles_y, tiles_x, ts, ts, channels)
        image = stacked.permute(0, 2, 1, 3, 4).reshape(tiles_y * ts, tiles_x * ts, channels)
        return image[:height, :width]

    rgb = assemble(rgb, 3)
    alpha = assemble(acc[..., None], 1)[..., 0]
    depth_sum = assemble(depth_sum[..., None], 1)[..., 0]
    covered = alpha > DEPTH_ALPHA_EPS
    depth = torch.where(covered, depth_sum / torch.where(covered, alpha, torch.ones_like(alpha)), torch.zeros_like(alpha))
    return RenderTensors(rgb=rgb, depth=depth, alpha=alpha)


def render(
    cloud: GaussianCloud,
    deformed_vertices: np.ndarray,
    faces: np.ndarray,
    camera: Camera,
    settings: RasterSettings | None = None,
) -> RenderOutput:
    """Render the cloud anchored to the deformed mesh from `camera`.

    Raises:
        AnchoringError: If the cloud references faces the mesh does not have.
    """
    check_anchoring(cloud, deformed_vertices, faces)
    with torch.no_grad():
        out = render_tensors(
            to_tensor(deformed_vertices),
            torch.as_tensor(np.asarray(faces), dtype=torch.long),
            cloud_tensors(cloud),
            cloud.normal_scale,
            camera,
            settings,
        )
    return RenderOutput(rgb=out.rgb.numpy(), depth=out.depth.numpy(), alpha=out.alpha.numpy())


def render_backward(
    cloud: GaussianCloud,
    deformed_vertices: np.ndarray,
    faces: np.ndarray,
    camera: Camera,
    loss_grad_rgb: np.ndarray,
    settings: RasterSettings | None = None,
) -> RenderGradients:
    """Pull an image-space loss gradient back to the Gaussian parameters and mesh vertices.

    Raises:
        ShapeError: If `loss_grad_rgb` is not (H, W, 3) for this camera.
        AnchoringError: If the cloud does not fit the mesh.
    """
    loss_grad_rgb = np.asarray(loss_grad_rgb, dtype=np.float64)
    if loss_grad_rgb.shape != (camera.height, camera.width, 3):
        raise ShapeError(
            f"loss gradient {loss_grad_rgb.shape} does not match image {(camera.height, camera.width, 3)}"
        )
    check_anchoring(cloud, deformed_vertices, faces)
    vertices = to_tensor(deformed_vertices, requires_grad=True)
    params = cloud_tensors(cloud, requires_grad=True)
    leaves = [params.bary_logits, params.log_scales, params.sh, vertices]

    with torch.enable_grad():
        out = render_tensors(
            vertices,
            torch.as_tensor(np.asarray(faces), dtype=torch.long),
            params,
            cloud.normal_scale,
            camera,
            settings,
        )
        if out.rgb.requires_grad:
            grads = torch.autograd.grad(
                out.rgb, leaves, grad_outputs=to_tensor(loss_grad_rgb), allow_unused=True
            )
        else:
            grads = [None] * len(leaves)

    bary, scales, sh, verts = (
        torch.zeros_like(leaf) if g is None else g for g, leaf in zip(grads, leaves)
    )
    return RenderGradients(
        bary_logits=bary.numpy(),
        log_scales=scales.numpy(),
        sh=sh.numpy(),
        vertices=verts.numpy(),
    )


def render_reference(
    cloud: GaussianCloud,
    deformed_vertices: np.ndarray,
    faces: np.ndarray,
    camera: Camera,
    settings: RasterSettings | None = None,
) -> RenderOutput:
    """Brute-force evaluation of every Gaussian at every pixel, no tiling. Test oracle."""
    settings = settings or RasterSettings()
    check_anchoring(cloud, deformed_vertices, faces)
    faces = np.asarray(faces, dtype=np.int64)
    splats = []
    for k in range(len(cloud)):
        g = cloud[k]
        mu = resolve_position(g, deformed_vertices, faces)
        frame = face_frame(deformed_vertices, faces[g.face_id])
        cov = resolve_covariance(g, frame, cloud.normal_scale)
        projected = project_gaussian(mu, cov, camera, settings.near, settings.cov2d_floor)
        if projected is None or oversized(projected.cov, camera.width, camera.height, settings):
            continue
        color = evaluate_sh(g.sh, mu - camera.center)
        splats.append((projected.depth, k, projected, color, g.opacity))
    splats.sort(key=lambda s: (s[0], s[1]))

    ys, xs = np.mgrid[0 : camera.height, 0 : camera.width].astype(np.float64)
    rgb = np.zeros((camera.height, camera.width, 3))
    acc = np.zeros((camera.height, camera.width))
    depth_sum = np.zeros((camera.height, camera.width))
    transmittance = np.ones((camera.height, camera.width))
    for depth, _, projected, color, opacity in splats:
        conic = np.linalg.inv(projected.cov)
        dx, dy = xs - projected.mean[0], ys - projected.mean[1]
        q = conic[0, 0] * dx * dx + 2.0 * conic[0, 1] * dx * dy + conic[1, 1] * dy * dy
        alpha = opacity * np.exp(-0.5 * q)
        alpha = np.where(alpha >= settings.min_alpha, alpha, 0.0)
        weight = alpha * transmittance * (transmittance >= settings.min_transmittance)
        rgb += weight[..., None] * color
        acc += weight
        depth_sum += weight * depth
        transmittance = transmittance * (1.0 - alpha)
    covered = acc > DEPTH_ALPHA_EPS
    depth_image = np.where(covered, depth_sum / np.where(covered, acc, 1.0), 0.0)
    return RenderOutput(rgb=rgb, depth=depth_image, alpha=acc)
