"""Procedural branching airway with an analytic breathing displacement field."""

from collections import deque

import numpy as np
from scipy.spatial.transform import Rotation

from breathsplat.errors import SpecError
from breathsplat.types.config_types import AirwaySpec, DeformationSpec
from breathsplat.types.mesh_types import BreathingMesh, TriMesh
from breathsplat.types.sim_types import Branch, CenterlineTree
from breathsplat.utils.logger import logger


ROOT_DIRECTION = np.array([0.0, 0.0, -1.0])
AZIMUTH_JITTER_DEG = 15.0


def perpendicular_basis(direction: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    d = direction / np.linalg.norm(direction)
    helper = np.array([1.0, 0.0, 0.0]) if abs(d[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    u = helper - np.dot(helper, d) * d
    u /= np.linalg.norm(u)
    return u, np.cross(d, u)


def depth_weights(arcs: np.ndarray, max_arc: float, exponent: float) -> np.ndarray:
    """(arc length from the root / longest root-to-leaf arc) ** exponent."""
    return np.power(np.asarray(arcs) / max_arc, exponent)


def _layout_branches(spec: AirwaySpec) -> list[dict]:
    """Breadth-first list of straight segments: start, direction, length, radius, parent, level."""
    rng = np.random.default_rng(spec.rng_seed)
    root_bend, _ = perpendicular_basis(ROOT_DIRECTION)
    layout = []
    queue = deque(
        [
            dict(
                start=np.zeros(3),
                direction=ROOT_DIRECTION,
                bend=root_bend,
                length=spec.root_length,
                radius=spec.root_radius,
                parent=None,
                level=0,
            )
        ]
    )
    while queue:
        segment = queue.popleft()
        segment["index"] = len(layout)
        layout.append(segment)
        if segment["level"] == spec.tree_depth:
            continue
        d = segment["direction"]
        azimuth = np.radians(rng.uniform(-AZIMUTH_JITTER_DEG, AZIMUTH_JITTER_DEG))
        bend = Rotation.from_rotvec(d * azimuth).apply(segment["bend"])
        end = segment["start"] + segment["length"] * d
        for sign in (1.0, -1.0):
            child_dir = Rotation.from_rotvec(bend * sign * np.radians(spec.branch_angle)).apply(d)
            child_bend = np.cross(child_dir, bend)
            queue.append(
                dict(
                    start=end,
                    direction=child_dir / np.linalg.norm(child_dir),
                    bend=child_bend / np.linalg.norm(child_bend),
                    length=segment["length"] * spec.length_taper,
                    radius=segment["radius"] * spec.radius_taper,
                    parent=segment["index"],
                    level=segment["level"] + 1,
                )
            )
    return layout


def _check_spec(layout: list[dict], dspec: DeformationSpec, spec: AirwaySpec) -> None:
    for segment in layout:
        parent = segment["parent"]
        if parent is not None and segment["radius"] > layout[parent]["length"]:
            raise SpecError(
                f"branch {segment['index']} radius {segment['radius']:.2f} mm exceeds its parent's "
                f"length {layout[parent]['length']:.2f} mm"
            )
    if dspec.radial_amplitude >= spec.root_radius:
        raise SpecError(
            f"radial_amplitude {dspec.radial_amplitude} mm would collapse the {spec.root_radius} mm trachea"
        )


def build_airway(spec: AirwaySpec, dspec: DeformationSpec) -> tuple[BreathingMesh, CenterlineTree]:
    """Triangulated binary tube tree and its expiration displacement field.

    Each branch is a ring-sampled open tube. A vertex moves toward its ring
    centre by radial_amplitude · w · (branch radius / root radius) and along
    `axial_direction` by axial_amplitude · w, where w is the depth weight of
    its centreline station.

    Raises:
        SpecError: If a branch radius exceeds its parent's length or the
            radial amplitude would close the trachea.
    """
    layout = _layout_branches(spec)
    _check_spec(layout, dspec, spec)

    rings, ring_n = spec.rings_per_segment, spec.ring_vertices
    phi = 2.0 * np.pi * np.arange(ring_n) / ring_n
    j = np.arange(ring_n)
    k = np.arange(rings)[:, None]
    a = k * ring_n + j
    b = k * ring_n + (j + 1) % ring_n
    c = (k + 1) * ring_n + (j + 1) % ring_n
    d = (k + 1) * ring_n + j
    quad_faces = np.concatenate(
        [np.stack([a, b, c], axis=-1).reshape(-1, 3), np.stack([a, c, d], axis=-1).reshape(-1, 3)]
    )

    arc_start = {}
    for segment in layout:
        parent = segment["parent"]
        arc_start[segment["index"]] = (
            0.0 if parent is None else arc_start[parent] + layout[parent]["length"]
        )
    max_arc = max(arc_start[s["index"]] + s["length"] for s in layout)

    axial = np.asarray(dspec.axial_direction)
    vertices, faces, deltas, branches = [], [], [], []
    offset = 0
    for segment in layout:
        stations = np.linspace(0.0, segment["length"], rings + 1)
        centres = segment["start"] + stations[:, None] * segment["direction"]
        u, v = perpendicular_basis(segment["direction"])
        radial = np.cos(phi)[:, None] * u + np.sin(phi)[:, None] * v
        ring_points = centres[:, None, :] + segment["radius"] * radial[None, :, :]

        arcs = arc_start[segment["index"]] + stations
        w = depth_weights(arcs, max_arc, dspec.depth_weighting)
        contraction = dspec.radial_amplitude * (segment["radius"] / spec.root_radius)
        delta = (
            -contraction * w[:, None, None] * radial[None, :, :]
            + dspec.axial_amplitude * w[:, None, None] * axial
        )
        shift = dspec.axial_amplitude * w[:, None] * axial

        vertices.append(ring_points.reshape(-1, 3))
        deltas.append(delta.reshape(-1, 3))
        faces.append(quad_faces + offset)
        offset += ring_points.shape[0] * ring_n
        branches.append(
            Branch(
                index=segment["index"],
                parent=segment["parent"],
                level=segment["level"],
                radius=segment["radius"],
                length=segment["length"],
                points=centres,
                arcs=arcs,
                shift=shift,
            )
        )

    insp = TriMesh(vertices=np.concatenate(vertices), faces=np.concatenate(faces))
    bm = BreathingMesh(insp=insp, delta=np.concatenate(deltas))
    max_disp = max_displacement(bm)
    logger.info(
        f"✅ Built airway: {len(branches)} branches, {insp.vertex_count} vertices, "
        f"{insp.face_count} faces, max displacement {max_disp:.2f} mm"
    )
    return bm, CenterlineTree(branches=branches)


def max_displacement(bm: BreathingMesh) -> float:
    return float(np.linalg.norm(bm.delta, axis=1).max())
