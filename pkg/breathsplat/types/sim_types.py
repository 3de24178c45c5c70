from __future__ import annotations

import numpy as np
from pydantic import Field, field_validator

from breathsplat.types.camera_types import Camera
from breathsplat.types.mesh_types import ArrayModel


class Branch(ArrayModel):
    """One straight tube of the airway tree, sampled at its ring centres."""

    index: int = Field(ge=0)
    parent: int | None = None
    level: int = Field(ge=0)
    radius: float = Field(gt=0)
    length: float = Field(gt=0)
    points: np.ndarray
    arcs: np.ndarray
    shift: np.ndarray

    @field_validator("points", "shift", mode="before")
    @classmethod
    def _as_points(cls, value) -> np.ndarray:
        return np.asarray(value, dtype=np.float64).reshape(-1, 3)

    @field_validator("arcs", mode="before")
    @classmethod
    def _as_arcs(cls, value) -> np.ndarray:
        return np.asarray(value, dtype=np.float64).reshape(-1)

    @property
    def direction(self) -> np.ndarray:
        d = self.points[-1] - self.points[0]
        return d / np.linalg.norm(d)


class CenterlineTree(ArrayModel):
    """Branch polylines of the airway, root (trachea entrance) first.

    `arcs` are arc lengths measured from the root; `shift` is the centreline
    displacement from inspiration to expiration at each point.
    """

    branches: list[Branch]

    def children(self, index: int) -> list[int]:
        return [b.index for b in self.branches if b.parent == index]

    def leaves(self) -> list[int]:
        return [b.index for b in self.branches if not self.children(b.index)]

    @property
    def max_arc(self) -> float:
        return max(float(b.arcs[-1]) for b in self.branches)

    def path(self, leaf: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Concatenated root-to-leaf polyline: points (K, 3), arcs (K,), shift (K, 3)."""
        chain = []
        node: int | None = leaf
        while node is not None:
            chain.append(self.branches[node])
            node = self.branches[node].parent
        chain.reverse()
        points, arcs, shift = [chain[0].points], [chain[0].arcs], [chain[0].shift]
        for branch in chain[1:]:
            # first ring centre of a child is the parent's last one
            points.append(branch.points[1:])
            arcs.append(branch.arcs[1:])
            shift.append(branch.shift[1:])
        return np.concatenate(points), np.concatenate(arcs), np.concatenate(shift)


class TrajectoryPose(ArrayModel):
    """A camera station on the inspiration centreline."""

    camera: Camera
    arc: float
    tangent: np.ndarray
    up: np.ndarray
    shift: np.ndarray

    @property
    def center(self) -> np.ndarray:
        return self.camera.center
