from __future__ import annotations

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator


class ArrayModel(BaseModel):
    """Base for records that carry numpy arrays."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


class TriMesh(ArrayModel):
    """Triangle mesh, lengths in millimeters, faces 0-based."""

    vertices: np.ndarray
    faces: np.ndarray

    @field_validator("vertices", mode="before")
    @classmethod
    def _as_points(cls, value) -> np.ndarray:
        points = np.asarray(value, dtype=np.float64)
        if points.ndim != 2 or points.shape[1] != 3:
            raise ValueError(f"vertices must be (N, 3), got {points.shape}")
        return points

    @field_validator("faces", mode="before")
    @classmethod
    def _as_triples(cls, value) -> np.ndarray:
        triples = np.asarray(value, dtype=np.int64)
        if triples.ndim != 2 or triples.shape[1] != 3:
            raise ValueError(f"faces must be (F, 3), got {triples.shape}")
        return triples

    @model_validator(mode="after")
    def _check_topology(self) -> TriMesh:
        if len(self.vertices) < 3 or len(self.faces) < 1:
            raise ValueError("a mesh needs at least 3 vertices and 1 face")
        if self.faces.min() < 0 or self.faces.max() >= len(self.vertices):
            raise ValueError("face index out of range")
        f = self.faces
        if np.any((f[:, 0] == f[:, 1]) | (f[:, 1] == f[:, 2]) | (f[:, 0] == f[:, 2])):
            raise ValueError("face with repeated vertex index")
        return self

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    @property
    def face_count(self) -> int:
        return len(self.faces)


class BreathingMesh(ArrayModel):
    """Inspiration mesh plus the fixed displacement field toward expiration."""

    insp: TriMesh
    delta: np.ndarray

    @field_validator("delta", mode="before")
    @classmethod
    def _as_vectors(cls, value) -> np.ndarray:
        return np.asarray(value, dtype=np.float64)

    @model_validator(mode="after")
    def _check_lengths(self) -> BreathingMesh:
        if self.delta.shape != self.insp.vertices.shape:
            raise ValueError(
                f"delta shape {self.delta.shape} does not match vertices {self.insp.vertices.shape}"
            )
        return self

    @classmethod
    def from_pair(cls, insp: TriMesh, exp: TriMesh) -> BreathingMesh:
        if insp.vertex_count != exp.vertex_count or not np.array_equal(insp.faces, exp.faces):
            raise ValueError("paired meshes must share vertex count and face list")
        return cls(insp=insp, delta=exp.vertices - insp.vertices)

    @property
    def faces(self) -> np.ndarray:
        return self.insp.faces

    @property
    def expiration(self) -> TriMesh:
        return TriMesh(vertices=self.insp.vertices + self.delta, faces=self.insp.faces)


class FaceFrame(ArrayModel):
    origin: np.ndarray
    normal: np.ndarray
    tangent: np.ndarray
    bitangent: np.ndarray

    @property
    def rotation(self) -> np.ndarray:
        """Columns are tangent, bitangent, normal."""
        return np.stack([self.tangent, self.bitangent, self.normal], axis=1)


class PlaneContour(ArrayModel):
    """Plane/mesh intersection: one point per crossing edge, keyed by edge id."""

    edges: np.ndarray
    points: np.ndarray

    @field_validator("edges", mode="before")
    @classmethod
    def _as_edges(cls, value) -> np.ndarray:
        return np.asarray(value, dtype=np.int64).reshape(-1, 2)

    @field_validator("points", mode="before")
    @classmethod
    def _as_points(cls, value) -> np.ndarray:
        return np.asarray(value, dtype=np.float64).reshape(-1, 3)

    def __len__(self) -> int:
        return len(self.edges)

    def entries(self) -> list[tuple[tuple[int, int], np.ndarray]]:
        return [((int(a), int(b)), p) for (a, b), p in zip(self.edges, self.points)]


class ContourMatch(BaseModel):
    rmse: float
    matched: int
    total: int

    @property
    def matched_fraction(self) -> float:
        return self.matched / self.total if self.total else 0.0
