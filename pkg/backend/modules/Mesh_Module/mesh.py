"""
Conforming triangulations of the unit square with boundary classification.

A Mesh is immutable once built: connectivity, edge adjacency, normals and
entity sizes are derived in the constructor and the arrays are frozen.

Conventions
-----------
- Triangles are counter-clockwise; local edge k is opposite local vertex k.
- refinement_edge[t] is the local index of the edge bisected by NVB; the
  vertex opposite it is the newest vertex.
- edge_triangles[e] = (t0, t1) with t0 < t1, t1 = -1 on the boundary.
- edge_normals[e] is the unit normal pointing out of t0.
"""
import logging
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path
from typing import Callable, Optional, Tuple

import numpy as np

from utils.errors import MeshError

logger = logging.getLogger(__name__)

_GEOM_TOL = 1e-12


class EdgeTag(IntEnum):
    INTERIOR = 0
    DIRICHLET = 1
    NEUMANN = 2
    CONTACT = 3


@dataclass(frozen=True)
class BoundarySpec:
    """Maps boundary edge midpoints to tags; carries the contact normal."""

    classifier: Callable[[np.ndarray], np.ndarray]
    contact_normal: Tuple[float, float]

    def __post_init__(self):
        n = np.asarray(self.contact_normal, dtype=float)
        if n.shape != (2,) or abs(np.linalg.norm(n) - 1.0) > 1e-12:
            raise MeshError(f"Contact normal must be a unit 2-vector, got {self.contact_normal}")

    def classify(self, midpoints: np.ndarray) -> np.ndarray:
        tags = np.asarray(self.classifier(np.asarray(midpoints, dtype=float)), dtype=np.int64)
        if tags.shape != (len(midpoints),):
            raise MeshError("Boundary classifier must return one tag per edge")
        valid = np.isin(tags, [EdgeTag.DIRICHLET, EdgeTag.NEUMANN, EdgeTag.CONTACT])
        if not valid.all():
            bad = np.asarray(midpoints)[~valid][0]
            raise MeshError(f"Boundary edge at {tuple(bad)} has no Dirichlet/Neumann/Contact tag")
        return tags


def unit_square_boundary(
    bottom: EdgeTag,
    right: EdgeTag,
    top: EdgeTag,
    left: EdgeTag,
    contact_normal: Tuple[float, float],
) -> BoundarySpec:
    """Tag each side of (0,1)^2 by edge-midpoint location."""
    sides = (bottom, right, top, left)

    def classify(midpoints: np.ndarray) -> np.ndarray:
        x, y = midpoints[:, 0], midpoints[:, 1]
        tags = np.zeros(len(midpoints), dtype=np.int64)
        on_side = (
            np.abs(y) < _GEOM_TOL,
            np.abs(x - 1.0) < _GEOM_TOL,
            np.abs(y - 1.0) < _GEOM_TOL,
            np.abs(x) < _GEOM_TOL,
        )
        for mask, tag in zip(on_side, sides):
            tags[mask & (tags == 0)] = int(tag)
        return tags

    return BoundarySpec(classifier=classify, contact_normal=tuple(float(c) for c in contact_normal))


def longest_edge_seeding(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    """
    Local index of the longest edge of each triangle.

    Ties (within relative 1e-12) go to the edge with the smallest
    (min vertex, max vertex) pair.
    """
    nt = len(triangles)
    lengths = np.empty((nt, 3))
    keys = np.empty((nt, 3, 2), dtype=np.int64)
    for k in range(3):
        i, j = triangles[:, (k + 1) % 3], triangles[:, (k + 2) % 3]
        lengths[:, k] = np.linalg.norm(vertices[i] - vertices[j], axis=1)
        keys[:, k, 0] = np.minimum(i, j)
        keys[:, k, 1] = np.maximum(i, j)

    longest = lengths.max(axis=1, keepdims=True)
    candidate = lengths >= longest * (1.0 - 1e-12)
    # lexicographic rank of the vertex pair, big for non-candidates
    rank = keys[:, :, 0] * (keys.max() + 1) + keys[:, :, 1]
    rank = np.where(candidate, rank, np.iinfo(np.int64).max)
    return np.argmin(rank, axis=1).astype(np.int64)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


class Mesh:
    """Conforming triangulation with tagged boundary edges."""

    def __init__(
        self,
        vertices: np.ndarray,
        triangles: np.ndarray,
        refinement_edge: np.ndarray,
        boundary: BoundarySpec,
        generation: int = 0,
    ):
        vertices = np.asarray(vertices, dtype=float)
        triangles = np.asarray(triangles, dtype=np.int64)
        refinement_edge = np.asarray(refinement_edge, dtype=np.int64)

        if vertices.ndim != 2 or vertices.shape[1] != 2:
            raise MeshError("vertices must have shape (Nv, 2)")
        if triangles.ndim != 2 or triangles.shape[1] != 3 or len(triangles) == 0:
            raise MeshError("triangles must have shape (Nt, 3) with Nt >= 1")
        if refinement_edge.shape != (len(triangles),) or not np.isin(refinement_edge, (0, 1, 2)).all():
            raise MeshError("refinement_edge must hold one local edge index in {0,1,2} per triangle")
        if triangles.min() < 0 or triangles.max() >= len(vertices):
            raise MeshError("triangle references a missing vertex")

        self.vertices = _frozen(vertices)
        self.triangles = _frozen(triangles)
        self.refinement_edge = _frozen(refinement_edge)
        self.boundary = boundary
        self.generation = generation

        self._build_geometry()
        self._build_edges()

    # ------------------------------------------------------------------
    def _build_geometry(self):
        p0, p1, p2 = (self.vertices[self.triangles[:, k]] for k in range(3))
        d1, d2 = p1 - p0, p2 - p0
        signed = 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
        if (signed <= 0).any():
            bad = int(np.flatnonzero(signed <= 0)[0])
            raise MeshError(f"Triangle {bad} has nonpositive area (clockwise or degenerate)")
        self.areas = _frozen(signed)
        lengths = np.stack([
            np.linalg.norm(p2 - p1, axis=1),
            np.linalg.norm(p0 - p2, axis=1),
            np.linalg.norm(p1 - p0, axis=1),
        ], axis=1)
        self.diameters = _frozen(lengths.max(axis=1))
        self.centroids = _frozen((p0 + p1 + p2) / 3.0)

    def _build_edges(self):
        nt = len(self.triangles)
        local = np.stack(
            [self.triangles[:, [(k + 1) % 3, (k + 2) % 3]] for k in range(3)], axis=1
        )  # (nt, 3, 2)
        pairs = np.sort(local.reshape(-1, 2), axis=1)
        edges, inverse = np.unique(pairs, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)

        flat_t = np.repeat(np.arange(nt), 3)
        flat_k = np.tile(np.arange(3), nt)
        order = np.argsort(inverse, kind="stable")
        sorted_e = inverse[order]
        first = np.ones(len(order), dtype=bool)
        first[1:] = sorted_e[1:] != sorted_e[:-1]

        counts = np.bincount(inverse, minlength=len(edges))
        if counts.max() > 2:
            raise MeshError("Non-manifold mesh: an edge is shared by more than two triangles")

        edge_triangles = -np.ones((len(edges), 2), dtype=np.int64)
        edge_local = -np.ones((len(edges), 2), dtype=np.int64)
        edge_triangles[sorted_e[first], 0] = flat_t[order][first]
        edge_local[sorted_e[first], 0] = flat_k[order][first]
        edge_triangles[sorted_e[~first], 1] = flat_t[order][~first]
        edge_local[sorted_e[~first], 1] = flat_k[order][~first]

        v0, v1 = self.vertices[edges[:, 0]], self.vertices[edges[:, 1]]
        tangent = v1 - v0
        lengths = np.linalg.norm(tangent, axis=1)
        normals = np.stack([tangent[:, 1], -tangent[:, 0]], axis=1) / lengths[:, None]
        midpoints = 0.5 * (v0 + v1)
        outward = np.einsum("ij,ij->i", normals, midpoints - self.centroids[edge_triangles[:, 0]])
        normals[outward < 0] *= -1.0

        tags = np.zeros(len(edges), dtype=np.int64)
        on_boundary = edge_triangles[:, 1] < 0
        if on_boundary.any():
            tags[on_boundary] = self.boundary.classify(midpoints[on_boundary])

        self.edges = _frozen(edges)
        self.edge_triangles = _frozen(edge_triangles)
        self.edge_local = _frozen(edge_local)
        self.triangle_edges = _frozen(inverse.reshape(nt, 3))
        self.edge_lengths = _frozen(lengths)
        self.edge_normals = _frozen(normals)
        self.edge_midpoints = _frozen(midpoints)
        self.edge_tags = _frozen(tags)

    # ------------------------------------------------------------------
    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def contact_normal(self) -> np.ndarray:
        return np.asarray(self.boundary.contact_normal, dtype=float)

    @property
    def mesh_size(self) -> float:
        return float(self.diameters.max())

    def edges_with_tag(self, tag: EdgeTag) -> np.ndarray:
        return np.flatnonzero(self.edge_tags == int(tag))

    def penalty_edges(self) -> np.ndarray:
        """E_h^0: interior and Dirichlet edges."""
        return np.flatnonzero(np.isin(self.edge_tags, (EdgeTag.INTERIOR, EdgeTag.DIRICHLET)))

    def triangle_nodes(self) -> np.ndarray:
        """
        Global P2 node ids per triangle (Nt, 6): vertices, then the midpoints
        of local edges (0,1), (1,2), (2,0). Midpoint of edge e has id Nv + e.
        """
        te = self.triangle_edges
        mids = self.n_vertices + np.stack([te[:, 2], te[:, 0], te[:, 1]], axis=1)
        return np.hstack([self.triangles, mids])

    def dirichlet_nodes(self) -> np.ndarray:
        """Global P2 node ids on the closure of the Dirichlet boundary."""
        d_edges = self.edges_with_tag(EdgeTag.DIRICHLET)
        return np.unique(np.concatenate([self.edges[d_edges].ravel(), self.n_vertices + d_edges]))

    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + self.n_triangles

    def min_angle(self) -> float:
        """Smallest interior angle over all triangles, in degrees."""
        p = [self.vertices[self.triangles[:, k]] for k in range(3)]
        angles = []
        for k in range(3):
            u = p[(k + 1) % 3] - p[k]
            w = p[(k + 2) % 3] - p[k]
            cos = np.einsum("ij,ij->i", u, w) / (np.linalg.norm(u, axis=1) * np.linalg.norm(w, axis=1))
            angles.append(np.arccos(np.clip(cos, -1.0, 1.0)))
        return float(np.degrees(np.min(angles)))

    def check_contact_assumption(self):
        """Every triangle owns at most one contact edge."""
        contact = self.edge_tags[self.triangle_edges] == int(EdgeTag.CONTACT)
        per_triangle = contact.sum(axis=1)
        if (per_triangle > 1).any():
            bad = int(np.flatnonzero(per_triangle > 1)[0])
            raise MeshError(f"Triangle {bad} owns {per_triangle[bad]} contact edges; at most one allowed")

    def validate(self):
        """Raise MeshError unless the mesh is a conforming simply connected triangulation."""
        boundary_edges = self.edge_triangles[:, 1] < 0
        # every boundary vertex must see exactly two boundary edges (no hanging nodes)
        degree = np.bincount(self.edges[boundary_edges].ravel(), minlength=self.n_vertices)
        on_boundary = degree > 0
        if (degree[on_boundary] != 2).any():
            raise MeshError("Boundary is not a simple closed polygon (hanging node or slit)")
        if self.euler_characteristic() != 1:
            raise MeshError(f"Euler characteristic {self.euler_characteristic()} != 1")
        if (self.edge_tags[boundary_edges] == int(EdgeTag.INTERIOR)).any():
            raise MeshError("Untagged boundary edge")

    def __repr__(self):
        return (f"Mesh(generation={self.generation}, vertices={self.n_vertices}, "
                f"triangles={self.n_triangles}, edges={self.n_edges})")


def build_structured_unit_square(n: int, spec: BoundarySpec) -> Mesh:
    """
    n x n cells, each split along its bottom-left to top-right diagonal.

    Vertex (i, j) has id j*(n+1) + i. Triangles are (a,b,c) and (a,c,d) for
    cell corners a=(i,j), b=(i+1,j), c=(i+1,j+1), d=(i,j+1).
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise MeshError(f"n must be a positive integer, got {n!r}")

    coords = np.linspace(0.0, 1.0, n + 1)
    xx, yy = np.meshgrid(coords, coords)
    vertices = np.column_stack([xx.ravel(), yy.ravel()])

    i, j = np.meshgrid(np.arange(n), np.arange(n))
    i, j = i.ravel(), j.ravel()
    a = j * (n + 1) + i
    b = a + 1
    c = a + n + 2
    d = a + n + 1
    triangles = np.empty((2 * n * n, 3), dtype=np.int64)
    triangles[0::2] = np.column_stack([a, b, c])
    triangles[1::2] = np.column_stack([a, c, d])

    mesh = Mesh(vertices, triangles, longest_edge_seeding(vertices, triangles), spec)
    logger.debug(f"Built structured mesh n={n}: {mesh}")
    return mesh


def export_mesh_text(mesh: Mesh, path: Path) -> Path:
    """Write vertices, triangles (with refinement edge) and tagged edges as plain text."""
    path = Path(path)
    lines = ["#vertices"]
    lines += [f"{x:.17g} {y:.17g}" for x, y in mesh.vertices]
    lines.append("#triangles")
    lines += [f"{t[0]} {t[1]} {t[2]} {r}" for t, r in zip(mesh.triangles, mesh.refinement_edge)]
    lines.append("#edges")
    lines += [f"{e[0]} {e[1]} {tag}" for e, tag in zip(mesh.edges, mesh.edge_tags)]
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")
    return path


def read_mesh_text(path: Path, spec: BoundarySpec, generation: int = 0) -> Mesh:
    """Inverse of export_mesh_text; edge tags are re-derived from spec."""
    sections = {"#vertices": [], "#triangles": [], "#edges": []}
    current: Optional[list] = None
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line:
            continue
        if line in sections:
            current = sections[line]
            continue
        if current is None:
            raise MeshError(f"{path}: data before the first section header")
        current.append(line.split())

    vertices = np.array(sections["#vertices"], dtype=float).reshape(-1, 2)
    tri = np.array(sections["#triangles"], dtype=np.int64).reshape(-1, 4)
    return Mesh(vertices, tri[:, :3], tri[:, 3], spec, generation=generation)
