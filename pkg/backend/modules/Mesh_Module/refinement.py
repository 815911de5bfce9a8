"""
Uniform (red) refinement and newest vertex bisection with closure.

Both return new Mesh objects; the input mesh is never modified. Boundary
tags of children are re-derived geometrically from the parent's
BoundarySpec, so contact edges only ever come from contact edges.
"""
import logging
from typing import Iterable

import numpy as np

from modules.Mesh_Module.mesh import Mesh
from utils.errors import MeshError

logger = logging.getLogger(__name__)


def uniform_refine(mesh: Mesh) -> Mesh:
    """Split every triangle into four similar children through its edge midpoints."""
    nv, nt = mesh.n_vertices, mesh.n_triangles
    vertices = np.vstack([mesh.vertices, mesh.edge_midpoints])

    t = mesh.triangles
    # m[:, k] = midpoint of the edge opposite local vertex k
    m = nv + mesh.triangle_edges
    triangles = np.empty((4 * nt, 3), dtype=np.int64)
    triangles[0::4] = np.column_stack([t[:, 0], m[:, 2], m[:, 1]])
    triangles[1::4] = np.column_stack([m[:, 2], t[:, 1], m[:, 0]])
    triangles[2::4] = np.column_stack([m[:, 1], m[:, 0], t[:, 2]])
    triangles[3::4] = np.column_stack([m[:, 0], m[:, 1], m[:, 2]])
    # every child keeps the parent's local vertex correspondence
    refinement_edge = np.repeat(mesh.refinement_edge, 4)

    refined = Mesh(vertices, triangles, refinement_edge, mesh.boundary, generation=mesh.generation + 1)
    logger.debug(f"Uniform refinement: {nt} -> {refined.n_triangles} triangles")
    return refined


def _close_marked_edges(mesh: Mesh, edge_marked: np.ndarray) -> np.ndarray:
    """Mark the refinement edge of every triangle that has any marked edge."""
    tri = np.arange(mesh.n_triangles)
    ref_edges = mesh.triangle_edges[tri, mesh.refinement_edge]
    while True:
        touched = edge_marked[mesh.triangle_edges].any(axis=1)
        missing = touched & ~edge_marked[ref_edges]
        if not missing.any():
            return edge_marked
        edge_marked[ref_edges[missing]] = True


def bisect(mesh: Mesh, marked: Iterable[int]) -> Mesh:
    """
    Newest vertex bisection of the marked triangles plus conformity closure.

    With (a, b, c) the triangle rotated so that a is the newest vertex and
    bc the refinement edge, bisection at m = mid(bc) gives (a, b, m) and
    (a, m, c), each with its refinement edge opposite m. Triangles whose
    other edges were marked by the closure are bisected once more.
    """
    marked = np.unique(np.asarray(list(marked), dtype=np.int64))
    if marked.size == 0:
        return mesh
    if marked.min() < 0 or marked.max() >= mesh.n_triangles:
        raise MeshError("Marked triangle index out of range")

    nt = mesh.n_triangles
    rows = np.arange(nt)
    r = mesh.refinement_edge
    edge_marked = np.zeros(mesh.n_edges, dtype=bool)
    edge_marked[mesh.triangle_edges[marked, r[marked]]] = True
    edge_marked = _close_marked_edges(mesh, edge_marked)

    split_edges = np.flatnonzero(edge_marked)
    midpoint_id = -np.ones(mesh.n_edges, dtype=np.int64)
    midpoint_id[split_edges] = mesh.n_vertices + np.arange(len(split_edges))
    vertices = np.vstack([mesh.vertices, mesh.edge_midpoints[split_edges]])

    # rotate every triangle so that its newest vertex comes first
    a = mesh.triangles[rows, r]
    b = mesh.triangles[rows, (r + 1) % 3]
    c = mesh.triangles[rows, (r + 2) % 3]
    m_bc = midpoint_id[mesh.triangle_edges[rows, r]]
    m_ca = midpoint_id[mesh.triangle_edges[rows, (r + 1) % 3]]
    m_ab = midpoint_id[mesh.triangle_edges[rows, (r + 2) % 3]]

    keep = m_bc < 0
    if ((m_ca >= 0) & keep).any() or ((m_ab >= 0) & keep).any():
        raise MeshError("Closure left a marked edge on a triangle with unmarked refinement edge")
    split = ~keep
    left_split = split & (m_ab >= 0)
    right_split = split & (m_ca >= 0)
    left_whole = split & ~left_split
    right_whole = split & ~right_split

    pieces = [
        (np.column_stack([mesh.triangles[keep]]), r[keep]),
        # left child (a, b, m) and its bisection at mid(ab)
        (np.column_stack([a, b, m_bc])[left_whole], np.full(left_whole.sum(), 2)),
        (np.column_stack([m_bc, a, m_ab])[left_split], np.full(left_split.sum(), 2)),
        (np.column_stack([m_bc, m_ab, b])[left_split], np.full(left_split.sum(), 1)),
        # right child (a, m, c) and its bisection at mid(ca)
        (np.column_stack([a, m_bc, c])[right_whole], np.full(right_whole.sum(), 1)),
        (np.column_stack([m_bc, c, m_ca])[right_split], np.full(right_split.sum(), 2)),
        (np.column_stack([m_bc, m_ca, a])[right_split], np.full(right_split.sum(), 1)),
    ]
    triangles = np.vstack([p for p, _ in pieces]).astype(np.int64)
    refinement_edge = np.concatenate([q for _, q in pieces]).astype(np.int64)

    refined = Mesh(vertices, triangles, refinement_edge, mesh.boundary, generation=mesh.generation + 1)
    logger.debug(
        f"NVB: {len(marked)} marked, {len(split_edges)} edges bisected, "
        f"{nt} -> {refined.n_triangles} triangles"
    )
    return refined
