"""
The discontinuous vector P2 space V_h.

Global dof of (triangle t, local node i, component c) is 12*t + 2*i + c, so
a coefficient vector reshapes to (Nt, 6, 2).
"""
import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from modules.Mesh_Module.mesh import Mesh
from modules.Space_Module.basis import NODE_BARYCENTRIC, eval_basis, physical_gradients
from modules.Space_Module.quadrature import QuadratureRule
from utils.errors import AssemblyError

logger = logging.getLogger(__name__)

LOCAL_DOFS = 12


@dataclass(frozen=True)
class ElementGeometry:
    origins: np.ndarray        # (Nt, 2) vertex 0
    jacobians: np.ndarray      # (Nt, 2, 2) columns P1-P0, P2-P0
    inv_jacobians: np.ndarray  # (Nt, 2, 2)
    dets: np.ndarray           # (Nt,) = 2 * area

    @classmethod
    def from_mesh(cls, mesh: Mesh) -> "ElementGeometry":
        p0, p1, p2 = (mesh.vertices[mesh.triangles[:, k]] for k in range(3))
        jac = np.stack([p1 - p0, p2 - p0], axis=2)
        return cls(p0, jac, np.linalg.inv(jac), np.linalg.det(jac))

    def map_points(self, bary: np.ndarray) -> np.ndarray:
        """Physical coordinates (Nt, nq, 2) of reference barycentric points (nq, 3)."""
        ref = np.asarray(bary)[:, 1:]
        return self.origins[:, None, :] + np.einsum("tij,qj->tqi", self.jacobians, ref)

    def to_barycentric(self, tri: np.ndarray, points: np.ndarray) -> np.ndarray:
        """Barycentric coordinates of physical points (n, 2) inside triangles tri (n,)."""
        ref = np.einsum("nij,nj->ni", self.inv_jacobians[tri], points - self.origins[tri])
        return np.column_stack([1.0 - ref[:, 0] - ref[:, 1], ref[:, 0], ref[:, 1]])


class DofMap:
    """Triangle -> 12 global dof indices, fully discontinuous."""

    def __init__(self, mesh: Mesh):
        self.mesh = mesh
        self.n_dofs = LOCAL_DOFS * mesh.n_triangles
        self.cell_dofs = np.arange(self.n_dofs, dtype=np.int64).reshape(mesh.n_triangles, LOCAL_DOFS)
        self.geometry = ElementGeometry.from_mesh(mesh)

    def dof(self, triangle: int, node: int, component: int) -> int:
        return LOCAL_DOFS * triangle + 2 * node + component

    def __repr__(self):
        return f"DofMap(triangles={self.mesh.n_triangles}, dofs={self.n_dofs})"


@dataclass(frozen=True)
class DiscreteField:
    coefficients: np.ndarray
    dofmap: DofMap

    def __post_init__(self):
        if self.coefficients.shape != (self.dofmap.n_dofs,):
            raise AssemblyError(
                f"Coefficient vector has shape {self.coefficients.shape}, expected ({self.dofmap.n_dofs},)"
            )

    @property
    def mesh(self) -> Mesh:
        return self.dofmap.mesh

    def nodal(self) -> np.ndarray:
        """Coefficients as (Nt, 6, 2)."""
        return self.coefficients.reshape(-1, 6, 2)

    @classmethod
    def zeros(cls, dofmap: DofMap) -> "DiscreteField":
        return cls(np.zeros(dofmap.n_dofs), dofmap)


def vector_basis_gradients(grads: np.ndarray) -> np.ndarray:
    """
    Gradients of the 12 vector basis functions psi_{2i+c} = phi_i e_c.

    grads (..., 6, 2) -> (..., 12, 2, 2) with G[..., 2i+c, c, :] = grad phi_i.
    """
    out = np.zeros(grads.shape[:-2] + (6, 2, 2, 2))
    out[..., :, 0, 0, :] = grads
    out[..., :, 1, 1, :] = grads
    return out.reshape(grads.shape[:-2] + (LOCAL_DOFS, 2, 2))


def vector_basis_values(values: np.ndarray) -> np.ndarray:
    """values (..., 6) -> (..., 12, 2) with V[..., 2i+c, c] = phi_i."""
    out = np.zeros(values.shape[:-1] + (6, 2, 2))
    out[..., :, 0, 0] = values
    out[..., :, 1, 1] = values
    return out.reshape(values.shape[:-1] + (LOCAL_DOFS, 2))


def element_basis(dofmap: DofMap, rule: QuadratureRule):
    """
    Basis data at triangle quadrature points.

    Returns (phi (nq, 6), grad_phi (Nt, nq, 6, 2), weights (Nt, nq) including
    the Jacobian, physical points (Nt, nq, 2)).
    """
    geom = dofmap.geometry
    phi, ref_grads = eval_basis(rule.points)
    grads = physical_gradients(ref_grads, geom.inv_jacobians)
    weights = rule.weights[None, :] * geom.dets[:, None]
    return phi, grads, weights, geom.map_points(rule.points)


def evaluate_in_elements(field: DiscreteField, rule: QuadratureRule):
    """Field values (Nt, nq, 2) and gradients (Nt, nq, 2, 2) at quadrature points."""
    phi, grads, _, _ = element_basis(field.dofmap, rule)
    u = field.nodal()
    values = np.einsum("qa,tac->tqc", phi, u)
    gradients = np.einsum("tqaj,tac->tqcj", grads, u)
    return values, gradients


def edge_parameter_barycentric(mesh: Mesh, edges: np.ndarray, side: int, t: np.ndarray) -> np.ndarray:
    """
    Barycentric coordinates (ne, nq, 3) in the side-th adjacent triangle of the
    edge points x(t) = V[e0] + t (V[e1] - V[e0]).
    """
    tri = mesh.edge_triangles[edges, side]
    loc = mesh.edge_local[edges, side]
    ne, nq = len(edges), len(t)
    bary = np.zeros((ne, nq, 3))
    rows = np.arange(ne)
    # local edge k runs between local vertices k+1 and k+2
    first = mesh.triangles[tri, (loc + 1) % 3]
    forward = first == mesh.edges[edges, 0]
    s = np.where(forward[:, None], t[None, :], 1.0 - t[None, :])
    bary[rows, :, (loc + 1) % 3] = 1.0 - s
    bary[rows, :, (loc + 2) % 3] = s
    return bary


def edge_points(mesh: Mesh, edges: np.ndarray, t: np.ndarray) -> np.ndarray:
    v0 = mesh.vertices[mesh.edges[edges, 0]]
    v1 = mesh.vertices[mesh.edges[edges, 1]]
    return v0[:, None, :] + t[None, :, None] * (v1 - v0)[:, None, :]


def edge_basis(dofmap: DofMap, edges: np.ndarray, side: int, rule: QuadratureRule):
    """
    Basis values (ne, nq, 6) and physical gradients (ne, nq, 6, 2) of the
    side-th triangle adjacent to each edge, at edge quadrature points.
    """
    mesh = dofmap.mesh
    tri = mesh.edge_triangles[edges, side]
    if (tri < 0).any():
        raise AssemblyError("Requested the second side of a boundary edge")
    bary = edge_parameter_barycentric(mesh, edges, side, rule.points)
    phi, ref_grads = eval_basis(bary)
    grads = np.einsum("eqar,erj->eqaj", ref_grads, dofmap.geometry.inv_jacobians[tri])
    return phi, grads


def evaluate_on_edges(field: DiscreteField, edges: np.ndarray, side: int, rule: QuadratureRule):
    """One-sided field values (ne, nq, 2) and gradients (ne, nq, 2, 2) on edges."""
    tri = field.mesh.edge_triangles[edges, side]
    phi, grads = edge_basis(field.dofmap, edges, side, rule)
    u = field.nodal()[tri]
    return np.einsum("eqa,eac->eqc", phi, u), np.einsum("eqaj,eac->eqcj", grads, u)


def interpolate(dofmap: DofMap, func: Callable[[np.ndarray], np.ndarray]) -> DiscreteField:
    """Nodal P2 interpolant of a vector function func(points (n, 2)) -> (n, 2)."""
    nodes = dofmap.geometry.map_points(NODE_BARYCENTRIC)  # (Nt, 6, 2)
    values = np.asarray(func(nodes.reshape(-1, 2)), dtype=float).reshape(-1, 6, 2)
    return DiscreteField(values.reshape(-1).copy(), dofmap)


def evaluate_at_points(field: DiscreteField, triangles: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Values (n, 2) of field restricted to triangles[k] at points[k]."""
    bary = field.dofmap.geometry.to_barycentric(triangles, points)
    phi, _ = eval_basis(bary)
    return np.einsum("na,nac->nc", phi, field.nodal()[triangles])
