"""Right-hand side: volume force, Neumann traction, weak Dirichlet data."""
import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from modules.Assembly_Module.dg_operator import DGMethod, edge_side_data
from modules.Elasticity_Module.hooke import Material
from modules.Mesh_Module.mesh import EdgeTag, Mesh
from modules.Space_Module.dg_space import DofMap, edge_basis, edge_points, element_basis
from modules.Space_Module.quadrature import edge_quadrature_for_degree, triangle_quadrature

logger = logging.getLogger(__name__)

VolumeForce = Callable[[np.ndarray], np.ndarray]            # points (n, 2) -> (n, 2)
Traction = Callable[[np.ndarray, np.ndarray], np.ndarray]   # points, normals -> (n, 2)


@dataclass(frozen=True)
class LoadVector:
    values: np.ndarray

    def pairing(self, coefficients: np.ndarray) -> float:
        return float(self.values @ coefficients)

    def __add__(self, other: "LoadVector") -> "LoadVector":
        return LoadVector(self.values + other.values)


def assemble_load(
    mesh: Mesh,
    space: DofMap,
    f: Optional[VolumeForce],
    g: Optional[Traction],
    degree: int = 7,
) -> LoadVector:
    """L(v) = (f, v)_Omega + (g, v)_{Gamma_N} at quadrature degree `degree`."""
    values = np.zeros(space.n_dofs)

    if f is not None:
        phi, _, weights, points = element_basis(space, triangle_quadrature(degree))
        nt, nq = weights.shape
        fq = np.asarray(f(points.reshape(-1, 2)), dtype=float).reshape(nt, nq, 2)
        local = np.einsum("tq,qa,tqc->tac", weights, phi, fq)
        values += local.reshape(-1)

    neumann = mesh.edges_with_tag(EdgeTag.NEUMANN)
    if g is not None and len(neumann):
        rule = edge_quadrature_for_degree(degree)
        phi, _ = edge_basis(space, neumann, 0, rule)
        points = edge_points(mesh, neumann, rule.points)
        ne, nq = points.shape[:2]
        normals = np.repeat(mesh.edge_normals[neumann], nq, axis=0)
        gq = np.asarray(g(points.reshape(-1, 2), normals), dtype=float).reshape(ne, nq, 2)
        weights = rule.weights[None, :] * mesh.edge_lengths[neumann][:, None]
        local = np.einsum("eq,eqa,eqc->eac", weights, phi, gq).reshape(ne, -1)
        np.add.at(values, space.cell_dofs[mesh.edge_triangles[neumann, 0]], local)

    return LoadVector(values)


def assemble_dirichlet_lift(
    mesh: Mesh,
    space: DofMap,
    mat: Material,
    method: DGMethod,
    eta: float,
    u_D: Optional[VolumeForce],
    degree: int = 7,
) -> LoadVector:
    """
    Known terms of [[u]] - u_D (x) n on Dirichlet edges moved to the right-hand side:
        s (u_D, sigma(v) n)_e + eta / h_e (u_D, v)_e.
    """
    values = np.zeros(space.n_dofs)
    dirichlet = mesh.edges_with_tag(EdgeTag.DIRICHLET)
    if u_D is None or not len(dirichlet):
        return LoadVector(values)

    rule = edge_quadrature_for_degree(degree)
    data = edge_side_data(space, dirichlet, mat, rule)
    points = edge_points(mesh, dirichlet, rule.points)
    ne, nq = points.shape[:2]
    uq = np.asarray(u_D(points.reshape(-1, 2)), dtype=float).reshape(ne, nq, 2)

    consistency = np.einsum("eq,eqak,eqk->ea", data.weights, data.tractions, uq)
    penalty = np.einsum("eq,eqak,eqk->ea", data.weights, data.jumps, uq)
    local = DGMethod(method).symmetry_sign * consistency + (eta / mesh.edge_lengths[dirichlet])[:, None] * penalty
    np.add.at(values, data.dofs, local)
    return LoadVector(values)
