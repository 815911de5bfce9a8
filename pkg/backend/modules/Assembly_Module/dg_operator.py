"""
Interior penalty DG operator for linear elasticity.

    A_h(u, v) = sum_K (sigma(u), eps(v))_K
              - sum_{E0} ([[v]], {sigma(u)})_e
              + s * sum_{E0} ([[u]], {sigma(v)})_e
              + sum_{E0} eta / h_e ([[u]], [[v]])_e

with s = -1 (SIPG) or s = +1 (NIPG) and E0 the interior and Dirichlet edges.
Matrix entry A[a, b] = A_h(psi_b, psi_a), so V^T A U = A_h(u, v).
"""
import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Dict, Optional

import numpy as np
import scipy.sparse as sp

from modules.Elasticity_Module.hooke import Material, strain, stress
from modules.Mesh_Module.mesh import EdgeTag, Mesh
from modules.Space_Module.dg_space import (
    DofMap,
    edge_basis,
    element_basis,
    vector_basis_gradients,
    vector_basis_values,
)
from modules.Space_Module.quadrature import QuadratureRule, edge_quadrature, triangle_quadrature
from utils.errors import AssemblyError, InvalidPenaltyError

logger = logging.getLogger(__name__)


class DGMethod(str, Enum):
    SIPG = "sipg"
    NIPG = "nipg"

    @property
    def symmetry_sign(self) -> float:
        return -1.0 if self is DGMethod.SIPG else 1.0


def default_penalty(method: DGMethod) -> float:
    """Harness penalty: 70 for both forms.

    The NIPG "70 nu" factor is a unit scaling; eta = 70 keeps the NIPG rates at 2.
    """
    DGMethod(method)
    return 70.0


@dataclass(frozen=True)
class SparseOperator:
    matrix: sp.csr_matrix
    method: DGMethod
    penalty: float

    @property
    def n_dofs(self) -> int:
        return self.matrix.shape[0]

    def apply(self, coefficients: np.ndarray) -> np.ndarray:
        return self.matrix @ coefficients

    def form(self, u: np.ndarray, v: np.ndarray) -> float:
        """A_h(u, v) for coefficient vectors."""
        return float(v @ (self.matrix @ u))


@dataclass(frozen=True)
class EdgeSideData:
    """Per-dof edge traces of the vector basis of one or two adjacent triangles."""

    dofs: np.ndarray      # (ne, k)
    jumps: np.ndarray     # (ne, nq, k, 2)   jump vector of psi_a
    tractions: np.ndarray  # (ne, nq, k, 2)  {sigma(psi_a)} n1
    strains: np.ndarray   # (ne, nq, k, 2, 2) {eps(psi_a)}
    weights: np.ndarray   # (ne, nq) physical edge weights


def _one_side(space: DofMap, edges: np.ndarray, side: int, mat: Material, rule: QuadratureRule):
    mesh = space.mesh
    phi, grads = edge_basis(space, edges, side, rule)
    psi = vector_basis_values(phi)
    eps = strain(vector_basis_gradients(grads))
    sig = stress(eps, mat)
    tractions = np.einsum("eqaij,ej->eqai", sig, mesh.edge_normals[edges])
    return space.cell_dofs[mesh.edge_triangles[edges, side]], psi, tractions, eps


def edge_side_data(space: DofMap, edges: np.ndarray, mat: Material, rule: QuadratureRule) -> EdgeSideData:
    """Jumps/averages of basis traces; edges must be all interior or all boundary."""
    mesh = space.mesh
    edges = np.asarray(edges, dtype=np.int64)
    interior = mesh.edge_triangles[edges, 1] >= 0
    if interior.any() and not interior.all():
        raise AssemblyError("edge_side_data expects edges of one kind")

    dofs, psi, trac, eps = _one_side(space, edges, 0, mat, rule)
    if len(edges) and interior.all():
        dofs2, psi2, trac2, eps2 = _one_side(space, edges, 1, mat, rule)
        dofs = np.concatenate([dofs, dofs2], axis=1)
        psi = np.concatenate([psi, -psi2], axis=2)
        trac = 0.5 * np.concatenate([trac, trac2], axis=2)
        eps = 0.5 * np.concatenate([eps, eps2], axis=2)

    weights = rule.weights[None, :] * mesh.edge_lengths[edges][:, None]
    return EdgeSideData(dofs, psi, trac, eps, weights)


def scatter(local: np.ndarray, dofs: np.ndarray, n_dofs: int) -> sp.csr_matrix:
    """Sum local (n, k, k) matrices into a global CSR matrix."""
    k = dofs.shape[1]
    rows = np.repeat(dofs, k, axis=1).ravel()
    cols = np.tile(dofs, (1, k)).ravel()
    return sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n_dofs, n_dofs)).tocsr()


def volume_matrices(space: DofMap, mat: Material, rule: QuadratureRule) -> np.ndarray:
    """Local elastic stiffness (Nt, 12, 12)."""
    _, grads, weights, _ = element_basis(space, rule)
    eps = strain(vector_basis_gradients(grads))
    sig = stress(eps, mat)
    return np.einsum("tq,tqaij,tqbij->tab", weights, sig, eps)


def _interface_matrices(data: EdgeSideData, s_sym: float, eta_over_h: np.ndarray) -> np.ndarray:
    pairing = np.einsum("eq,eqak,eqbk->eab", data.weights, data.tractions, data.jumps)
    jumps = np.einsum("eq,eqak,eqbk->eab", data.weights, data.jumps, data.jumps)
    return s_sym * pairing - pairing.transpose(0, 2, 1) + eta_over_h[:, None, None] * jumps


def _edge_groups(mesh: Mesh):
    interior = mesh.edges_with_tag(EdgeTag.INTERIOR)
    dirichlet = mesh.edges_with_tag(EdgeTag.DIRICHLET)
    return [g for g in (interior, dirichlet) if len(g)]


def assemble_operator(
    mesh: Mesh,
    space: DofMap,
    mat: Material,
    method: DGMethod,
    eta: float,
    rule: Optional[QuadratureRule] = None,
    edge_rule: Optional[QuadratureRule] = None,
) -> SparseOperator:
    """Assemble the SIPG/NIPG matrix over all dofs."""
    method = DGMethod(method)
    if not eta > 0:
        raise InvalidPenaltyError(f"Penalty must be positive, got {eta}")
    if space.mesh is not mesh:
        raise AssemblyError("DofMap belongs to a different mesh")
    rule = rule or triangle_quadrature(5)
    edge_rule = edge_rule or edge_quadrature()

    matrix = scatter(volume_matrices(space, mat, rule), space.cell_dofs, space.n_dofs)
    for edges in _edge_groups(mesh):
        data = edge_side_data(space, edges, mat, edge_rule)
        local = _interface_matrices(data, method.symmetry_sign, eta / mesh.edge_lengths[edges])
        matrix = matrix + scatter(local, data.dofs, space.n_dofs)

    logger.debug(f"Assembled {method.value.upper()} operator: {space.n_dofs} dofs, nnz={matrix.nnz}, eta={eta}")
    return SparseOperator(matrix.tocsr(), method, float(eta))


def norm_matrices(
    mesh: Mesh,
    space: DofMap,
    mat: Material,
    rule: Optional[QuadratureRule] = None,
    edge_rule: Optional[QuadratureRule] = None,
) -> Dict[str, sp.csr_matrix]:
    """
    Gram matrices of the DG seminorms:
      energy:  sum_K (sigma(v), eps(v))_K
      jump:    sum_{E0} h_e^{-1} ||[[v]]||^2
      average: sum_{E0} h_e ||{eps(v)}||^2
    """
    rule = rule or triangle_quadrature(5)
    edge_rule = edge_rule or edge_quadrature()
    energy = scatter(volume_matrices(space, mat, rule), space.cell_dofs, space.n_dofs)
    jump = sp.csr_matrix((space.n_dofs, space.n_dofs))
    average = sp.csr_matrix((space.n_dofs, space.n_dofs))
    for edges in _edge_groups(mesh):
        data = edge_side_data(space, edges, mat, edge_rule)
        h = mesh.edge_lengths[edges]
        j_local = np.einsum("eq,eqak,eqbk->eab", data.weights, data.jumps, data.jumps) / h[:, None, None]
        a_local = np.einsum("eq,eqaij,eqbij->eab", data.weights, data.strains, data.strains) * h[:, None, None]
        jump = jump + scatter(j_local, data.dofs, space.n_dofs)
        average = average + scatter(a_local, data.dofs, space.n_dofs)
    return {"energy": energy, "jump": jump, "average": average}


def export_operator_coo(op: SparseOperator, path: Path) -> Path:
    """Write the matrix as 'row col value' lines."""
    coo = op.matrix.tocoo()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = f"{op.method.value} eta={op.penalty!r} shape={coo.shape[0]}x{coo.shape[1]}"
    table = np.column_stack([coo.row, coo.col, coo.data])
    np.savetxt(path, table, fmt=["%d", "%d", "%.17g"], header=header)
    return path
