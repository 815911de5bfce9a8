"""
Contact constraint rows.

For each contact edge e (owned by a single triangle):
    B_e(v) = int_e v . n_c ds        G_e = int_e gap ds
and the discrete admissible set is K_h = {V : B V <= G}.
"""
import logging
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np
import scipy.sparse as sp

from modules.Mesh_Module.mesh import EdgeTag, Mesh
from modules.Space_Module.dg_space import DofMap, edge_basis
from modules.Space_Module.quadrature import QuadratureRule, edge_quadrature
from modules.Space_Module.segments import integrate_on_segment
from utils.errors import ConstraintError, MeshError

logger = logging.getLogger(__name__)

GapFunction = Callable[[np.ndarray], np.ndarray]  # points (n, 2) -> (n,)


@dataclass(frozen=True)
class ConstraintSystem:
    matrix: sp.csr_matrix     # (m, n_dofs)
    gap: np.ndarray           # (m,)
    edges: np.ndarray         # (m,) mesh edge ids
    triangles: np.ndarray     # (m,) owning triangles
    normal: np.ndarray        # (2,)
    edge_lengths: np.ndarray  # (m,)

    @property
    def n_constraints(self) -> int:
        return len(self.gap)

    def values(self, coefficients: np.ndarray) -> np.ndarray:
        return self.matrix @ coefficients

    def violation(self, coefficients: np.ndarray) -> np.ndarray:
        """B V - G per contact edge."""
        return self.values(coefficients) - self.gap

    def contains(self, coefficients: np.ndarray, tol: float = 0.0) -> bool:
        return bool((self.violation(coefficients) <= tol).all())


def assemble_constraints(
    mesh: Mesh,
    space: DofMap,
    normal: np.ndarray,
    gap: Optional[GapFunction] = None,
    gap_breakpoints: Iterable = (),
    rule: Optional[QuadratureRule] = None,
) -> ConstraintSystem:
    """Rows B_e and gaps G_e for all contact edges, in increasing edge order."""
    rule = rule or edge_quadrature()
    normal = np.asarray(normal, dtype=float)
    contact = mesh.edges_with_tag(EdgeTag.CONTACT)

    if len(contact) and (mesh.edge_triangles[contact, 1] >= 0).any():
        raise ConstraintError("Contact edge shared by two triangles")
    try:
        mesh.check_contact_assumption()
    except MeshError as e:
        raise ConstraintError(str(e)) from e

    m = len(contact)
    if m == 0:
        empty = np.zeros(0)
        return ConstraintSystem(sp.csr_matrix((0, space.n_dofs)), empty, contact, contact.copy(), normal, empty)

    owners = mesh.edge_triangles[contact, 0]
    lengths = mesh.edge_lengths[contact]
    phi, _ = edge_basis(space, contact, 0, rule)
    # int_e phi_i ds, then times the normal component of e_c
    moments = np.einsum("q,eqa->ea", rule.weights, phi) * lengths[:, None]
    entries = (moments[:, :, None] * normal[None, None, :]).reshape(m, -1)
    rows = np.repeat(np.arange(m), 12)
    matrix = sp.csr_matrix((entries.ravel(), (rows, space.cell_dofs[owners].ravel())), shape=(m, space.n_dofs))

    gap_values = np.zeros(m)
    if gap is not None:
        breakpoints = [np.asarray(b, dtype=float) for b in gap_breakpoints]
        for k, e in enumerate(contact):
            p0, p1 = mesh.vertices[mesh.edges[e]]
            gap_values[k] = integrate_on_segment(gap, p0, p1, breakpoints, rule)

    logger.debug(f"Assembled {m} contact constraints")
    return ConstraintSystem(matrix, gap_values, contact, owners, normal, lengths)
