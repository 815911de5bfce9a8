"""Nodal averaging onto the conforming quadratic subspace (zero on Gamma_D)."""
from dataclasses import dataclass

import numpy as np

from modules.Mesh_Module.mesh import Mesh
from modules.Space_Module.dg_space import DiscreteField, DofMap


@dataclass(frozen=True)
class ConformingField:
    """Values at the global P2 nodes: vertices first, then edge midpoints (id Nv + e)."""

    mesh: Mesh
    nodal_values: np.ndarray  # (Nv + Ne, 2)

    def to_discrete(self, dofmap: DofMap) -> DiscreteField:
        values = self.nodal_values[self.mesh.triangle_nodes()]  # (Nt, 6, 2)
        return DiscreteField(values.reshape(-1).copy(), dofmap)

    def edge_nodal_values(self, edge: int) -> np.ndarray:
        """Values (3, 2) at the edge start, midpoint and end."""
        i, j = self.mesh.edges[edge]
        return self.nodal_values[[i, self.mesh.n_vertices + edge, j]]


def enrich(U: DiscreteField) -> ConformingField:
    """Average the one-sided limits at every P2 node; Dirichlet nodes get 0."""
    mesh = U.mesh
    nodes = mesh.triangle_nodes().ravel()
    n_nodes = mesh.n_vertices + mesh.n_edges

    sums = np.zeros((n_nodes, 2))
    np.add.at(sums, nodes, U.nodal().reshape(-1, 2))
    counts = np.bincount(nodes, minlength=n_nodes)
    values = sums / counts[:, None]
    values[mesh.dirichlet_nodes()] = 0.0
    return ConformingField(mesh, values)
