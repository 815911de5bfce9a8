"""
Jumps and averages of discrete fields on edges.

For an interior edge with sides 1 (lower triangle index) and 2 and normal n1
pointing out of side 1:
    [[v]]     = (v1 - v2) (x) n1          {v}     = (v1 + v2) / 2
    [[sigma]] = (sigma1 - sigma2) n1      {sigma} = (sigma1 + sigma2) / 2
On boundary edges only side 1 exists: [[v]] = v (x) n, {v} = v, {sigma} = sigma.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from modules.Elasticity_Module.hooke import Material, strain, stress
from modules.Space_Module.dg_space import DiscreteField, edge_points, evaluate_on_edges
from modules.Space_Module.quadrature import QuadratureRule, edge_quadrature


@dataclass(frozen=True)
class TraceValues:
    edge: int
    points: np.ndarray           # (nq, 2)
    weights: np.ndarray          # (nq,) physical, sum h_e
    normal: np.ndarray           # (2,)
    values: np.ndarray           # (sides, nq, 2)
    strains: np.ndarray          # (sides, nq, 2, 2)
    stresses: Optional[np.ndarray]
    jump: np.ndarray             # (nq, 2, 2)
    average: np.ndarray          # (nq, 2)
    strain_average: np.ndarray   # (nq, 2, 2)
    stress_jump: Optional[np.ndarray]     # (nq, 2)
    stress_average: Optional[np.ndarray]  # (nq, 2, 2)

    @property
    def is_boundary(self) -> bool:
        return self.values.shape[0] == 1


def jump_dyadic(v1: np.ndarray, n: np.ndarray, v2: Optional[np.ndarray] = None) -> np.ndarray:
    diff = v1 if v2 is None else v1 - v2
    return np.einsum("...i,...j->...ij", diff, np.broadcast_to(n, diff.shape))


def edge_traces(
    field: DiscreteField,
    edge: int,
    rule: Optional[QuadratureRule] = None,
    material: Optional[Material] = None,
) -> TraceValues:
    """Trace calculus of field on one edge; stresses need a material."""
    rule = rule or edge_quadrature()
    mesh = field.mesh
    edges = np.array([edge])
    n = mesh.edge_normals[edge]
    sides = 1 if mesh.edge_triangles[edge, 1] < 0 else 2

    values, strains = [], []
    for side in range(sides):
        v, g = evaluate_on_edges(field, edges, side, rule)
        values.append(v[0])
        strains.append(strain(g[0]))
    values = np.stack(values)
    strains = np.stack(strains)
    stresses = np.stack([stress(e, material) for e in strains]) if material is not None else None

    if sides == 2:
        jump = jump_dyadic(values[0], n, values[1])
        average = values.mean(axis=0)
        strain_average = strains.mean(axis=0)
    else:
        jump = jump_dyadic(values[0], n)
        average = values[0]
        strain_average = strains[0]

    stress_jump = stress_average = None
    if stresses is not None:
        s_diff = stresses[0] - stresses[1] if sides == 2 else stresses[0]
        stress_jump = np.einsum("qij,j->qi", s_diff, n)
        stress_average = stresses.mean(axis=0)

    return TraceValues(
        edge=edge,
        points=edge_points(mesh, edges, rule.points)[0],
        weights=rule.weights * mesh.edge_lengths[edge],
        normal=n,
        values=values,
        strains=strains,
        stresses=stresses,
        jump=jump,
        average=average,
        strain_average=strain_average,
        stress_jump=stress_jump,
        stress_average=stress_average,
    )
