"""
Residual a posteriori estimator for the DG contact discretization.

Squared contributions (per entity):
  eta1: h_K^2 ||f + div sigma(u_h)||_K^2                     triangles
  eta2: h_e ||[[sigma(u_h)]]||_e^2                            interior edges
  eta3: h_e ||g - sigma(u_h) n||_e^2                          Neumann edges
  eta4: h_e ||lambda_h + sigma(u_h) n||_e^2                   contact edges
  eta5: h_e^{-1} ||[[u_h]] - u_D (x) n||_e^2                  E0 edges
  eta6: -int_e lambda^1 (E_h u_h . n - gap)^-                  contact edges in C_h
  eta7: ||(E_h u_h . n - gap)^+||_{H^{1/2}(e)}^2              contact edges
"""
import logging
from dataclasses import dataclass, replace
from typing import Dict, Optional

import numpy as np

from modules.Elasticity_Module.hooke import stress, strain, stress_divergence, traction
from modules.Estimator_Module.enrichment import ConformingField, enrich
from modules.Estimator_Module.fractional_norm import (
    PiecewisePolynomial,
    h_half_norm_edge,
    integrate,
    piecewise_from_samples,
    signed_part,
    split_at_roots,
)
from modules.Mesh_Module.mesh import EdgeTag
from modules.Problems_Module.model_problems import ProblemSpec
from modules.Solver_Module.multiplier import MultiplierField
from modules.Solver_Module.pdas import ActiveSetPartition
from modules.Space_Module.basis import basis_hessians
from modules.Space_Module.dg_space import DiscreteField, edge_points, evaluate_on_edges
from modules.Space_Module.quadrature import edge_quadrature, edge_quadrature_for_degree, triangle_quadrature
from modules.Space_Module.segments import segment_breakpoints

logger = logging.getLogger(__name__)

CONTRIBUTIONS = (1, 2, 3, 4, 5, 6, 7)


@dataclass(frozen=True)
class EstimatorReport:
    """eta1 per triangle; eta2..eta7 per mesh edge (zero where not defined)."""

    eta1: np.ndarray
    eta2: np.ndarray
    eta3: np.ndarray
    eta4: np.ndarray
    eta5: np.ndarray
    eta6: np.ndarray
    eta7: np.ndarray
    edge_triangles: np.ndarray
    error: Optional[float] = None

    def contribution(self, i: int) -> np.ndarray:
        return getattr(self, f"eta{i}")

    @property
    def totals(self) -> Dict[int, float]:
        return {i: float(self.contribution(i).sum()) for i in CONTRIBUTIONS}

    @property
    def total_squared(self) -> float:
        return float(sum(self.totals.values()))

    @property
    def total(self) -> float:
        return float(np.sqrt(max(self.total_squared, 0.0)))

    @property
    def efficiency_index(self) -> Optional[float]:
        if self.error is None or self.error == 0:
            return None
        return self.total / self.error

    def with_error(self, error: Optional[float]) -> "EstimatorReport":
        return replace(self, error=error)

    def element_indicators(self) -> np.ndarray:
        """
        Per-triangle squared indicators: eta1 plus edge terms, split half/half
        across interior edges and given whole to the owner of boundary edges.
        """
        indicators = self.eta1.copy()
        edge_total = sum(self.contribution(i) for i in CONTRIBUTIONS[1:])
        t0, t1 = self.edge_triangles[:, 0], self.edge_triangles[:, 1]
        interior = t1 >= 0
        np.add.at(indicators, t0[interior], 0.5 * edge_total[interior])
        np.add.at(indicators, t1[interior], 0.5 * edge_total[interior])
        np.add.at(indicators, t0[~interior], edge_total[~interior])
        return indicators


def _stresses_on_edges(U: DiscreteField, edges, side, rule, mat):
    values, grads = evaluate_on_edges(U, edges, side, rule)
    return values, stress(strain(grads), mat)


def _volume_residual(U: DiscreteField, spec: ProblemSpec, degree: int) -> np.ndarray:
    mesh, geom = U.mesh, U.dofmap.geometry
    hess = basis_hessians(geom.inv_jacobians)                       # (Nt, 6, 2, 2)
    u_hess = np.einsum("tajk,tac->tcjk", hess, U.nodal())           # (Nt, 2, 2, 2)
    div_sigma = stress_divergence(u_hess, spec.material)             # (Nt, 2), constant per triangle

    if spec.body_force is None:
        integral = mesh.areas * np.einsum("tc,tc->t", div_sigma, div_sigma)
    else:
        rule = triangle_quadrature(degree)
        points = geom.map_points(rule.points)
        nt, nq = points.shape[:2]
        f = spec.body_force(points.reshape(-1, 2)).reshape(nt, nq, 2)
        r = f + div_sigma[:, None, :]
        weights = rule.weights[None, :] * geom.dets[:, None]
        integral = np.einsum("tq,tqc,tqc->t", weights, r, r)
    return mesh.diameters ** 2 * integral


def _edge_weights(mesh, edges, rule):
    return rule.weights[None, :] * mesh.edge_lengths[edges][:, None]


def _normal_trace(spec: ProblemSpec, enriched: ConformingField, edge: int) -> PiecewisePolynomial:
    """E_h u_h . n - gap along the edge, in arc length from edges[e, 0]."""
    mesh = enriched.mesh
    p0, p1 = mesh.vertices[mesh.edges[edge]]
    length = float(mesh.edge_lengths[edge])
    knots = [0.0] + [t * length for t in segment_breakpoints(p0, p1, spec.gap_breakpoints)] + [length]

    node_values = enriched.edge_nodal_values(edge) @ spec.contact_normal
    coef = np.polynomial.polynomial.polyfit([0.0, 0.5 * length, length], node_values, 2)

    def w(s: np.ndarray) -> np.ndarray:
        pts = p0[None, :] + (s / length)[:, None] * (p1 - p0)[None, :]
        return np.polynomial.polynomial.polyval(s, coef) - spec.gap(pts)

    return piecewise_from_samples(knots, w)


def compute_estimators(
    U: DiscreteField,
    multiplier: MultiplierField,
    spec: ProblemSpec,
    partition: ActiveSetPartition,
    quad_degree: int = 7,
) -> EstimatorReport:
    """All seven contributions for a solved level."""
    mesh, mat = U.mesh, spec.material
    ne = mesh.n_edges
    rule = edge_quadrature()
    data_rule = edge_quadrature_for_degree(quad_degree)
    eta = {i: np.zeros(ne) for i in CONTRIBUTIONS[1:]}

    eta1 = _volume_residual(U, spec, quad_degree)

    interior = mesh.edges_with_tag(EdgeTag.INTERIOR)
    if len(interior):
        h = mesh.edge_lengths[interior]
        w = _edge_weights(mesh, interior, rule)
        v1, s1 = _stresses_on_edges(U, interior, 0, rule, mat)
        v2, s2 = _stresses_on_edges(U, interior, 1, rule, mat)
        n = np.broadcast_to(mesh.edge_normals[interior][:, None, :], v1.shape)
        jump_sigma = traction(s1 - s2, n)
        eta[2][interior] = h * np.einsum("eq,eqc,eqc->e", w, jump_sigma, jump_sigma)
        eta[5][interior] = np.einsum("eq,eqc,eqc->e", w, v1 - v2, v1 - v2) / h

    neumann = mesh.edges_with_tag(EdgeTag.NEUMANN)
    if len(neumann):
        h = mesh.edge_lengths[neumann]
        w = _edge_weights(mesh, neumann, data_rule)
        _, s1 = _stresses_on_edges(U, neumann, 0, data_rule, mat)
        n = np.broadcast_to(mesh.edge_normals[neumann][:, None, :], s1.shape[:-1])
        r = -traction(s1, n)
        if spec.traction is not None:
            pts = edge_points(mesh, neumann, data_rule.points)
            r = r + spec.traction(pts.reshape(-1, 2), n.reshape(-1, 2)).reshape(r.shape)
        eta[3][neumann] = h * np.einsum("eq,eqc,eqc->e", w, r, r)

    dirichlet = mesh.edges_with_tag(EdgeTag.DIRICHLET)
    if len(dirichlet):
        h = mesh.edge_lengths[dirichlet]
        w = _edge_weights(mesh, dirichlet, data_rule)
        v1, _ = evaluate_on_edges(U, dirichlet, 0, data_rule)
        if spec.dirichlet is not None:
            pts = edge_points(mesh, dirichlet, data_rule.points)
            v1 = v1 - spec.dirichlet(pts.reshape(-1, 2)).reshape(v1.shape)
        eta[5][dirichlet] = np.einsum("eq,eqc,eqc->e", w, v1, v1) / h

    contact = multiplier.edges
    if len(contact):
        h = mesh.edge_lengths[contact]
        w = _edge_weights(mesh, contact, rule)
        _, s1 = _stresses_on_edges(U, contact, 0, rule, mat)
        n = np.broadcast_to(mesh.edge_normals[contact][:, None, :], s1.shape[:-1])
        r = multiplier.vectors()[:, None, :] + traction(s1, n)
        eta[4][contact] = h * np.einsum("eq,eqc,eqc->e", w, r, r)

        enriched = enrich(U)
        in_contact_set = set(partition.contact_edges.tolist())
        for k, e in enumerate(contact):
            trace = split_at_roots(_normal_trace(spec, enriched, int(e)))
            eta[7][e] = h_half_norm_edge(signed_part(trace, positive=True), squared=True)
            if int(e) in in_contact_set:
                eta[6][e] = -multiplier.normal_component[k] * integrate(signed_part(trace, positive=False))

    report = EstimatorReport(
        eta1=eta1, eta2=eta[2], eta3=eta[3], eta4=eta[4], eta5=eta[5], eta6=eta[6], eta7=eta[7],
        edge_triangles=mesh.edge_triangles,
    )
    parts = ", ".join(f"eta{i}^2={v:.3e}" for i, v in report.totals.items())
    logger.info(f"Estimator: eta_h={report.total:.4e} ({parts})")
    return report
