"""Errors of discrete solutions against a known exact solution in DG norms."""
import logging
from typing import Dict

import numpy as np

from modules.Elasticity_Module.hooke import strain, stress
from modules.Mesh_Module.mesh import EdgeTag
from modules.Problems_Module.model_problems import ProblemSpec
from modules.Space_Module.dg_space import DiscreteField, edge_points, evaluate_in_elements, evaluate_on_edges
from modules.Space_Module.quadrature import edge_quadrature_for_degree, triangle_quadrature

logger = logging.getLogger(__name__)


def dg_error_components(U: DiscreteField, spec: ProblemSpec, degree: int = 8) -> Dict[str, float]:
    """
    Squared parts of the error e = u - u_h:
      energy  = sum_K (sigma(e), eps(e))_K
      jump    = sum_{E0} h_e^{-1} ||[[e]]||^2
      average = sum_{E0} h_e ||{eps(e)}||^2
    plus error = sqrt(energy + jump) and error_full = sqrt(energy + jump + average).
    """
    spec.require_exact_solution()
    mesh, mat = U.mesh, spec.material
    rule = triangle_quadrature(degree)

    _, grads_h = evaluate_in_elements(U, rule)
    points = U.dofmap.geometry.map_points(rule.points)
    nt, nq = points.shape[:2]
    grads = spec.exact_gradient(points.reshape(-1, 2)).reshape(nt, nq, 2, 2)
    eps = strain(grads - grads_h)
    weights = rule.weights[None, :] * U.dofmap.geometry.dets[:, None]
    energy = float(np.einsum("tq,tqij,tqij->", weights, stress(eps, mat), eps))

    edge_rule = edge_quadrature_for_degree(degree)
    jump = average = 0.0

    interior = mesh.edges_with_tag(EdgeTag.INTERIOR)
    if len(interior):
        v1, g1 = evaluate_on_edges(U, interior, 0, edge_rule)
        v2, g2 = evaluate_on_edges(U, interior, 1, edge_rule)
        h = mesh.edge_lengths[interior]
        w = edge_rule.weights[None, :] * h[:, None]
        jump += float(np.einsum("eq,eqc,eqc->", w / h[:, None], v1 - v2, v1 - v2))
        pts = edge_points(mesh, interior, edge_rule.points)
        g = spec.exact_gradient(pts.reshape(-1, 2)).reshape(g1.shape)
        e_avg = strain(g - 0.5 * (g1 + g2))
        average += float(np.einsum("eq,eqij,eqij->", w * h[:, None], e_avg, e_avg))

    dirichlet = mesh.edges_with_tag(EdgeTag.DIRICHLET)
    if len(dirichlet):
        v1, g1 = evaluate_on_edges(U, dirichlet, 0, edge_rule)
        h = mesh.edge_lengths[dirichlet]
        w = edge_rule.weights[None, :] * h[:, None]
        pts = edge_points(mesh, dirichlet, edge_rule.points).reshape(-1, 2)
        diff = spec.exact_solution(pts).reshape(v1.shape) - v1
        jump += float(np.einsum("eq,eqc,eqc->", w / h[:, None], diff, diff))
        e_bd = strain(spec.exact_gradient(pts).reshape(g1.shape) - g1)
        average += float(np.einsum("eq,eqij,eqij->", w * h[:, None], e_bd, e_bd))

    return {
        "energy": energy,
        "jump": jump,
        "average": average,
        "error": float(np.sqrt(energy + jump)),
        "error_full": float(np.sqrt(energy + jump + average)),
    }


def compute_dg_error(U: DiscreteField, spec: ProblemSpec, degree: int = 8) -> float:
    """(|u - u_h|_h^2 + |u - u_h|_*^2)^{1/2}."""
    return dg_error_components(U, spec, degree)["error"]
