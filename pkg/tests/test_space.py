from math import factorial

import numpy as np
import pytest

from modules.Elasticity_Module.hooke import Material, stress, strain
from modules.Mesh_Module.mesh import EdgeTag, build_structured_unit_square
from modules.Mesh_Module.refinement import bisect
from modules.Space_Module.basis import NODE_BARYCENTRIC, basis_hessians, eval_basis
from modules.Space_Module.dg_space import (
    DiscreteField,
    DofMap,
    edge_parameter_barycentric,
    edge_points,
    evaluate_at_points,
    interpolate,
)
from modules.Space_Module.quadrature import edge_quadrature, triangle_quadrature
from modules.Space_Module.segments import integrate_on_segment, segment_breakpoints
from modules.Space_Module.traces import edge_traces
from utils.errors import AssemblyError


def quadratic_field(points):
    x, y = points[:, 0], points[:, 1]
    return np.column_stack([x * x - 2.0 * x * y + 0.5, 3.0 * y * y + x - 1.0])


@pytest.mark.parametrize("degree", [1, 5, 7, 8, 10])
def test_triangle_quadrature_exactness(degree):
    rule = triangle_quadrature(degree)
    x, y = rule.reference_xy().T
    assert np.isclose(rule.weights.sum(), 0.5)
    for i in range(degree + 1):
        for j in range(degree + 1 - i):
            exact = factorial(i) * factorial(j) / factorial(i + j + 2)
            assert np.isclose(rule.weights @ (x ** i * y ** j), exact, rtol=1e-12, atol=1e-15)


def test_triangle_quadrature_rejects_degree_zero():
    with pytest.raises(ValueError):
        triangle_quadrature(0)


@pytest.mark.parametrize("n_points", [1, 3, 5])
def test_edge_quadrature_exactness(n_points):
    rule = edge_quadrature(n_points)
    for k in range(2 * n_points):
        assert np.isclose(rule.weights @ rule.points ** k, 1.0 / (k + 1), rtol=1e-13)


def test_basis_is_nodal_and_partition_of_unity(rng):
    values, _ = eval_basis(NODE_BARYCENTRIC)
    assert np.allclose(values, np.eye(6))

    bary = rng.dirichlet(np.ones(3), size=20)
    values, grads = eval_basis(bary)
    assert np.allclose(values.sum(axis=-1), 1.0)
    assert np.allclose(grads.sum(axis=-2), 0.0)


def test_interpolation_reproduces_quadratics(mp1, rng):
    mesh = bisect(build_structured_unit_square(2, mp1.boundary), [1, 6])
    field = interpolate(DofMap(mesh), quadratic_field)
    tri = rng.integers(0, mesh.n_triangles, size=30)
    bary = rng.dirichlet(np.ones(3), size=30)
    geom = field.dofmap.geometry
    points = geom.origins[tri] + np.einsum("nij,nj->ni", geom.jacobians[tri], bary[:, 1:])
    assert np.allclose(evaluate_at_points(field, tri, points), quadratic_field(points), atol=1e-12)


def test_basis_hessians_of_quadratic(mp1_mesh):
    field = interpolate(DofMap(mp1_mesh), quadratic_field)
    hess = np.einsum("tajk,tac->tcjk", basis_hessians(field.dofmap.geometry.inv_jacobians), field.nodal())
    expected = np.array([[[2.0, -2.0], [-2.0, 0.0]], [[0.0, 0.0], [0.0, 6.0]]])
    assert np.allclose(hess, expected[None], atol=1e-10)


def test_discrete_field_checks_length(mp1_mesh):
    with pytest.raises(AssemblyError):
        DiscreteField(np.zeros(5), DofMap(mp1_mesh))


@pytest.mark.parametrize("side", [0, 1])
def test_edge_parameterization_matches_both_sides(mp1_mesh, side):
    interior = mp1_mesh.edges_with_tag(EdgeTag.INTERIOR)
    rule = edge_quadrature()
    bary = edge_parameter_barycentric(mp1_mesh, interior, side, rule.points)
    tri = mp1_mesh.edge_triangles[interior, side]
    corners = mp1_mesh.vertices[mp1_mesh.triangles[tri]]  # (ne, 3, 2)
    mapped = np.einsum("eqk,ekd->eqd", bary, corners)
    assert np.allclose(mapped, edge_points(mp1_mesh, interior, rule.points))


def test_traces_of_smooth_field(mp1_mesh):
    field = interpolate(DofMap(mp1_mesh), quadratic_field)
    mat = Material(mu=1.0, lam=1.0)
    for e in mp1_mesh.edges_with_tag(EdgeTag.INTERIOR):
        tr = edge_traces(field, int(e), material=mat)
        assert not tr.is_boundary
        assert np.allclose(tr.jump, 0.0, atol=1e-12)
        assert np.allclose(tr.stress_jump, 0.0, atol=1e-10)
        assert np.allclose(tr.average, quadratic_field(tr.points))
        assert np.isclose(tr.weights.sum(), mp1_mesh.edge_lengths[e])

    e = int(mp1_mesh.edges_with_tag(EdgeTag.CONTACT)[0])
    tr = edge_traces(field, e, material=mat)
    assert tr.is_boundary
    v = quadratic_field(tr.points)
    assert np.allclose(tr.jump, np.einsum("qi,j->qij", v, tr.normal))
    assert np.allclose(tr.average, v)


def test_traces_of_single_triangle_bump(mp1_mesh):
    coefficients = np.zeros(12 * mp1_mesh.n_triangles)
    coefficients[12 * 0:12 * 1] = 1.0
    field = DiscreteField(coefficients, DofMap(mp1_mesh))
    for e in np.flatnonzero((mp1_mesh.edge_triangles[:, 0] == 0) & (mp1_mesh.edge_triangles[:, 1] >= 0)):
        tr = edge_traces(field, int(e))
        n = mp1_mesh.edge_normals[e]
        assert np.allclose(tr.jump, np.einsum("i,j->ij", [1.0, 1.0], n)[None])
        assert np.allclose(tr.average, 0.5)
        assert tr.stresses is None


def test_stress_of_traces_matches_hooke(mp1_mesh):
    field = interpolate(DofMap(mp1_mesh), quadratic_field)
    mat = Material(mu=2.0, lam=3.0)
    e = int(mp1_mesh.edges_with_tag(EdgeTag.NEUMANN)[0])
    tr = edge_traces(field, e, material=mat)
    x, y = tr.points[:, 0], tr.points[:, 1]
    grad = np.zeros((len(x), 2, 2))
    grad[:, 0, 0] = 2.0 * x - 2.0 * y
    grad[:, 0, 1] = -2.0 * x
    grad[:, 1, 0] = 1.0
    grad[:, 1, 1] = 6.0 * y
    assert np.allclose(tr.stresses[0], stress(strain(grad), mat))


def test_segment_integration_splits_at_kink():
    p0, p1 = np.array([1.0, 0.0]), np.array([1.0, 1.0])
    assert segment_breakpoints(p0, p1, [(1.0, 0.5), (0.0, 0.5), (1.0, 1.0)]) == [0.5]
    value = integrate_on_segment(lambda p: -0.2 + np.abs(0.5 - p[:, 1]), p0, p1, [(1.0, 0.5)])
    assert np.isclose(value, 0.05, atol=1e-14)
