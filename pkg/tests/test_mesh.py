import numpy as np
import pytest

from modules.Assembly_Module.constraints import assemble_constraints
from modules.Mesh_Module.mesh import (
    BoundarySpec,
    EdgeTag,
    Mesh,
    build_structured_unit_square,
    export_mesh_text,
    read_mesh_text,
    unit_square_boundary,
)
from modules.Mesh_Module.refinement import bisect, uniform_refine
from modules.Space_Module.dg_space import DofMap
from utils.errors import ConstraintError, MeshError


def test_structured_mesh_counts(mp1):
    mesh = build_structured_unit_square(2, mp1.boundary)
    assert mesh.n_vertices == 9
    assert mesh.n_triangles == 8
    assert mesh.n_edges == 16
    assert mesh.euler_characteristic() == 1
    assert np.isclose(mesh.areas.sum(), 1.0)
    assert len(mesh.edges_with_tag(EdgeTag.CONTACT)) == 2
    assert len(mesh.edges_with_tag(EdgeTag.DIRICHLET)) == 2
    assert len(mesh.edges_with_tag(EdgeTag.NEUMANN)) == 4
    mesh.validate()


def test_single_cell_mesh(mp1):
    mesh = build_structured_unit_square(1, mp1.boundary)
    assert (mesh.n_triangles, mesh.n_vertices, mesh.n_edges) == (2, 4, 5)
    assert len(mesh.edges_with_tag(EdgeTag.INTERIOR)) == 1
    assert len(mesh.edges_with_tag(EdgeTag.CONTACT)) == 1
    mesh.validate()


@pytest.mark.parametrize("n", [0, -3])
def test_structured_mesh_rejects_bad_n(mp1, n):
    with pytest.raises(MeshError):
        build_structured_unit_square(n, mp1.boundary)


def test_boundary_normals_point_outward(mp1_mesh):
    boundary = mp1_mesh.edge_triangles[:, 1] < 0
    centered = mp1_mesh.edge_midpoints[boundary] - 0.5
    assert (np.einsum("ij,ij->i", mp1_mesh.edge_normals[boundary], centered) > 0).all()
    contact = mp1_mesh.edges_with_tag(EdgeTag.CONTACT)
    assert np.allclose(mp1_mesh.edge_normals[contact], [0.0, -1.0])


def test_longest_edge_seeding_picks_hypotenuse(mp1):
    mesh = build_structured_unit_square(1, mp1.boundary)
    ref = mesh.triangle_edges[np.arange(mesh.n_triangles), mesh.refinement_edge]
    assert np.allclose(mesh.edge_lengths[ref], np.sqrt(2.0))


def test_contact_normal_must_be_unit():
    with pytest.raises(MeshError):
        BoundarySpec(classifier=lambda m: np.full(len(m), 1), contact_normal=(0.0, -2.0))


def test_uniform_refine_preserves_area_and_shape(mp1_mesh):
    fine = uniform_refine(mp1_mesh)
    assert fine.n_triangles == 4 * mp1_mesh.n_triangles
    assert fine.generation == mp1_mesh.generation + 1
    assert np.isclose(fine.areas.sum(), 1.0)
    assert np.isclose(fine.min_angle(), mp1_mesh.min_angle())
    assert np.isclose(fine.mesh_size, mp1_mesh.mesh_size / 2)
    fine.validate()


def test_bisect_empty_marking_returns_same_mesh(mp1_mesh):
    assert bisect(mp1_mesh, []) is mp1_mesh


def test_bisect_single_triangle_is_conforming(mp1_mesh):
    refined = bisect(mp1_mesh, [3])
    refined.validate()
    assert refined.n_triangles > mp1_mesh.n_triangles
    assert refined.generation == 1
    assert np.isclose(refined.areas.sum(), 1.0)


def test_bisect_one_of_two_triangles_closes_across_diagonal(mp1):
    # both triangles share their refinement edge, so the neighbour is split too
    mesh = build_structured_unit_square(1, mp1.boundary)
    refined = bisect(mesh, [0])
    refined.validate()
    assert refined.n_triangles == 4
    assert refined.n_vertices == 5
    assert np.allclose(refined.vertices[-1], [0.5, 0.5])
    assert np.isclose(refined.areas.sum(), 1.0)


def test_bisect_rejects_out_of_range(mp1_mesh):
    with pytest.raises(MeshError):
        bisect(mp1_mesh, [mp1_mesh.n_triangles])


def test_repeated_bisection_keeps_invariants(mp1, rng):
    mesh = build_structured_unit_square(2, mp1.boundary)
    for _ in range(8):
        k = max(1, mesh.n_triangles // 5)
        marked = rng.choice(mesh.n_triangles, size=k, replace=False)
        before = mesh.n_triangles
        mesh = bisect(mesh, marked)
        assert mesh.n_triangles >= before + k
        mesh.validate()
        assert np.isclose(mesh.areas.sum(), 1.0)
        # bisection of right isosceles triangles at the right angle stays in one class
        assert mesh.min_angle() >= 45.0 - 1e-9
        contact = mesh.edges_with_tag(EdgeTag.CONTACT)
        assert np.allclose(mesh.edge_midpoints[contact, 1], 0.0)
        mesh.check_contact_assumption()


def test_contact_edges_sum_to_contact_boundary_length(mp1):
    mesh = uniform_refine(build_structured_unit_square(2, mp1.boundary))
    contact = mesh.edges_with_tag(EdgeTag.CONTACT)
    assert np.isclose(mesh.edge_lengths[contact].sum(), 1.0)


def test_triangle_with_two_contact_edges_is_rejected():
    spec = unit_square_boundary(
        bottom=EdgeTag.CONTACT, right=EdgeTag.CONTACT, top=EdgeTag.DIRICHLET, left=EdgeTag.NEUMANN,
        contact_normal=(0.0, -1.0),
    )
    mesh = build_structured_unit_square(1, spec)
    with pytest.raises(MeshError):
        mesh.check_contact_assumption()
    with pytest.raises(ConstraintError):
        assemble_constraints(mesh, DofMap(mesh), spec.contact_normal)


def test_dirichlet_nodes(mp1):
    mesh = build_structured_unit_square(1, mp1.boundary)
    nodes = mesh.dirichlet_nodes()
    # two top corners and the midpoint of the top edge
    assert len(nodes) == 3
    assert (nodes[:2] < mesh.n_vertices).all()
    assert nodes[2] >= mesh.n_vertices


def test_mesh_text_roundtrip(mp1, tmp_path):
    mesh = bisect(build_structured_unit_square(2, mp1.boundary), [0, 5])
    path = export_mesh_text(mesh, tmp_path / "snap.mesh")
    again = read_mesh_text(path, mp1.boundary, generation=mesh.generation)
    assert np.array_equal(again.vertices, mesh.vertices)
    assert np.array_equal(again.triangles, mesh.triangles)
    assert np.array_equal(again.refinement_edge, mesh.refinement_edge)
    assert np.array_equal(again.edge_tags, mesh.edge_tags)


def test_clockwise_triangle_rejected(mp1):
    vertices = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    with pytest.raises(MeshError):
        Mesh(vertices, np.array([[0, 2, 1]]), np.array([0]), mp1.boundary)
