import numpy as np
import pytest
from scipy.sparse.linalg import spsolve

from modules.Assembly_Module.constraints import assemble_constraints
from modules.Assembly_Module.dg_operator import (
    DGMethod,
    assemble_operator,
    default_penalty,
    export_operator_coo,
    norm_matrices,
)
from modules.Assembly_Module.load import assemble_dirichlet_lift, assemble_load
from modules.Elasticity_Module.hooke import Material, stress, strain, traction
from modules.Mesh_Module.mesh import EdgeTag, build_structured_unit_square
from modules.Mesh_Module.refinement import bisect
from modules.Space_Module.dg_space import DofMap, interpolate
from utils.errors import AssemblyError, InvalidPenaltyError

UNIT = Material(mu=1.0, lam=1.0)


def _operator(mesh, method, eta=None, mat=UNIT):
    space = DofMap(mesh)
    eta = eta if eta is not None else default_penalty(method)
    return space, assemble_operator(mesh, space, mat, method, eta)


def test_default_penalty():
    assert default_penalty(DGMethod.SIPG) == 70.0
    assert default_penalty("nipg") == 70.0
    with pytest.raises(ValueError):
        default_penalty("ldg")


def test_sipg_is_symmetric_nipg_is_not(mp1_mesh):
    _, sipg = _operator(mp1_mesh, DGMethod.SIPG)
    _, nipg = _operator(mp1_mesh, DGMethod.NIPG)
    A = sipg.matrix.toarray()
    assert np.abs(A - A.T).max() <= 1e-12 * np.abs(A).max()
    B = nipg.matrix.toarray()
    assert np.abs(B - B.T).max() > 1e-3


@pytest.mark.parametrize("n", [1, 2, 4])
def test_sipg_symmetric_part_is_positive_definite(mp1, n):
    mesh = build_structured_unit_square(n, mp1.boundary)
    _, op = _operator(mesh, DGMethod.SIPG, eta=70.0)
    A = op.matrix.toarray()
    assert np.linalg.eigvalsh(0.5 * (A + A.T)).min() > 0


@pytest.mark.parametrize("method", [DGMethod.SIPG, DGMethod.NIPG])
def test_coercivity_and_boundedness(mp1, method, rng):
    mesh = bisect(build_structured_unit_square(2, mp1.boundary), [0, 3])
    space, op = _operator(mesh, method)
    norms = norm_matrices(mesh, space, UNIT)
    dg = norms["energy"] + norms["jump"]
    full = dg + norms["average"]

    coercivity, bound = np.inf, 0.0
    for _ in range(100):
        u, v = rng.standard_normal((2, space.n_dofs))
        coercivity = min(coercivity, op.form(v, v) / (v @ (dg @ v)))
        bound = max(bound, abs(op.form(u, v)) / np.sqrt((u @ (full @ u)) * (v @ (full @ v))))
    assert coercivity > 0.05
    assert bound < 1e3


def test_operator_preconditions(mp1_mesh, mp1):
    space = DofMap(mp1_mesh)
    with pytest.raises(InvalidPenaltyError):
        assemble_operator(mp1_mesh, space, UNIT, DGMethod.SIPG, 0.0)
    other = build_structured_unit_square(1, mp1.boundary)
    with pytest.raises(AssemblyError):
        assemble_operator(other, space, UNIT, DGMethod.SIPG, 70.0)


def test_load_integrates_constant_data(mp1_mesh):
    space = DofMap(mp1_mesh)
    F = assemble_load(mp1_mesh, space, lambda p: np.tile([1.0, 0.0], (len(p), 1)), None).values
    assert np.isclose(F[0::2].sum(), 1.0)
    assert np.isclose(F[1::2].sum(), 0.0)

    G = assemble_load(mp1_mesh, space, None, lambda p, n: np.tile([0.0, 1.0], (len(p), 1))).values
    # Neumann sides of the first model problem: x = 0 and x = 1
    assert np.isclose(G[1::2].sum(), 2.0)


def test_zero_dirichlet_data_gives_zero_lift(mp1_mesh):
    space = DofMap(mp1_mesh)
    lift = assemble_dirichlet_lift(mp1_mesh, space, UNIT, DGMethod.SIPG, 70.0, lambda p: np.zeros((len(p), 2)))
    assert not lift.values.any()


@pytest.mark.parametrize("method", [DGMethod.SIPG, DGMethod.NIPG])
def test_quadratic_solution_is_reproduced(free_boundary, method):
    """u = (x^2, x y) lies in the space, so consistency makes the discrete solution exact."""
    mat = Material(mu=1.0, lam=1.0)

    def u(p):
        return np.column_stack([p[:, 0] ** 2, p[:, 0] * p[:, 1]])

    def grad(p):
        g = np.zeros((len(p), 2, 2))
        g[:, 0, 0] = 2.0 * p[:, 0]
        g[:, 1, 0] = p[:, 1]
        g[:, 1, 1] = p[:, 0]
        return g

    def f(p):
        # -div sigma = -(mu Laplace u + (mu + lam) grad div u) = -(2 + 2 * 3, 0)
        return np.tile([-8.0, 0.0], (len(p), 1))

    def g(p, n):
        return traction(stress(strain(grad(p)), mat), n)

    mesh = bisect(build_structured_unit_square(2, free_boundary), [2, 5])
    space = DofMap(mesh)
    eta = default_penalty(method)
    op = assemble_operator(mesh, space, mat, method, eta)
    F = assemble_load(mesh, space, f, g) + assemble_dirichlet_lift(mesh, space, mat, method, eta, u)
    U = spsolve(op.matrix.tocsc(), F.values)
    assert np.allclose(U, interpolate(space, u).coefficients, atol=1e-9)


def test_constraint_rows_and_gaps(mp2):
    mesh = build_structured_unit_square(4, mp2.boundary)
    space = DofMap(mesh)
    cons = assemble_constraints(mesh, space, mp2.contact_normal, mp2.gap, mp2.gap_breakpoints)
    assert cons.n_constraints == 4
    assert np.allclose(mesh.edge_midpoints[cons.edges, 0], 1.0)

    k = int(np.flatnonzero(np.isclose(mesh.edge_midpoints[cons.edges, 1], 0.375))[0])
    assert np.isclose(cons.gap[k], -0.01875)
    assert np.isclose(cons.gap.sum(), 0.05)

    # B_e(v) = int_e v . n_c ds for v = n_c is the edge length
    V = interpolate(space, lambda p: np.tile(mp2.contact_normal, (len(p), 1))).coefficients
    assert np.allclose(cons.values(V), mesh.edge_lengths[cons.edges])
    assert cons.contains(np.zeros(space.n_dofs)) is False


def test_no_contact_edges_gives_empty_system(free_boundary):
    mesh = build_structured_unit_square(2, free_boundary)
    space = DofMap(mesh)
    cons = assemble_constraints(mesh, space, np.array([0.0, -1.0]))
    assert cons.n_constraints == 0
    assert cons.matrix.shape == (0, space.n_dofs)
    assert len(mesh.edges_with_tag(EdgeTag.CONTACT)) == 0


def test_export_operator(mp1_mesh, tmp_path):
    _, op = _operator(mp1_mesh, DGMethod.SIPG)
    path = export_operator_coo(op, tmp_path / "A.txt")
    table = np.loadtxt(path)
    assert len(table) == op.matrix.nnz
    assert path.read_text().startswith("# sipg eta=70.0")
