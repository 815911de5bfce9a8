"""One solve -> multiplier -> estimate -> error pass on a fixed mesh."""
import logging
import time
from dataclasses import dataclass
from typing import Optional, Tuple

from modules.Assembly_Module.constraints import assemble_constraints
from modules.Assembly_Module.dg_operator import DGMethod, assemble_operator, default_penalty
from modules.Assembly_Module.load import assemble_dirichlet_lift, assemble_load
from modules.Estimator_Module.residual_estimator import EstimatorReport, compute_estimators
from modules.Mesh_Module.mesh import Mesh
from modules.Problems_Module.dg_error import dg_error_components
from modules.Problems_Module.model_problems import ProblemSpec
from modules.Solver_Module.multiplier import MultiplierField, recover_multiplier
from modules.Solver_Module.pdas import ComplementaritySystem, PDASResult, pdas_solve
from modules.Space_Module.dg_space import DiscreteField, DofMap
from modules.Space_Module.quadrature import edge_quadrature, triangle_quadrature

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LevelSolution:
    mesh: Mesh
    field: DiscreteField
    multiplier: MultiplierField
    pdas: PDASResult
    report: EstimatorReport
    error: Optional[float]
    error_full: Optional[float]
    wall_ms: float

    @property
    def n_dofs(self) -> int:
        return self.field.dofmap.n_dofs


def resolve_penalty(method: DGMethod, penalty: Optional[float]) -> float:
    return float(penalty) if penalty is not None else default_penalty(method)


def build_system(
    problem: ProblemSpec,
    mesh: Mesh,
    method: DGMethod,
    eta: float,
    quad_degree: int = 7,
) -> ComplementaritySystem:
    """Operator, load with Dirichlet lift and contact rows for `problem` on `mesh`."""
    space = DofMap(mesh)
    operator = assemble_operator(mesh, space, problem.material, method, eta, triangle_quadrature(5), edge_quadrature())
    load = assemble_load(mesh, space, problem.body_force, problem.traction, quad_degree)
    load = load + assemble_dirichlet_lift(mesh, space, problem.material, method, eta, problem.dirichlet, quad_degree)
    constraints = assemble_constraints(
        mesh, space, problem.contact_normal, problem.gap, problem.gap_breakpoints,
        edge_quadrature(),
    )
    return ComplementaritySystem(operator, load, constraints, space=space)


def solve_stage(
    problem: ProblemSpec,
    mesh: Mesh,
    method: DGMethod,
    eta: float,
    quad_degree: int = 7,
) -> Tuple[ComplementaritySystem, PDASResult]:
    system = build_system(problem, mesh, method, eta, quad_degree)
    return system, pdas_solve(system)


def estimate_stage(
    problem: ProblemSpec,
    system: ComplementaritySystem,
    result: PDASResult,
    quad_degree: int = 7,
) -> Tuple[MultiplierField, EstimatorReport, Optional[float], Optional[float]]:
    """Multiplier, estimator report and (when known) the error of a solved level."""
    U = result.field
    multiplier = recover_multiplier(U, system, result.partition)
    report = compute_estimators(U, multiplier, problem, result.partition, quad_degree)

    error = error_full = None
    if problem.has_exact_solution:
        components = dg_error_components(U, problem, max(quad_degree, 8))
        error, error_full = components["error"], components["error_full"]
        report = report.with_error(error)
    return multiplier, report, error, error_full


def solve_on_mesh(
    problem: ProblemSpec,
    mesh: Mesh,
    method: DGMethod = DGMethod.SIPG,
    penalty: Optional[float] = None,
    quad_degree: int = 7,
) -> LevelSolution:
    method = DGMethod(method)
    eta = resolve_penalty(method, penalty)
    start = time.perf_counter()

    system, result = solve_stage(problem, mesh, method, eta, quad_degree)
    multiplier, report, error, error_full = estimate_stage(problem, system, result, quad_degree)
    solution = LevelSolution(
        mesh, result.field, multiplier, result, report, error, error_full,
        wall_ms=1e3 * (time.perf_counter() - start),
    )
    log_level_solution(problem, method, solution)
    return solution


def log_level_solution(problem: ProblemSpec, method: DGMethod, solution: LevelSolution):
    message = (
        f"Solved {problem.name}/{DGMethod(method).value} on {solution.mesh}: ndofs={solution.n_dofs}, "
        f"pdas_iters={solution.pdas.iterations}, eta_h={solution.report.total:.4e}"
    )
    if solution.error is not None:
        message += f", error={solution.error:.4e}, error_full={solution.error_full:.4e}"
    logger.info(message)
