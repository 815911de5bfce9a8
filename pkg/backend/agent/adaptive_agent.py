"""
LangGraph workflow for the adaptive SOLVE -> ESTIMATE -> MARK -> REFINE loop.

State flows through these nodes:
1. solve_node: assemble on the current mesh and run the active set solver
2. estimate_node: multiplier recovery, estimator contributions, error
3. mark_node: Dorfler marking of the per-triangle indicators
4. refine_node: newest vertex bisection of the marked triangles

After estimate the loop stops once the dof count exceeds max_dofs or
max_iterations records exist; any stage failure also ends the run.
"""
import logging
import time
from typing import Any, List, Optional, TypedDict

import numpy as np
from langgraph.graph import END, StateGraph

from harness.level_solver import LevelSolution, estimate_stage, log_level_solution, resolve_penalty, solve_stage
from modules.Assembly_Module.dg_operator import DGMethod
from modules.Estimator_Module.marking import doerfler_mark
from modules.Mesh_Module.mesh import Mesh, build_structured_unit_square
from modules.Mesh_Module.refinement import bisect
from modules.Problems_Module.model_problems import ProblemSpec
from utils.errors import DGContactError

logger = logging.getLogger(__name__)

NODES_PER_ITERATION = 4


class AdaptiveState(TypedDict):
    """Shared state across all workflow nodes."""

    # Input
    problem: ProblemSpec
    method: DGMethod
    penalty: float
    theta: float
    max_dofs: int
    max_iterations: int
    quad_degree: int

    # Current level
    mesh: Mesh
    started: float
    system: Any
    pdas: Any
    marked: Optional[np.ndarray]

    # Output
    records: List[LevelSolution]
    error: Optional[BaseException]
    current_step: str


def create_agent() -> Any:
    """Build and return the compiled adaptive workflow."""

    workflow = StateGraph(AdaptiveState)

    def solve_node(state: AdaptiveState) -> AdaptiveState:
        try:
            state['current_step'] = 'solve'
            state['started'] = time.perf_counter()
            state['system'], state['pdas'] = solve_stage(
                state['problem'], state['mesh'], state['method'], state['penalty'], state['quad_degree']
            )
        except DGContactError as e:
            state['error'] = e
            state['current_step'] = 'error'
        return state

    def estimate_node(state: AdaptiveState) -> AdaptiveState:
        try:
            state['current_step'] = 'estimate'
            multiplier, report, error, error_full = estimate_stage(
                state['problem'], state['system'], state['pdas'], state['quad_degree']
            )
            solution = LevelSolution(
                mesh=state['mesh'],
                field=state['pdas'].field,
                multiplier=multiplier,
                pdas=state['pdas'],
                report=report,
                error=error,
                error_full=error_full,
                wall_ms=1e3 * (time.perf_counter() - state['started']),
            )
            log_level_solution(state['problem'], state['method'], solution)
            state['records'] = state['records'] + [solution]
        except DGContactError as e:
            state['error'] = e
            state['current_step'] = 'error'
        return state

    def mark_node(state: AdaptiveState) -> AdaptiveState:
        try:
            state['current_step'] = 'mark'
            report = state['records'][-1].report
            state['marked'] = doerfler_mark(report.element_indicators(), state['theta'])
            logger.info(
                f"Adaptive iteration {len(state['records'])}: marked "
                f"{len(state['marked'])}/{state['mesh'].n_triangles} triangles"
            )
        except (DGContactError, ValueError) as e:
            state['error'] = e
            state['current_step'] = 'error'
        return state

    def refine_node(state: AdaptiveState) -> AdaptiveState:
        try:
            state['current_step'] = 'refine'
            state['mesh'] = bisect(state['mesh'], state['marked'])
        except DGContactError as e:
            state['error'] = e
            state['current_step'] = 'error'
        return state

    def after_solve(state: AdaptiveState) -> str:
        return 'stop' if state['current_step'] == 'error' else 'continue'

    def after_estimate(state: AdaptiveState) -> str:
        if state['current_step'] == 'error':
            return 'stop'
        if state['records'][-1].n_dofs > state['max_dofs']:
            logger.info(f"Adaptive loop stops: {state['records'][-1].n_dofs} dofs exceed {state['max_dofs']}")
            return 'stop'
        if len(state['records']) >= state['max_iterations']:
            logger.info(f"Adaptive loop stops after {len(state['records'])} iterations")
            return 'stop'
        return 'continue'

    def after_mark(state: AdaptiveState) -> str:
        if state['current_step'] == 'error':
            return 'stop'
        if len(state['marked']) == 0:
            logger.info("Adaptive loop stops: estimator vanishes, nothing to mark")
            return 'stop'
        return 'continue'

    # Add nodes
    workflow.add_node("solve", solve_node)
    workflow.add_node("estimate", estimate_node)
    workflow.add_node("mark", mark_node)
    workflow.add_node("refine", refine_node)

    # Define flow
    workflow.add_conditional_edges("solve", after_solve, {"continue": "estimate", "stop": END})
    workflow.add_conditional_edges("estimate", after_estimate, {"continue": "mark", "stop": END})
    workflow.add_conditional_edges("mark", after_mark, {"continue": "refine", "stop": END})
    workflow.add_conditional_edges("refine", after_solve, {"continue": "solve", "stop": END})

    workflow.set_entry_point("solve")

    return workflow.compile()


def adaptive_loop(
    problem: ProblemSpec,
    method: DGMethod = DGMethod.SIPG,
    theta: float = 0.4,
    max_dofs: int = 200_000,
    penalty: Optional[float] = None,
    initial_mesh: Optional[Mesh] = None,
    initial_n: Optional[int] = None,
    max_iterations: int = 60,
    quad_degree: int = 7,
) -> List[LevelSolution]:
    """
    Run the adaptive loop from initial_mesh (default: the structured mesh
    with the problem's initial_n) and return one LevelSolution per iteration.

    Raises the first stage failure.
    """
    if not 0.0 < theta <= 1.0:
        raise ValueError(f"theta must lie in (0, 1], got {theta}")
    if max_iterations < 1:
        raise ValueError("max_iterations must be >= 1")
    method = DGMethod(method)
    mesh = initial_mesh or build_structured_unit_square(initial_n or problem.default_initial_n, problem.boundary)

    agent = create_agent()
    initial_state = AdaptiveState(
        problem=problem,
        method=method,
        penalty=resolve_penalty(method, penalty),
        theta=theta,
        max_dofs=max_dofs,
        max_iterations=max_iterations,
        quad_degree=quad_degree,
        mesh=mesh,
        started=0.0,
        system=None,
        pdas=None,
        marked=None,
        records=[],
        error=None,
        current_step="start",
    )

    result = agent.invoke(
        initial_state,
        config={"recursion_limit": NODES_PER_ITERATION * max_iterations + 10},
    )
    if result['error'] is not None:
        raise result['error']
    return result['records']
