"""
Uniform convergence and adaptive studies.

Both produce one RunRecord per level/iteration; EOC is only defined between
consecutive uniform levels (h halves), as log2(error_k / error_{k+1}).
"""
import logging
import math
from dataclasses import asdict, dataclass
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from agent.adaptive_agent import adaptive_loop
from harness.level_solver import LevelSolution, solve_on_mesh
from modules.Assembly_Module.dg_operator import DGMethod
from modules.Mesh_Module.mesh import Mesh, build_structured_unit_square
from modules.Mesh_Module.refinement import uniform_refine
from modules.Problems_Module.model_problems import ProblemSpec

logger = logging.getLogger(__name__)

MeshSink = Callable[[int, Mesh], None]

CSV_COLUMNS = (
    ["run", "level", "h", "ndofs", "error", "eoc"]
    + [f"eta{i}sq" for i in range(1, 8)]
    + ["eta_total", "eff_index", "pdas_iters", "wall_ms"]
)


@dataclass(frozen=True)
class RunRecord:
    run: str
    level: int
    h: Optional[float]
    ndofs: int
    error: Optional[float]
    eoc: Optional[float]
    eta1sq: float
    eta2sq: float
    eta3sq: float
    eta4sq: float
    eta5sq: float
    eta6sq: float
    eta7sq: float
    eta_total: float
    eff_index: Optional[float]
    pdas_iters: int
    wall_ms: float

    def to_dict(self) -> Dict:
        return asdict(self)

    @classmethod
    def from_solution(
        cls,
        run: str,
        level: int,
        solution: LevelSolution,
        h: Optional[float] = None,
        eoc: Optional[float] = None,
    ) -> "RunRecord":
        totals = solution.report.totals
        return cls(
            run=run,
            level=level,
            h=h,
            ndofs=solution.n_dofs,
            error=solution.error,
            eoc=eoc,
            **{f"eta{i}sq": totals[i] for i in range(1, 8)},
            eta_total=solution.report.total,
            eff_index=solution.report.efficiency_index,
            pdas_iters=solution.pdas.iterations,
            wall_ms=solution.wall_ms,
        )


def run_label(problem: ProblemSpec, method: DGMethod, strategy: str) -> str:
    return f"{problem.name}-{DGMethod(method).value}-{strategy}"


def eoc_sequence(errors: Sequence[Optional[float]]) -> List[Optional[float]]:
    """[None, log2(e_1/e_2), ...]; None wherever either error is missing or zero."""
    eocs: List[Optional[float]] = [None] * len(errors)
    for k in range(1, len(errors)):
        prev, cur = errors[k - 1], errors[k]
        if prev and cur and prev > 0 and cur > 0:
            eocs[k] = math.log2(prev / cur)
    return eocs


def loglog_slope(ndofs: Sequence[int], values: Sequence[float], last: int = 5) -> float:
    """Least-squares slope of log(values) against log(ndofs) over the final `last` entries."""
    x = np.log(np.asarray(ndofs[-last:], dtype=float))
    y = np.log(np.asarray(values[-last:], dtype=float))
    if len(x) < 2:
        raise ValueError("Need at least two points for a slope")
    return float(np.polyfit(x, y, 1)[0])


def moving_average(values: Sequence[float], window: int = 5) -> np.ndarray:
    """Means over each run of `window` consecutive entries."""
    if window < 1 or len(values) < window:
        raise ValueError(f"Need at least {max(window, 1)} values for a window of {window}")
    return np.convolve(np.asarray(values, dtype=float), np.ones(window) / window, mode="valid")


def run_convergence_study(
    problem: ProblemSpec,
    method: DGMethod = DGMethod.SIPG,
    levels: int = 5,
    penalty: Optional[float] = None,
    initial_n: int = 1,
    quad_degree: int = 7,
    mesh_sink: Optional[MeshSink] = None,
) -> List[RunRecord]:
    """Solve on uniform meshes with h = 1/(initial_n 2^k), k = 1..levels."""
    if levels < 1:
        raise ValueError("levels must be >= 1")
    method = DGMethod(method)
    if not problem.has_exact_solution:
        logger.warning(f"{problem.name} has no exact solution; error and EOC columns stay empty")

    label = run_label(problem, method, "uniform")
    mesh = build_structured_unit_square(initial_n, problem.boundary)
    solutions: List[LevelSolution] = []
    for level in range(1, levels + 1):
        mesh = uniform_refine(mesh)
        logger.info(f"Uniform level {level}/{levels}: h=1/{initial_n * 2 ** level}")
        solutions.append(solve_on_mesh(problem, mesh, method, penalty, quad_degree))
        if mesh_sink is not None:
            mesh_sink(level, mesh)

    eocs = eoc_sequence([s.error for s in solutions])
    return [
        RunRecord.from_solution(label, level, s, h=1.0 / (initial_n * 2 ** level), eoc=eoc)
        for level, (s, eoc) in enumerate(zip(solutions, eocs), start=1)
    ]


def run_adaptive(
    problem: ProblemSpec,
    method: DGMethod = DGMethod.SIPG,
    theta: float = 0.4,
    max_dofs: int = 200_000,
    penalty: Optional[float] = None,
    initial_n: Optional[int] = None,
    max_iterations: int = 60,
    quad_degree: int = 7,
    mesh_sink: Optional[MeshSink] = None,
) -> List[RunRecord]:
    method = DGMethod(method)
    solutions = adaptive_loop(
        problem, method, theta, max_dofs,
        penalty=penalty, initial_n=initial_n, max_iterations=max_iterations, quad_degree=quad_degree,
    )
    label = run_label(problem, method, "adaptive")
    records = []
    for level, solution in enumerate(solutions, start=1):
        if mesh_sink is not None:
            mesh_sink(level, solution.mesh)
        records.append(RunRecord.from_solution(label, level, solution))
    return records
