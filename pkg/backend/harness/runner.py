"""Run a study described by a StudyConfig (shared by the CLI and the HTTP API)."""
import logging
from typing import List, Optional

from tabulate import tabulate

from harness.results_io import MeshSnapshotWriter, emit_results
from harness.studies import RunRecord, run_adaptive, run_convergence_study, run_label
from modules.Assembly_Module.dg_operator import DGMethod
from modules.Problems_Module.model_problems import build_problem
from utils.config import StudyConfig

logger = logging.getLogger(__name__)

SUMMARY_COLUMNS = ("level", "ndofs", "error", "eoc", "eta_total", "eff_index", "pdas_iters")


def run_study(config: StudyConfig) -> List[RunRecord]:
    """Build the problem, run the configured strategy, write CSV and snapshots if requested."""
    problem = build_problem(config.problem, config.problem_overrides)
    method = DGMethod(config.method)
    sink: Optional[MeshSnapshotWriter] = None
    if config.emit_meshes:
        sink = MeshSnapshotWriter(config.emit_meshes, run_label(problem, method, config.strategy))

    logger.info(f"Running {config.strategy} study: problem={config.problem}, method={method.value}")
    if config.strategy == "uniform":
        records = run_convergence_study(
            problem, method, config.levels,
            penalty=config.penalty,
            initial_n=config.resolved_initial_n(),
            quad_degree=config.quad_degree,
            mesh_sink=sink,
        )
    else:
        records = run_adaptive(
            problem, method, config.theta, config.max_dofs,
            penalty=config.penalty,
            initial_n=config.resolved_initial_n(),
            max_iterations=config.max_iterations,
            quad_degree=config.quad_degree,
            mesh_sink=sink,
        )

    if config.output:
        emit_results(records, config.output)
    return records


def summary_table(records: List[RunRecord]) -> str:
    rows = []
    for r in records:
        row = r.to_dict()
        rows.append([row[c] if row[c] is not None else "-" for c in SUMMARY_COLUMNS])
    return tabulate(rows, headers=list(SUMMARY_COLUMNS), floatfmt=".4e", tablefmt="github")
