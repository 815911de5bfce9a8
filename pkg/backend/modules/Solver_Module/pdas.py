"""
Primal-dual active set solution of the discrete contact problem

    A U + B^T Lambda = F,   Lambda >= 0,   B U - G <= 0,   Lambda . (B U - G) = 0.

Each iteration guesses the active set {e : Lambda_e + c (B U - G)_e > 0} and
solves the equality-constrained saddle system with a sparse LU.
"""
import itertools
import logging
from dataclasses import dataclass, field as dc_field
from typing import Iterator, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from modules.Assembly_Module.constraints import ConstraintSystem
from modules.Assembly_Module.dg_operator import SparseOperator
from modules.Assembly_Module.load import LoadVector
from modules.Space_Module.dg_space import DiscreteField, DofMap
from utils.errors import ActiveSetNotConvergedError, SingularSystemError, SolverError

logger = logging.getLogger(__name__)

DEFAULT_MAXITER = 50
MAX_ENUMERATED_CONSTRAINTS = 12


@dataclass(frozen=True)
class ComplementaritySystem:
    operator: SparseOperator
    load: LoadVector
    constraints: ConstraintSystem
    space: Optional[DofMap] = None
    scaling: Optional[float] = None

    @property
    def c(self) -> float:
        if self.scaling is not None:
            if not self.scaling > 0:
                raise SolverError(f"PDAS scaling must be positive, got {self.scaling}")
            return float(self.scaling)
        return 1e3 * float(self.operator.matrix.diagonal().max())


@dataclass(frozen=True)
class ActiveSetPartition:
    """Contact edges split into C_h (active) and N_h (inactive)."""

    edges: np.ndarray
    active: np.ndarray  # bool per constraint

    @property
    def contact_edges(self) -> np.ndarray:
        return self.edges[self.active]

    @property
    def noncontact_edges(self) -> np.ndarray:
        return self.edges[~self.active]


@dataclass(frozen=True)
class PDASResult:
    coefficients: np.ndarray
    multipliers: np.ndarray
    partition: ActiveSetPartition
    iterations: int
    kkt_residual: float
    history: List[int] = dc_field(default_factory=list)
    space: Optional[DofMap] = None

    @property
    def field(self) -> Optional[DiscreteField]:
        if self.space is None:
            return None
        return DiscreteField(self.coefficients, self.space)

    def __iter__(self) -> Iterator:
        solution = self.field if self.space is not None else self.coefficients
        return iter((solution, self.multipliers, self.partition, self.iterations))


def kkt_residual(system: ComplementaritySystem, U: np.ndarray, lam: np.ndarray) -> float:
    """Largest KKT defect, relative to ||F||."""
    A, F = system.operator.matrix, system.load.values
    B, G = system.constraints.matrix, system.constraints.gap
    scale = max(np.linalg.norm(F), 1e-300)
    slack = B @ U - G
    parts = [
        np.linalg.norm(A @ U + B.T @ lam - F) / scale,
        max(0.0, -lam.min(initial=0.0)) / scale,
        max(0.0, slack.max(initial=0.0)) / scale,
        np.abs(lam * slack).max(initial=0.0) / scale,
    ]
    return float(max(parts))


def _solve_saddle(system: ComplementaritySystem, active: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    A = system.operator.matrix.tocsc()
    F = system.load.values
    B = system.constraints.matrix
    lam = np.zeros(system.constraints.n_constraints)
    idx = np.flatnonzero(active)

    if len(idx) == 0:
        K, rhs = A, F
    else:
        B_A = B[idx]
        K = sp.bmat([[A, B_A.T], [B_A, None]], format="csc")
        rhs = np.concatenate([F, system.constraints.gap[idx]])

    try:
        x = splu(K).solve(rhs)
    except RuntimeError as e:
        edges = system.constraints.edges[idx].tolist()
        raise SingularSystemError(f"Singular saddle system for active set {edges}: {e}", active_set=edges) from e
    if not np.all(np.isfinite(x)):
        edges = system.constraints.edges[idx].tolist()
        raise SingularSystemError(f"Non-finite saddle solution for active set {edges}", active_set=edges)

    n = system.operator.n_dofs
    lam[idx] = x[n:]
    return x[:n], lam


def _result(system, U, lam, active, iterations, history) -> PDASResult:
    partition = ActiveSetPartition(system.constraints.edges, active.copy())
    return PDASResult(
        coefficients=U,
        multipliers=lam,
        partition=partition,
        iterations=iterations,
        kkt_residual=kkt_residual(system, U, lam),
        history=history,
        space=system.space,
    )


def pdas_solve(
    system: ComplementaritySystem,
    U0: Optional[DiscreteField] = None,
    maxiter: int = DEFAULT_MAXITER,
) -> PDASResult:
    """Active set iteration started from U0 (default: unconstrained solution) and Lambda = 0."""
    c = system.c
    cons = system.constraints
    m = cons.n_constraints

    if U0 is None:
        U, _ = _solve_saddle(system, np.zeros(m, dtype=bool))
    else:
        U = U0.coefficients
    lam = np.zeros(m)
    active = (lam + c * cons.violation(U)) > 0
    previous = active
    seen = {active.tobytes()}
    history: List[int] = []

    for it in range(1, maxiter + 1):
        U, lam = _solve_saddle(system, active)
        updated = (lam + c * cons.violation(U)) > 0
        changes = int(np.count_nonzero(updated != active))
        history.append(int(active.sum()))
        logger.info(
            f"PDAS iter {it}: active={int(active.sum())}/{m}, changes={changes}, "
            f"kkt={kkt_residual(system, U, lam):.3e}"
        )
        if changes == 0:
            return _result(system, U, lam, active, it, history)
        if updated.tobytes() in seen:
            raise ActiveSetNotConvergedError(
                f"PDAS active set cycled after {it} iterations",
                previous_set=cons.edges[active].tolist(),
                last_set=cons.edges[updated].tolist(),
            )
        seen.add(updated.tobytes())
        previous, active = active, updated

    raise ActiveSetNotConvergedError(
        f"PDAS did not converge in {maxiter} iterations",
        previous_set=cons.edges[previous].tolist(),
        last_set=cons.edges[active].tolist(),
    )


def solve_by_enumeration(system: ComplementaritySystem, tol: float = 1e-10) -> PDASResult:
    """
    Try every active set and keep the first that satisfies sign and feasibility.

    Only for small instances (at most MAX_ENUMERATED_CONSTRAINTS contact edges).
    """
    cons = system.constraints
    m = cons.n_constraints
    if m > MAX_ENUMERATED_CONSTRAINTS:
        raise SolverError(f"Enumeration over {m} constraints is too expensive")

    F = system.load.values
    lam_tol = tol * max(np.abs(F).max(initial=0.0), 1.0)
    tried = 0
    for bits in itertools.product((False, True), repeat=m):
        active = np.array(bits, dtype=bool)
        tried += 1
        try:
            U, lam = _solve_saddle(system, active)
        except SingularSystemError:
            continue
        slack = cons.violation(U)
        gap_tol = tol * max((abs(cons.matrix) @ np.abs(U)).max(initial=0.0), np.abs(cons.gap).max(initial=0.0), 1e-300)
        if (lam >= -lam_tol).all() and (slack <= gap_tol).all():
            logger.debug(f"Enumeration: feasible active set found after {tried} candidates")
            return _result(system, U, lam, active, tried, [int(active.sum())])

    raise SolverError(f"No feasible active set among {tried} candidates")
