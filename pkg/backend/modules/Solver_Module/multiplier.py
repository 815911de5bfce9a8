"""
Discrete Lagrange multiplier on the contact boundary.

The residual R = F - A U of a solution is a combination of the contact rows,
R = B^T Lambda, and pairing with any test field gives
    L(v) - A_h(u_h, v) = sum_e Lambda_e int_e v . n_c ds = int_{Gamma_C} lambda_h . v ds
so lambda_h is constant per contact edge with normal value Lambda_e and no
tangential part.
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from modules.Solver_Module.pdas import ActiveSetPartition, ComplementaritySystem
from utils.errors import MultiplierConsistencyError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MultiplierField:
    edges: np.ndarray
    normal_component: np.ndarray      # lambda^1 per contact edge
    tangential_component: np.ndarray  # lambda^2 per contact edge, zero
    normal: np.ndarray

    def vectors(self) -> np.ndarray:
        """lambda_h as (m, 2) vectors in Cartesian components."""
        return (self.normal_component[:, None] * self.normal[None, :]
                + self.tangential_component[:, None] * np.array([-self.normal[1], self.normal[0]])[None, :])

    def on_edge(self, edge: int) -> float:
        k = np.flatnonzero(self.edges == edge)
        return float(self.normal_component[k[0]]) if len(k) else 0.0


def _rounding_scale(system: ComplementaritySystem, U: np.ndarray) -> float:
    A = system.operator.matrix
    return float(np.abs(system.load.values).max(initial=0.0) + (abs(A) @ np.abs(U)).max(initial=0.0))


def recover_multiplier(
    U,
    system: ComplementaritySystem,
    partition: Optional[ActiveSetPartition] = None,
    rtol: float = 1e-8,
) -> MultiplierField:
    """
    Per-edge multiplier from the residual restricted to each contact triangle.

    Contact rows have disjoint supports, so Lambda_e is the least-squares
    coefficient of row e in R; edges in N_h of a given partition carry 0.
    Raises when R is not in the span of the rows.
    """
    coefficients = getattr(U, "coefficients", U)
    cons = system.constraints
    B = cons.matrix
    residual = system.load.values - system.operator.apply(coefficients)

    row_norms = np.asarray(B.multiply(B).sum(axis=1)).ravel()
    lam = np.zeros(cons.n_constraints)
    nonzero = row_norms > 0
    lam[nonzero] = (B @ residual)[nonzero] / row_norms[nonzero]
    if partition is not None:
        lam[~partition.active] = 0.0

    defect = np.abs(residual - B.T @ lam).max(initial=0.0)
    scale = max(_rounding_scale(system, coefficients), 1e-300)
    if defect > rtol * scale:
        raise MultiplierConsistencyError(
            f"Residual is not carried by the contact rows: defect {defect:.3e} > {rtol:.1e} * {scale:.3e}"
        )

    logger.debug(f"Recovered multiplier on {cons.n_constraints} edges, min={lam.min(initial=0.0):.3e}")
    return MultiplierField(
        edges=cons.edges.copy(),
        normal_component=lam,
        tangential_component=np.zeros_like(lam),
        normal=np.asarray(cons.normal, dtype=float),
    )


def project_to_zero_mean(system: ComplementaritySystem, V: np.ndarray) -> np.ndarray:
    """Remove contact-edge normal means: V - B^T (B B^T)^{-1} B V (B B^T is diagonal)."""
    B = system.constraints.matrix
    row_norms = np.asarray(B.multiply(B).sum(axis=1)).ravel()
    coeff = np.divide(B @ V, row_norms, out=np.zeros(B.shape[0]), where=row_norms > 0)
    return V - B.T @ coeff


def galerkin_residual_check(
    U,
    system: ComplementaritySystem,
    n_samples: int = 50,
    rng: Optional[np.random.Generator] = None,
) -> float:
    """
    max |L(v) - A_h(u_h, v)| / (||v|| (||F|| + ||A U||)) over random v with zero
    contact-edge normal means.
    """
    rng = rng or np.random.default_rng(0)
    coefficients = getattr(U, "coefficients", U)
    F = system.load.values
    AU = system.operator.apply(coefficients)
    scale = max(np.linalg.norm(F) + np.linalg.norm(AU), 1e-300)

    worst = 0.0
    for _ in range(n_samples):
        V = project_to_zero_mean(system, rng.standard_normal(len(F)))
        norm_v = np.linalg.norm(V)
        if norm_v == 0:
            continue
        worst = max(worst, abs(F @ V - V @ AU) / (norm_v * scale))
    return float(worst)
