"""
The two shipped contact problems on the unit square.

Model Problem 1: manufactured solution
    u = (y^2 (y - 1), (x - 2) y (1 - y) e^y),  lambda = mu = 1,
contact at y = 0 (normal (0, -1), zero gap), clamped at y = 1, traction
sigma(u) n on x = 0 and x = 1, f = -div sigma(u).

Model Problem 2: rigid wedge
    E = 500, nu = 0.3, u = (-0.1, 0) on x = 0, traction free on y = 0, 1,
contact at x = 1 (normal (1, 0)) against u_n <= -0.2 + |0.5 - y|, f = 0.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Mapping, Optional, Tuple

import numpy as np

from modules.Elasticity_Module.hooke import Material, strain, stress, traction
from modules.Mesh_Module.mesh import BoundarySpec, EdgeTag, unit_square_boundary
from utils.errors import ConfigError, ProblemDefinitionError

logger = logging.getLogger(__name__)

VectorField = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    boundary: BoundarySpec
    material: Material
    gap: Callable[[np.ndarray], np.ndarray]
    body_force: Optional[VectorField]
    traction: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]]
    dirichlet: Optional[VectorField]
    exact_solution: Optional[VectorField] = None
    exact_gradient: Optional[Callable[[np.ndarray], np.ndarray]] = None
    gap_breakpoints: Tuple[Tuple[float, float], ...] = ()
    default_initial_n: int = 1
    constants: Dict[str, Any] = field(default_factory=dict)

    @property
    def contact_normal(self) -> np.ndarray:
        return np.asarray(self.boundary.contact_normal, dtype=float)

    @property
    def has_exact_solution(self) -> bool:
        return self.exact_solution is not None and self.exact_gradient is not None

    def require_exact_solution(self):
        if not self.has_exact_solution:
            raise ProblemDefinitionError(f"{self.name} has no exact solution")


def _check_overrides(overrides: Mapping[str, Any], allowed, name: str) -> Dict[str, Any]:
    overrides = dict(overrides or {})
    unknown = set(overrides) - set(allowed)
    if unknown:
        raise ConfigError(f"Unknown {name} overrides: {sorted(unknown)}")
    return overrides


# ----------------------------------------------------------------------
# Model Problem 1
# ----------------------------------------------------------------------
def _mp1_profile(y: np.ndarray):
    """p = y (1 - y) e^y and its first two derivatives."""
    e = np.exp(y)
    p = (y - y * y) * e
    dp = (1.0 - y - y * y) * e
    d2p = -(y * y + 3.0 * y) * e
    return p, dp, d2p


def mp1_displacement(points: np.ndarray) -> np.ndarray:
    x, y = points[:, 0], points[:, 1]
    p, _, _ = _mp1_profile(y)
    return np.column_stack([y * y * (y - 1.0), (x - 2.0) * p])


def mp1_gradient(points: np.ndarray) -> np.ndarray:
    """G[n, c, j] = d_j u_c."""
    x, y = points[:, 0], points[:, 1]
    p, dp, _ = _mp1_profile(y)
    grad = np.zeros((len(points), 2, 2))
    grad[:, 0, 1] = 3.0 * y * y - 2.0 * y
    grad[:, 1, 0] = p
    grad[:, 1, 1] = (x - 2.0) * dp
    return grad


def _mp1_body_force(mat: Material) -> VectorField:
    mu, lam = mat.mu, mat.lam

    def f(points: np.ndarray) -> np.ndarray:
        x, y = points[:, 0], points[:, 1]
        _, dp, d2p = _mp1_profile(y)
        f1 = -(lam + mu) * dp - mu * (6.0 * y - 2.0)
        f2 = -(2.0 * mu + lam) * (x - 2.0) * d2p
        return np.column_stack([f1, f2])

    return f


def model_problem_1(overrides: Optional[Mapping[str, Any]] = None) -> ProblemSpec:
    """Contact with a rigid foundation, exact solution known."""
    overrides = _check_overrides(overrides, ("mu", "lam"), "Model Problem 1")
    mat = Material(mu=float(overrides.get("mu", 1.0)), lam=float(overrides.get("lam", 1.0)))

    def g(points: np.ndarray, normals: np.ndarray) -> np.ndarray:
        return traction(stress(strain(mp1_gradient(points)), mat), normals)

    boundary = unit_square_boundary(
        bottom=EdgeTag.CONTACT, right=EdgeTag.NEUMANN, top=EdgeTag.DIRICHLET, left=EdgeTag.NEUMANN,
        contact_normal=(0.0, -1.0),
    )
    return ProblemSpec(
        name="mp1",
        boundary=boundary,
        material=mat,
        gap=lambda points: np.zeros(len(points)),
        body_force=_mp1_body_force(mat),
        traction=g,
        dirichlet=mp1_displacement,
        exact_solution=mp1_displacement,
        exact_gradient=mp1_gradient,
        default_initial_n=1,
        constants={"mu": mat.mu, "lam": mat.lam},
    )


# ----------------------------------------------------------------------
# Model Problem 2
# ----------------------------------------------------------------------
def model_problem_2(overrides: Optional[Mapping[str, Any]] = None) -> ProblemSpec:
    """Contact with a rigid wedge, no exact solution."""
    overrides = _check_overrides(
        overrides,
        ("young_modulus", "poisson_ratio", "dirichlet_value", "gap_offset", "gap_center"),
        "Model Problem 2",
    )
    young = float(overrides.get("young_modulus", 500.0))
    poisson = float(overrides.get("poisson_ratio", 0.3))
    u_left = np.asarray(overrides.get("dirichlet_value", (-0.1, 0.0)), dtype=float)
    offset = float(overrides.get("gap_offset", -0.2))
    center = float(overrides.get("gap_center", 0.5))
    if u_left.shape != (2,):
        raise ConfigError("dirichlet_value must have two components")
    mat = Material.from_young_poisson(young, poisson)

    def gap(points: np.ndarray) -> np.ndarray:
        return offset + np.abs(center - points[:, 1])

    def u_D(points: np.ndarray) -> np.ndarray:
        return np.tile(u_left, (len(points), 1))

    boundary = unit_square_boundary(
        bottom=EdgeTag.NEUMANN, right=EdgeTag.CONTACT, top=EdgeTag.NEUMANN, left=EdgeTag.DIRICHLET,
        contact_normal=(1.0, 0.0),
    )
    return ProblemSpec(
        name="mp2",
        boundary=boundary,
        material=mat,
        gap=gap,
        body_force=None,
        traction=None,
        dirichlet=u_D,
        gap_breakpoints=((1.0, center),),
        default_initial_n=4,
        constants={
            "young_modulus": young, "poisson_ratio": poisson, "mu": mat.mu, "lam": mat.lam,
            "dirichlet_value": u_left.tolist(), "gap_offset": offset, "gap_center": center,
        },
    )


PROBLEMS = {1: model_problem_1, 2: model_problem_2}


def build_problem(problem_id: int, overrides: Optional[Mapping[str, Any]] = None) -> ProblemSpec:
    try:
        factory = PROBLEMS[int(problem_id)]
    except (KeyError, ValueError) as e:
        raise ConfigError(f"Unknown problem {problem_id!r}; choose 1 or 2") from e
    spec = factory(overrides)
    logger.debug(f"Problem {spec.name}: {spec.constants}")
    return spec
