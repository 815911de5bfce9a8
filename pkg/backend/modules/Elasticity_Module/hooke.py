"""Isotropic linear elasticity (plane strain reading of the 2D Lame law)."""
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from utils.errors import ProblemDefinitionError


@dataclass(frozen=True)
class Material:
    mu: float
    lam: float

    def __post_init__(self):
        if not (self.mu > 0 and self.lam > 0):
            raise ProblemDefinitionError(f"Lame parameters must be positive, got mu={self.mu}, lambda={self.lam}")

    @classmethod
    def from_young_poisson(cls, young: float, poisson: float) -> "Material":
        if young <= 0 or not 0.0 < poisson < 0.5:
            raise ProblemDefinitionError(f"Need E > 0 and 0 < nu < 1/2, got E={young}, nu={poisson}")
        mu = young / (2.0 * (1.0 + poisson))
        lam = young * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson))
        return cls(mu=mu, lam=lam)

    @property
    def poisson_ratio(self) -> float:
        return self.lam / (2.0 * (self.lam + self.mu))

    @property
    def stress_bound(self) -> float:
        """Constant C with |sigma(eps)| <= C |eps| (Frobenius)."""
        return 2.0 * self.mu + 2.0 * self.lam


def strain(grad_u: np.ndarray) -> np.ndarray:
    """Symmetric part of (..., 2, 2) gradients."""
    g = np.asarray(grad_u, dtype=float)
    return 0.5 * (g + np.swapaxes(g, -1, -2))


def stress(eps: np.ndarray, mat: Material) -> np.ndarray:
    """sigma = 2 mu eps + lambda tr(eps) I, vectorized over leading axes."""
    eps = np.asarray(eps, dtype=float)
    trace = eps[..., 0, 0] + eps[..., 1, 1]
    sigma = 2.0 * mat.mu * eps
    sigma[..., 0, 0] += mat.lam * trace
    sigma[..., 1, 1] += mat.lam * trace
    return sigma


def traction(sigma: np.ndarray, normal: np.ndarray) -> np.ndarray:
    """sigma n for (..., 2, 2) tensors and (..., 2) normals."""
    return np.einsum("...ij,...j->...i", sigma, normal)


def normal_tangential_split(t: np.ndarray, n: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(t n) . n and t n - ((t n) . n) n."""
    tn = traction(t, n)
    sigma_n = np.einsum("...i,...i->...", tn, n)
    sigma_tau = tn - sigma_n[..., None] * n
    return sigma_n, sigma_tau


def stress_divergence(hessians: np.ndarray, mat: Material) -> np.ndarray:
    """
    div sigma(u) from component Hessians H[..., c, j, k] = d_j d_k u_c:
    mu * Laplace(u) + (mu + lambda) grad(div u).
    """
    laplace = hessians[..., 0, 0] + hessians[..., 1, 1]            # (..., 2)
    grad_div = hessians[..., 0, :, 0] + hessians[..., 1, :, 1]      # d_c(d_0 u_0 + d_1 u_1)
    return mat.mu * laplace + (mat.mu + mat.lam) * grad_div
