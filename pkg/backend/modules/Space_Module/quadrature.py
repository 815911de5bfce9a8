"""Quadrature rules on the reference triangle and the unit interval."""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@dataclass(frozen=True)
class QuadratureRule:
    """
    points: barycentric coordinates (nq, 3) on triangles, parameters in
    [0, 1] (nq,) on edges. weights sum to the reference measure
    (1/2 on the triangle, 1 on the interval).
    """

    points: np.ndarray
    weights: np.ndarray
    degree: int

    @property
    def n_points(self) -> int:
        return len(self.weights)

    def reference_xy(self) -> np.ndarray:
        """Cartesian reference coordinates of triangle points."""
        return self.points[:, 1:]


def _seven_point_rule() -> QuadratureRule:
    """Degree-5 symmetric rule on the reference triangle."""
    s15 = np.sqrt(15.0)
    a1, b1 = (6.0 - s15) / 21.0, (9.0 + 2.0 * s15) / 21.0
    a2, b2 = (6.0 + s15) / 21.0, (9.0 - 2.0 * s15) / 21.0
    w1, w2 = (155.0 - s15) / 1200.0, (155.0 + s15) / 1200.0
    bary = [(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)]
    weights = [9.0 / 40.0]
    for (a, b), w in (((a1, b1), w1), ((a2, b2), w2)):
        bary += [(b, a, a), (a, b, a), (a, a, b)]
        weights += [w, w, w]
    return QuadratureRule(np.array(bary), 0.5 * np.array(weights), 5)


def _collapsed_gauss_rule(degree: int) -> QuadratureRule:
    """Gauss-Legendre tensor rule mapped onto the triangle by the Duffy collapse."""
    n = int(np.ceil((degree + 2) / 2.0))
    x, w = np.polynomial.legendre.leggauss(n)
    s, ws = 0.5 * (x + 1.0), 0.5 * w
    u, v = np.meshgrid(s, s, indexing="ij")
    wu, wv = np.meshgrid(ws, ws, indexing="ij")
    # (u, v) in [0,1]^2 -> (x, y) = (u, v (1 - u)), Jacobian (1 - u)
    xr = u.ravel()
    yr = (v * (1.0 - u)).ravel()
    weights = (wu * wv * (1.0 - u)).ravel()
    bary = np.column_stack([1.0 - xr - yr, xr, yr])
    return QuadratureRule(bary, weights, degree)


@lru_cache(maxsize=None)
def triangle_quadrature(degree: int) -> QuadratureRule:
    """Rule exact for total degree >= degree; never below 5."""
    if degree < 1:
        raise ValueError(f"degree must be >= 1, got {degree}")
    if degree <= 5:
        return _seven_point_rule()
    return _collapsed_gauss_rule(degree)


@lru_cache(maxsize=None)
def edge_quadrature(n_points: int = 5) -> QuadratureRule:
    """Gauss-Legendre on [0, 1], exact to degree 2*n_points - 1."""
    if n_points < 1:
        raise ValueError(f"n_points must be >= 1, got {n_points}")
    x, w = np.polynomial.legendre.leggauss(n_points)
    return QuadratureRule(0.5 * (x + 1.0), 0.5 * w, 2 * n_points - 1)


def edge_quadrature_for_degree(degree: int) -> QuadratureRule:
    return edge_quadrature(max(5, int(np.ceil((degree + 1) / 2.0))))
