"""Integration along straight segments with optional kinks of the integrand."""
from typing import Callable, Iterable, List, Optional

import numpy as np

from modules.Space_Module.quadrature import QuadratureRule, edge_quadrature

_SPLIT_TOL = 1e-12


def segment_breakpoints(p0: np.ndarray, p1: np.ndarray, points: Iterable) -> List[float]:
    """Parameters t in (0, 1) of the given points lying on the segment p0-p1."""
    d = p1 - p0
    length_sq = float(d @ d)
    params = []
    for b in points:
        b = np.asarray(b, dtype=float)
        t = float((b - p0) @ d) / length_sq
        offset = np.linalg.norm(p0 + t * d - b)
        if _SPLIT_TOL < t < 1.0 - _SPLIT_TOL and offset <= _SPLIT_TOL * max(1.0, np.sqrt(length_sq)):
            params.append(t)
    return sorted(params)


def integrate_on_segment(
    func: Callable[[np.ndarray], np.ndarray],
    p0: np.ndarray,
    p1: np.ndarray,
    breakpoints: Iterable = (),
    rule: Optional[QuadratureRule] = None,
) -> float:
    """Arc-length integral of a scalar func(points (n, 2)) over p0-p1, split at breakpoints."""
    rule = rule or edge_quadrature()
    p0, p1 = np.asarray(p0, dtype=float), np.asarray(p1, dtype=float)
    knots = [0.0] + segment_breakpoints(p0, p1, breakpoints) + [1.0]
    length = np.linalg.norm(p1 - p0)
    total = 0.0
    for a, b in zip(knots[:-1], knots[1:]):
        t = a + (b - a) * rule.points
        pts = p0[None, :] + t[:, None] * (p1 - p0)[None, :]
        total += (b - a) * length * float(rule.weights @ np.asarray(func(pts), dtype=float))
    return total
