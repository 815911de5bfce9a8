"""
H^{1/2} norm of piecewise polynomials on a single edge:

    ||v||^2 = ||v||_{L2(e)}^2 + int_e int_e (v(x) - v(y))^2 / |x - y|^2 dx dy.

Blocks of the double integral:
- same piece: the divided difference (p(x) - p(y)) / (x - y) is a polynomial,
  integrated exactly by tensor Gauss;
- different pieces: Duffy split about the closest corner, which removes the
  0/0 behaviour where the pieces touch.
"""
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from numpy.polynomial import Polynomial

_DUFFY_POINTS = 20


@dataclass(frozen=True)
class PiecewisePolynomial:
    """Polynomials in absolute arc length on [breakpoints[k], breakpoints[k+1]]."""

    breakpoints: np.ndarray
    pieces: Tuple[Polynomial, ...]

    def __post_init__(self):
        if len(self.pieces) != len(self.breakpoints) - 1:
            raise ValueError("Need one polynomial per breakpoint interval")
        if np.any(np.diff(self.breakpoints) <= 0):
            raise ValueError("Breakpoints must be strictly increasing")

    @property
    def length(self) -> float:
        return float(self.breakpoints[-1] - self.breakpoints[0])

    def intervals(self) -> List[Tuple[float, float, Polynomial]]:
        return [(float(a), float(b), p) for a, b, p in zip(self.breakpoints[:-1], self.breakpoints[1:], self.pieces)]

    def __call__(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        k = np.clip(np.searchsorted(self.breakpoints, s, side="right") - 1, 0, len(self.pieces) - 1)
        out = np.empty_like(s)
        for i, p in enumerate(self.pieces):
            mask = k == i
            out[mask] = p(s[mask])
        return out

    @classmethod
    def single(cls, length: float, poly: Polynomial) -> "PiecewisePolynomial":
        return cls(np.array([0.0, float(length)]), (poly,))


def _gauss01(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _divided_difference(coef: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """(p(x) - p(y)) / (x - y) for p = sum_k coef[k] s^k, without cancellation."""
    out = np.zeros(np.broadcast(x, y).shape)
    for k in range(1, len(coef)):
        for m in range(k):
            out += coef[k] * x ** m * y ** (k - 1 - m)
    return out


def _same_piece(a: float, b: float, p: Polynomial) -> float:
    coef = p.convert().coef
    n = max(len(coef), 2)
    s, w = _gauss01(n)
    x = a + (b - a) * s
    X, Y = np.meshgrid(x, x, indexing="ij")
    W = np.outer(w, w) * (b - a) ** 2
    return float(np.sum(W * _divided_difference(coef, X, Y) ** 2))


def _cross_pieces(left: Tuple[float, float, Polynomial], right: Tuple[float, float, Polynomial]) -> float:
    """int_{I_left} int_{I_right} (p(x) - q(y))^2 / (y - x)^2 with I_left before I_right."""
    a_i, b_i, p = left
    a_j, b_j, q = right
    S, T, d = b_i - a_i, b_j - a_j, a_j - b_i
    r, wr = _gauss01(_DUFFY_POINTS)
    u, wu = _gauss01(_DUFFY_POINTS)
    R, U = np.meshgrid(r, u, indexing="ij")
    W = np.outer(wr, wu) * S * T * R

    total = 0.0
    # s = b_i - x, t = y - a_j; the two triangles of [0,S]x[0,T] cut by its diagonal
    for s, t in ((S * R, T * R * U), (S * R * U, T * R)):
        x, y = b_i - s, a_j + t
        total += float(np.sum(W * ((p(x) - q(y)) / (s + t + d)) ** 2))
    return total


def h_half_norm_edge(v: PiecewisePolynomial, squared: bool = False) -> float:
    """||v||_{H^{1/2}(e)} (or its square) with the Slobodeckij seminorm."""
    pieces = v.intervals()
    l2 = 0.0
    for a, b, p in pieces:
        antiderivative = (p * p).integ()
        l2 += float(antiderivative(b) - antiderivative(a))

    semi = sum(_same_piece(a, b, p) for a, b, p in pieces)
    for i in range(len(pieces)):
        for j in range(i + 1, len(pieces)):
            semi += 2.0 * _cross_pieces(pieces[i], pieces[j])

    value = max(l2 + semi, 0.0)
    return value if squared else float(np.sqrt(value))


def split_at_roots(v: PiecewisePolynomial) -> PiecewisePolynomial:
    """Refine the breakpoints by the real roots of each piece, so every piece has one sign."""
    knots: List[float] = []
    polys: List[Polynomial] = []
    for a, b, p in v.intervals():
        cuts = [a]
        q = p.convert()
        q = q.trim(tol=1e-14 * np.abs(q.coef).max(initial=0.0))
        roots = q.roots() if q.degree() > 0 else np.array([])
        tol = 1e-12 * max(1.0, b - a)
        for root in sorted(np.real(roots[np.abs(np.imag(roots)) <= 1e-12])):
            if a + tol < root < b - tol and root > cuts[-1] + tol:
                cuts.append(float(root))
        cuts.append(b)
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            knots.append(lo)
            polys.append(p)
    knots.append(float(v.breakpoints[-1]))
    return PiecewisePolynomial(np.array(knots), tuple(polys))


def signed_part(v: PiecewisePolynomial, positive: bool) -> PiecewisePolynomial:
    """max(v, 0) or min(v, 0) for v with one sign per piece (see split_at_roots)."""
    zero = Polynomial([0.0])
    parts = []
    for a, b, p in v.intervals():
        mid = p(0.5 * (a + b))
        keep = mid > 0 if positive else mid < 0
        parts.append(p if keep else zero)
    return PiecewisePolynomial(v.breakpoints.copy(), tuple(parts))


def integrate(v: PiecewisePolynomial) -> float:
    total = 0.0
    for a, b, p in v.intervals():
        antiderivative = p.integ()
        total += float(antiderivative(b) - antiderivative(a))
    return total


def piecewise_from_samples(breakpoints: Sequence[float], func) -> PiecewisePolynomial:
    """Quadratic interpolant of func on each interval (exact when func is quadratic there)."""
    polys = []
    for a, b in zip(breakpoints[:-1], breakpoints[1:]):
        s = np.array([a, 0.5 * (a + b), b])
        polys.append(Polynomial(np.polynomial.polynomial.polyfit(s, func(s), 2)))
    return PiecewisePolynomial(np.asarray(breakpoints, dtype=float), tuple(polys))
