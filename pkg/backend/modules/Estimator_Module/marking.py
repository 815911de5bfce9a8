"""Dorfler (bulk) marking."""
import logging

import numpy as np

logger = logging.getLogger(__name__)


def doerfler_mark(indicators: np.ndarray, theta: float) -> np.ndarray:
    """
    Smallest set of triangles whose squared indicators sum to at least
    theta * total, chosen greedily by descending value (ties by index).

    Returns the marked triangle indices in increasing order.
    """
    if not 0.0 < theta <= 1.0:
        raise ValueError(f"theta must lie in (0, 1], got {theta}")
    values = np.asarray(indicators, dtype=float)
    if values.size == 0:
        return np.zeros(0, dtype=np.int64)
    if (values < 0).any():
        raise ValueError("Indicators must be nonnegative")

    order = np.argsort(-values, kind="stable")
    cumulative = np.cumsum(values[order])
    total = cumulative[-1]
    if total <= 0:
        return np.zeros(0, dtype=np.int64)

    count = int(np.searchsorted(cumulative, theta * total, side="left")) + 1
    count = min(count, len(values))
    marked = np.sort(order[:count])
    logger.debug(f"Dorfler marking: {count}/{len(values)} triangles carry theta={theta}")
    return marked
