"""
Doerfler marking with minimal cardinality.
"""

import numpy as np

from ailfem.estimator.indicators import IndicatorField
from ailfem.mesh.marks import MarkSet


def doerfler(field: IndicatorField, theta: float) -> MarkSet:
    """Smallest set ``M`` with ``theta^2 * sum_T eta_T^2 <= sum_{T in M} eta_T^2``.

    Elements are taken by decreasing indicator, equal indicators by increasing
    element index.
    """
    if not 0.0 < theta <= 1.0:
        raise ValueError(f"theta must lie in (0, 1], got {theta}")
    values = field.values
    if not len(values):
        return MarkSet.empty(0)

    order = np.lexsort((np.arange(len(values)), -values))
    cumulative = np.cumsum(values[order])
    goal = theta * theta * cumulative[-1]
    if goal <= 0.0:
        return MarkSet.empty(len(values))
    count = int(np.searchsorted(cumulative, goal, side="left")) + 1
    count = min(count, len(values))
    return MarkSet.from_indices(order[:count], len(values))
