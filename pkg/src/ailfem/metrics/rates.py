"""Empirical convergence rates from run histories."""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from ailfem.history import RunHistory, contraction_factor

logger = logging.getLogger(__name__)

OPTIMAL_BAND = (-0.6, -0.4)


@dataclass(frozen=True)
class WindowSlope:
    start: float  # smallest abscissa in the window
    stop: float
    slope: float


def loglog_slope(x: Sequence[float] | np.ndarray, y: Sequence[float] | np.ndarray) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {y.shape}")
    keep = (x > 0.0) & (y > 0.0) & np.isfinite(x) & np.isfinite(y)
    if np.count_nonzero(keep) < 2 or np.ptp(x[keep]) == 0.0:
        raise ValueError("need at least two distinct positive points for a slope")
    slope, _ = np.polyfit(np.log(x[keep]), np.log(y[keep]), 1)
    return float(slope)


def tail_slope(x, y, decades: float = 1.0) -> float:
    """Slope over the points within ``decades`` of the largest abscissa."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if not len(x):
        raise ValueError("empty series")
    keep = x >= np.max(x) / 10.0**decades
    return loglog_slope(x[keep], y[keep])


def window_slope(x, y, upper: float, lower: float = 0.0) -> float:
    """Slope over the points with ``lower <= x < upper``."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    keep = (x >= lower) & (x < upper)
    return loglog_slope(x[keep], y[keep])


def windowed_slopes(x, y, width: float = 0.5, min_points: int = 3) -> list[WindowSlope]:
    """Slopes over sliding windows of ``width`` decades, one per starting point."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    slopes = []
    for start in x:
        stop = start * 10.0**width
        keep = (x >= start) & (x <= stop)
        if np.count_nonzero(keep) < min_points or stop > np.max(x):
            continue
        try:
            slopes.append(WindowSlope(float(start), float(stop), loglog_slope(x[keep], y[keep])))
        except ValueError:
            continue
    return slopes


def crossover(
    x, y, band: tuple[float, float] = OPTIMAL_BAND, width: float = 0.5
) -> float | None:
    """Smallest abscissa from which every later window slope lies in ``band``."""
    windows = windowed_slopes(x, y, width)
    if not windows:
        return None
    low, high = band
    found = None
    for window in reversed(windows):
        if not low <= window.slope <= high:
            break
        found = window.start
    return found


# ----------------------------------------------------------------------
# Series extracted from histories
# ----------------------------------------------------------------------


def mesh_series(history: RunHistory, column: str) -> np.ndarray:
    """``column`` of the final row of every mesh."""
    return np.array([getattr(row, column) for row in history.final_rows()], dtype=np.float64)


def contraction_series(
    history: RunHistory, reference_energy: float
) -> tuple[np.ndarray, np.ndarray]:
    """Elements and contraction factors of every mesh the reference energy admits."""
    elems, factors = [], []
    for N in history.meshes():
        try:
            factor = contraction_factor(history, N, reference_energy)
        except ValueError:
            logger.debug("mesh %d: reference energy not below its energies", N)
            continue
        elems.append(history.rows_for(N)[-1].elems)
        factors.append(factor)
    return np.asarray(elems, dtype=np.float64), np.asarray(factors, dtype=np.float64)


def effectivity_range(history: RunHistory) -> tuple[float, float]:
    """Smallest and largest ``error / eta`` over all rows with positive estimator."""
    ratios = [row.error / row.eta for row in history if row.eta > 0.0]
    if not ratios:
        return math.nan, math.nan
    return min(ratios), max(ratios)


def ordering_share(*counts: dict[int, int]) -> float:
    """Share of common meshes whose inner-step counts are non-increasing in argument order."""
    common = set.intersection(*(set(c) for c in counts)) if counts else set()
    if not common:
        return math.nan
    ordered = sum(
        all(counts[i][N] >= counts[i + 1][N] for i in range(len(counts) - 1))
        for N in common
    )
    return ordered / len(common)


def inner_step_counts(history: RunHistory) -> dict[int, int]:
    return {row.N: row.n for row in history.final_rows()}
