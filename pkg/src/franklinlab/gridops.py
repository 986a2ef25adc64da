"""Vectorized numpy views of torus functions on uniform dyadic grids.

The exact objects live in :mod:`franklinlab.pwl`; experiments that sweep
thousands of sample points use these helpers.  Breakpoints are dyadic with
moderate denominators, so the float conversions below are themselves exact.
"""

from __future__ import annotations

import numpy as np

from .pwl import PiecewiseLinear, StepFunction, TorusFunction


def breakpoint_arrays(f: TorusFunction) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(xp, left values, right values) per piece, xp of length m+1 ending at 1.0."""
    a, b, va, vb = zip(*f.pieces())
    xp = np.array([float(x) for x in a] + [1.0])
    return xp, np.asarray(va, dtype=float), np.asarray(vb, dtype=float)


def grid_values(f: TorusFunction, x: np.ndarray) -> np.ndarray:
    """Right-continuous evaluation of f at torus points x (any shape)."""
    x = np.mod(np.asarray(x, dtype=float), 1.0)
    xp, va, vb = breakpoint_arrays(f)
    idx = np.clip(np.searchsorted(xp, x, side="right") - 1, 0, len(va) - 1)
    if isinstance(f, StepFunction):
        return va[idx]
    a = xp[idx]
    w = xp[idx + 1] - a
    t = np.where(w > 0, (x - a) / np.where(w > 0, w, 1.0), 0.0)
    return va[idx] + t * (vb[idx] - va[idx])


def prefix_values(f: TorusFunction, x: np.ndarray) -> np.ndarray:
    """P(x) = int_0^x f at torus points x in [0, 1]."""
    x = np.asarray(x, dtype=float)
    xp, va, vb = breakpoint_arrays(f)
    ell = np.diff(xp)
    cum = np.concatenate(([0.0], np.cumsum(ell * 0.5 * (va + vb))))
    idx = np.clip(np.searchsorted(xp, x, side="right") - 1, 0, len(va) - 1)
    t = x - xp[idx]
    slope = np.where(ell[idx] > 0, (vb[idx] - va[idx]) / np.where(ell[idx] > 0, ell[idx], 1.0), 0.0)
    return cum[idx] + va[idx] * t + 0.5 * slope * t * t


def total_integral(f: TorusFunction) -> float:
    xp, va, vb = breakpoint_arrays(f)
    return float(np.sum(np.diff(xp) * 0.5 * (va + vb)))


def cell_averages(f: TorusFunction, level: int, shift: float = 0.0) -> np.ndarray:
    """Averages of f over the 2^level cells [shift + i 2^-level, shift + (i+1) 2^-level)."""
    n = 1 << level
    edges = shift + np.arange(n + 1) / n
    wrap = edges >= 1.0
    p = prefix_values(f, np.mod(edges, 1.0))
    p = p + wrap * total_integral(f)
    return (p[1:] - p[:-1]) * n


def midpoint_values(f: TorusFunction, level: int) -> np.ndarray:
    n = 1 << level
    return grid_values(f, (np.arange(n) + 0.5) / n)


def cell_values_step(f: StepFunction, level: int) -> np.ndarray:
    """Exact per-cell values of a step function resolved on the 2^-level grid."""
    n = 1 << level
    return grid_values(f, np.arange(n) / n)


def grid_l2(values: np.ndarray) -> float:
    """L2 norm of a function that is constant on equal-width cells."""
    return float(np.sqrt(np.mean(np.square(values))))


def grid_lp(values: np.ndarray, p: float) -> float:
    return float(np.mean(np.abs(values) ** p) ** (1.0 / p))
