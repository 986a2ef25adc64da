"""Shifted-Haar analysis: conditional expectations over xi-shifted dyadic
intervals, martingale increments, the square function, and the maximal
operators (Hardy-Littlewood M, shifted dyadic M^d_xi, four-point M_n).

Partial sums are defined directly through interval averages, which for the
Haar system coincides with the Fourier partial sums at dyadic orders.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .dyadic import Rational, locate_dyadic, mod1
from .gridops import cell_averages, grid_values, prefix_values
from .pwl import StepFunction, TorusFunction, abs_function, combine, prefix_integral


def resolution_level(f: TorusFunction) -> int:
    """Smallest N with all breakpoints on the 2^-N grid (error if none exists)."""
    level = 0
    for b in f.breakpoints:
        d = b.denominator
        e = d.bit_length() - 1
        if d != (1 << e):
            raise ValueError(f"non-dyadic breakpoint {b}")
        level = max(level, e)
    return level


def shift_level(xi: Rational) -> int:
    s = mod1(xi)
    d = s.denominator
    e = d.bit_length() - 1
    if d != (1 << e):
        raise ValueError(f"shift must be dyadic, got {xi}")
    return e


# -- conditional expectations --------------------------------------------------

def haar_partial_sum(f: TorusFunction, n: int, xi: Rational = 0) -> StepFunction:
    """H_{n,xi}(f): the average of f over each xi-shifted interval of length 2^-n."""
    if n < 0:
        raise ValueError("level must be nonnegative")
    s = mod1(xi)
    shift_level(s)  # validates dyadicity
    m = 1 << n
    bounds = sorted(mod1(s + Fraction(i, m)) for i in range(m))
    pref = prefix_integral(f, bounds)
    vals = []
    for i in range(len(bounds)):
        if i + 1 < len(bounds):
            vals.append((pref[i + 1] - pref[i]) * m)
        else:
            vals.append((_full_integral(f) - pref[i] + pref[0]) * m)
    if bounds[0] != 0:
        bounds = [Fraction(0)] + bounds
        vals = [vals[-1]] + vals
    return StepFunction(bounds, vals)


def _full_integral(f: TorusFunction) -> float:
    return math.fsum(float(b - a) * 0.5 * (va + vb) for a, b, va, vb in f.pieces())


def haar_increment(f: TorusFunction, n: int, xi: Rational = 0) -> StepFunction:
    """Delta H_{n,xi}(f) = H_{n,xi}(f) - H_{n-1,xi}(f); at n = 0 it is H_{0,xi}(f)."""
    if n == 0:
        return haar_partial_sum(f, 0, xi)
    return combine(1.0, haar_partial_sum(f, n, xi), -1.0, haar_partial_sum(f, n - 1, xi))


def default_max_level(f: TorusFunction, xi: Rational, extra: int = 1) -> int:
    """Finite-expansion cutoff: exact for step inputs, a documented truncation
    (geometric tail) for piecewise-linear ones."""
    base = max(resolution_level(f), shift_level(xi), 1)
    if isinstance(f, StepFunction):
        return base
    return base + extra


def level_average_table(f: TorusFunction, xi: Rational, max_level: int) -> np.ndarray:
    """Array [n, cell] of H_{n,xi}(f) on the uniform 2^-max_level work grid.

    Requires max_level >= shift_level(xi), so every shifted boundary is a work
    grid point and each H_{n,xi}(f) is constant per work cell.
    """
    L = max_level
    if L < shift_level(xi):
        raise ValueError("work grid must resolve the shift")
    ncell = 1 << L
    xif = float(mod1(xi))
    mid = (np.arange(ncell) + 0.5) / ncell
    out = np.empty((L + 1, ncell))
    for n in range(L + 1):
        avg = cell_averages(f, n, xif)  # averages over [xi + i 2^-n, ...)
        idx = np.floor(np.mod(mid - xif, 1.0) * (1 << n)).astype(np.int64)
        out[n] = avg[np.clip(idx, 0, (1 << n) - 1)]
    return out


def _uniform_step(values: np.ndarray) -> StepFunction:
    L = len(values)
    bps = [Fraction(i, L) for i in range(L)]
    return StepFunction(bps, [float(v) for v in values])


def square_function(f: TorusFunction, xi: Rational = 0,
                    max_level: int | None = None) -> StepFunction:
    """S_xi(f) = (sum_{n>=1} |Delta H_{n,xi}(f)|^2)^{1/2}.

    Exact for step inputs resolved at max_level; truncated at max_level for
    piecewise-linear inputs (the dropped tail decays geometrically).
    """
    L = default_max_level(f, xi) if max_level is None else max_level
    table = level_average_table(f, xi, L)
    inc = np.diff(table, axis=0)
    return _uniform_step(np.sqrt(np.sum(inc * inc, axis=0)))


def dyadic_maximal(f: TorusFunction, xi: Rational = 0,
                   max_level: int | None = None) -> StepFunction:
    """M^d_xi(f) = sup_{n>=1} average of |f| over I_{n,xi}(x); exact for step f."""
    g = abs_function(f)
    L = default_max_level(g, xi) if max_level is None else max_level
    table = level_average_table(g, xi, L)
    return _uniform_step(np.max(table[1:], axis=0))


# -- Hardy-Littlewood maximal function ------------------------------------------

@dataclass
class MaximalEstimate:
    """Sampled envelope of M(f): certified lower and upper bounds per point."""

    points: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def at(self, x: float) -> tuple[float, float]:
        i = int(np.argmin(np.abs(self.points - (x % 1.0))))
        return float(self.lower[i]), float(self.upper[i])


def _candidate_grid(g: TorusFunction, grid_exp: int | None,
                    extra: np.ndarray | None) -> np.ndarray:
    pts = {0.0} | {float(b) for b in g.breakpoints}
    if grid_exp is not None:
        pts |= set(np.arange(1 << grid_exp) / (1 << grid_exp))
    if extra is not None:
        pts |= {float(x) % 1.0 for x in np.atleast_1d(extra)}
    return np.array(sorted(pts))


def maximal_function(f: TorusFunction, grid_exp: int | None = 8,
                     points: np.ndarray | None = None) -> MaximalEstimate:
    """M(f)(x) = sup over torus arcs containing x of the average of |f|.

    Evaluated at every candidate point (breakpoints of |f|, the uniform
    2^-grid_exp grid, and any extra `points`).  The lower envelope is the
    exact maximum over arcs with candidate endpoints; the upper bound ranges
    arc endpoints over whole candidate cells by interval arithmetic, so the
    true M(f) lies between the two everywhere on the sample set.
    """
    g = abs_function(f)
    c = _candidate_grid(g, grid_exp, points)
    N = len(c)
    ce = np.concatenate([c, [1.0]])
    P = prefix_values(g, ce)
    T = P[-1]
    gv_right = grid_values(g, c)            # value at c_i (right-continuous)
    # per-cell sup of g (linear or constant per candidate cell when the
    # breakpoints are all candidates, so the endpoint values suffice)
    gv_leftlim = np.concatenate([grid_values(g, ce[1:-1] - 1e-15), [g.left_limit(0)]])
    cell_sup = np.maximum(gv_right, gv_leftlim)

    with np.errstate(divide="ignore", invalid="ignore"):
        lower = _sweep_lower(ce, P, T, gv_right)
        upper = _sweep_upper(ce, P, T, cell_sup)
    upper = np.maximum(upper, lower)
    return MaximalEstimate(c, lower, upper)


def _sweep_lower(ce: np.ndarray, P: np.ndarray, T: float, gv: np.ndarray) -> np.ndarray:
    """Exact max of arc averages over candidate-endpoint arcs, for every candidate."""
    N = len(ce) - 1
    neg = -np.inf
    # plain arcs [c_a, c_b], 0 <= a < b <= N, containing c_i iff a <= i <= b
    diff = ce[None, :] - ce[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        A = np.where(diff > 0, (P[None, :] - P[:, None]) / diff, neg)
    acc = np.maximum.accumulate(A, axis=0)      # acc[i, b] = max_{a <= i} A[a, b]
    acc = acc[:N, :]
    mask = np.arange(N + 1)[None, :] >= np.arange(N)[:, None]
    m1 = np.max(np.where(mask, acc, neg), axis=1)
    # wrapped arcs [u, 1) u [0, v], v < u: containing x iff x >= u or x <= v
    du = 1.0 - ce[:N, None] + ce[None, :N]
    wrapA = np.where(ce[None, :N] < ce[:N, None], (T - P[:N, None] + P[None, :N]) / du, neg)
    W = np.max(wrapA, axis=1)                   # best over v < u, per u
    V = np.max(wrapA, axis=0)                   # best over u > v, per v
    m2a = np.maximum.accumulate(W)              # x >= u : prefix in u
    m2b = np.maximum.accumulate(V[::-1])[::-1]  # x <= v : suffix in v
    return np.maximum.reduce([m1, m2a, m2b, np.full(N, T), gv])


def _sweep_upper(ce: np.ndarray, P: np.ndarray, T: float, cell_sup: np.ndarray) -> np.ndarray:
    """Certified upper bound: arc endpoints range over whole candidate cells."""
    N = len(ce) - 1
    neg = -np.inf
    idx = np.arange(N)
    # u in cell a = [c_a, c_{a+1}], v in cell b: avg <= (P[b+1]-P[a])/(c[b]-c[a+1])
    den = ce[None, :-1] - ce[1:, None]          # c[b] - c[a+1], shape (N, N)
    num = P[None, 1:] - P[:-1, None]            # P[b+1] - P[a]
    A = np.where(den > 0, num / den, neg)
    acc = np.maximum.accumulate(A, axis=0)      # over u-cells a <= ...
    # x = c_i: u-cells a <= i-1 or u = x; v-cells b >= i-1 (v can sit in cell i-1 if v = x)
    accx = np.vstack([np.full(N, neg), acc[:-1]])   # max over a <= i-1
    mask = idx[None, :] >= (idx[:, None] - 1)
    u1 = np.max(np.where(mask, accx, neg), axis=1)
    # short arcs with endpoint cells overlapping/adjacent: avg <= local sup of g
    loc = np.maximum.reduce([np.roll(cell_sup, s) for s in (-1, 0, 1, 2)])
    # wrapped arcs: u in cell a (u >= c_a), v in cell b (v <= c_{b+1}), v < u
    dw = 1.0 - ce[:N, None] + ce[None, 1:]      # 1 - c[a] + c[b+1]
    numw = T - P[:N, None] + P[None, 1:]
    denw = 1.0 - ce[1:, None] + ce[None, :N]    # 1 - c[a+1] + c[b]
    Wm = np.where(denw > 0, numw / denw, neg)
    Wu = np.max(Wm, axis=1)
    Vu = np.max(Wm, axis=0)
    u2a = np.maximum.accumulate(Wu)
    u2b = np.maximum.accumulate(Vu[::-1])[::-1]
    return np.maximum.reduce([u1, u2a, u2b, np.full(N, T), loc])


def maximal_at(f: TorusFunction, x: Rational, grid_exp: int | None = 8) -> tuple[float, float]:
    """(lower, upper) bounds of M(f) at a single point."""
    est = maximal_function(f, grid_exp=grid_exp, points=np.array([float(x) % 1.0]))
    return est.at(float(x) % 1.0)


def four_point_maximal(f: TorusFunction, x: Rational, n: int, xi: Rational = 0,
                       grid_exp: int | None = 8,
                       precomputed: "MaximalEstimate | None" = None) -> float:
    """M_n f(x, xi): sum of M(f) at the endpoints of I_{n,xi}(x) and their negatives.

    Uses the certified lower envelope of M, which is the conservative side for
    the dominating term of every inequality this enters.
    """
    iv = locate_dyadic(x, n, xi)
    a, b = iv.left, iv.right
    pts = [float(a), float(mod1(-a)), float(b), float(mod1(-b))]
    if precomputed is None:
        precomputed = maximal_function(f, grid_exp=grid_exp, points=np.array(pts))
    return float(sum(precomputed.at(p)[0] for p in pts))
