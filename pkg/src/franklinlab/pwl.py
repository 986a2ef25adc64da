"""Exact algebra for piecewise-linear and step functions on the torus.

Breakpoints are exact rationals; values are doubles.  Integration of products
of two pieces uses the closed-form quadratic formula, so orthonormality
defects measure floating-point error in the values, not quadrature bias.

A function may have at most one discontinuity, located at 0: the value f(0-)
(the limit approaching 1) is carried separately when it differs from f(0).
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .dyadic import Rational, mod1, to_fraction

ONE = Fraction(1)
ZERO = Fraction(0)


def _canonical(breakpoints, values, wrap_value):
    """Sort, reduce mod 1, and ensure 0 is a breakpoint.

    wrap_value is the value approached from the left at 1 (i.e. f(0-)); None
    means "continuous at 0" and is resolved after canonicalization.
    """
    pairs = sorted((mod1(b), float(v)) for b, v in zip(breakpoints, values))
    bps = [p[0] for p in pairs]
    if len(set(bps)) != len(bps):
        raise ValueError("duplicate breakpoints")
    if not bps or bps[0] != 0:
        raise ValueError("breakpoint at 0 is required (insert one explicitly)")
    return tuple(bps), tuple(p[1] for p in pairs), wrap_value


@dataclass(frozen=True)
class PiecewiseLinear:
    """Linear between consecutive breakpoints, wrapping from the last one to 0-."""

    breakpoints: tuple[Fraction, ...]
    values: tuple[float, ...]
    left_limit_at_zero: float | None = None  # f(0-); None iff continuous at 0

    def __init__(self, breakpoints, values, left_limit_at_zero=None):
        bps, vals, wrap = _canonical(breakpoints, values, left_limit_at_zero)
        if wrap is not None:
            wrap = float(wrap)
            if wrap == vals[0]:
                wrap = None
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "left_limit_at_zero", wrap)

    # -- structure ---------------------------------------------------------

    @property
    def is_continuous(self) -> bool:
        return self.left_limit_at_zero is None

    @property
    def wrap_value(self) -> float:
        """The value approached at 1-, i.e. f(0-)."""
        return self.values[0] if self.left_limit_at_zero is None else self.left_limit_at_zero

    def pieces(self):
        """Yield (a, b, va, vb): linear from va at a to vb at b, over [a, b)."""
        bps, vals = self.breakpoints, self.values
        for i in range(len(bps) - 1):
            yield bps[i], bps[i + 1], vals[i], vals[i + 1]
        yield bps[-1], ONE, vals[-1], self.wrap_value

    # -- evaluation ---------------------------------------------------------

    def __call__(self, x: Rational) -> float:
        xf = mod1(x)
        i = bisect_right(self.breakpoints, xf) - 1
        a = self.breakpoints[i]
        b = self.breakpoints[i + 1] if i + 1 < len(self.breakpoints) else ONE
        va = self.values[i]
        vb = self.values[i + 1] if i + 1 < len(self.values) else self.wrap_value
        if xf == a:
            return va
        t = float((xf - a) / (b - a))
        return va + t * (vb - va)

    def left_limit(self, x: Rational) -> float:
        """lim_{y -> x-} f(y) on the torus."""
        xf = mod1(x)
        if xf == 0:
            return self.wrap_value
        return self.__call__(xf) if xf not in set(self.breakpoints) else self._left_at_bp(xf)

    def _left_at_bp(self, xf: Fraction) -> float:
        # interior breakpoints are continuity points, so the left limit is the value
        i = self.breakpoints.index(xf)
        return self.values[i]

    # -- serialization ------------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "type": "pwl",
            "breakpoints": [[b.numerator, b.denominator] for b in self.breakpoints],
            "values": list(self.values),
            "left_limit_at_zero": self.left_limit_at_zero,
        }


@dataclass(frozen=True)
class StepFunction:
    """Right-continuous, constant on [b_i, b_{i+1}) pieces."""

    breakpoints: tuple[Fraction, ...]
    values: tuple[float, ...]

    def __init__(self, breakpoints, values):
        bps, vals, _ = _canonical(breakpoints, values, None)
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "values", vals)

    @property
    def is_continuous(self) -> bool:
        return all(v == self.values[0] for v in self.values)

    @property
    def wrap_value(self) -> float:
        return self.values[-1]

    def pieces(self):
        bps, vals = self.breakpoints, self.values
        for i in range(len(bps) - 1):
            yield bps[i], bps[i + 1], vals[i], vals[i]
        yield bps[-1], ONE, vals[-1], vals[-1]

    def __call__(self, x: Rational) -> float:
        xf = mod1(x)
        return self.values[bisect_right(self.breakpoints, xf) - 1]

    def left_limit(self, x: Rational) -> float:
        xf = mod1(x)
        if xf == 0:
            return self.values[-1]
        i = bisect_right(self.breakpoints, xf) - 1
        if self.breakpoints[i] == xf:
            i -= 1
        return self.values[i]

    def to_json_dict(self) -> dict:
        return {
            "type": "step",
            "breakpoints": [[b.numerator, b.denominator] for b in self.breakpoints],
            "values": list(self.values),
            "left_limit_at_zero": None,
        }


TorusFunction = Union[PiecewiseLinear, StepFunction]


def from_json_dict(d: dict) -> TorusFunction:
    bps = [Fraction(n, den) for n, den in d["breakpoints"]]
    if d["type"] == "pwl":
        return PiecewiseLinear(bps, d["values"], d.get("left_limit_at_zero"))
    return StepFunction(bps, d["values"])


# -- constructors ------------------------------------------------------------

def constant(c: float) -> PiecewiseLinear:
    return PiecewiseLinear((ZERO,), (float(c),))


def indicator(a: Rational, b: Rational) -> StepFunction:
    """chi of the torus arc [a, b) (wraps when b <= a; [a, a) is empty)."""
    af, bf = mod1(a), mod1(b)
    if af == bf:
        return StepFunction((ZERO,), (0.0,))
    pts = sorted({ZERO, af, bf})
    vals = []
    for p in pts:
        inside = (af <= p < bf) if af < bf else (p >= af or p < bf)
        vals.append(1.0 if inside else 0.0)
    return StepFunction(pts, vals)


def from_nodal(nodes: Sequence[Rational], values: Sequence[float],
               left_limit_at_zero: float | None = None) -> PiecewiseLinear:
    """Piecewise-linear interpolant of nodal data (node 0 must be present)."""
    return PiecewiseLinear([to_fraction(t) for t in nodes], values, left_limit_at_zero)


# -- operations ---------------------------------------------------------------

def evaluate(f: TorusFunction, x: Rational) -> float:
    return f(x)


def evaluate_left(f: TorusFunction, x: Rational) -> float:
    return f.left_limit(x)


def refine_breakpoints(f: TorusFunction, g: TorusFunction) -> list[Fraction]:
    return sorted(set(f.breakpoints) | set(g.breakpoints))


def _piece_table(f: TorusFunction, grid: Sequence[Fraction]):
    """Left/right values of f on each cell of a grid refining f's breakpoints."""
    left, right = [], []
    pieces = list(f.pieces())
    idx = 0
    for i, a in enumerate(grid):
        b = grid[i + 1] if i + 1 < len(grid) else ONE
        while pieces[idx][1] <= a:
            idx += 1
        pa, pb, va, vb = pieces[idx]
        if isinstance(f, StepFunction):
            left.append(va)
            right.append(va)
        else:
            inv = 1.0 / float(pb - pa)
            left.append(va + float(a - pa) * inv * (vb - va))
            right.append(va + float(b - pa) * inv * (vb - va))
    return left, right


def inner_product(f: TorusFunction, g: TorusFunction) -> float:
    """Exact integral of f*g over the torus via the common breakpoint refinement."""
    grid = refine_breakpoints(f, g)
    fl, fr = _piece_table(f, grid)
    gl, gr = _piece_table(g, grid)
    terms = []
    for i, a in enumerate(grid):
        b = grid[i + 1] if i + 1 < len(grid) else ONE
        ell = float(b - a)
        p1, q1 = fl[i], fr[i]
        p2, q2 = gl[i], gr[i]
        terms.append(ell * (2.0 * p1 * p2 + p1 * q2 + q1 * p2 + 2.0 * q1 * q2) / 6.0)
    return math.fsum(terms)


def integral(f: TorusFunction) -> float:
    terms = [float(b - a) * 0.5 * (va + vb) for a, b, va, vb in f.pieces()]
    return math.fsum(terms)


def combine(alpha: float, f: TorusFunction, beta: float, g: TorusFunction) -> TorusFunction:
    """alpha*f + beta*g, exact on the common refinement; f and g of the same type."""
    if type(f) is not type(g):
        raise TypeError("combine requires two functions of the same type")
    grid = refine_breakpoints(f, g)
    if isinstance(f, StepFunction):
        vals = [alpha * f(p) + beta * g(p) for p in grid]
        return StepFunction(grid, vals)
    vals = [alpha * f(p) + beta * g(p) for p in grid]
    wrap = alpha * f.wrap_value + beta * g.wrap_value
    return PiecewiseLinear(grid, vals, wrap)


def scale(alpha: float, f: TorusFunction) -> TorusFunction:
    if isinstance(f, StepFunction):
        return StepFunction(f.breakpoints, [alpha * v for v in f.values])
    wrap = None if f.left_limit_at_zero is None else alpha * f.left_limit_at_zero
    return PiecewiseLinear(f.breakpoints, [alpha * v for v in f.values], wrap)


def linear_combination(coeffs: Sequence[float], funcs: Sequence[TorusFunction]) -> TorusFunction:
    if not funcs:
        raise ValueError("empty combination")
    acc = scale(coeffs[0], funcs[0])
    for c, fn in zip(coeffs[1:], funcs[1:]):
        acc = combine(1.0, acc, c, fn)
    return acc


def abs_function(f: TorusFunction) -> TorusFunction:
    """|f|; zero crossings of linear pieces become exact rational breakpoints."""
    if isinstance(f, StepFunction):
        return StepFunction(f.breakpoints, [abs(v) for v in f.values])
    bps: list[Fraction] = []
    vals: list[float] = []
    for a, b, va, vb in f.pieces():
        bps.append(a)
        vals.append(abs(va))
        if (va > 0 > vb) or (va < 0 < vb):
            # exact crossing of the chord through (a, va), (b, vb)
            t = Fraction(va) / (Fraction(va) - Fraction(vb))
            x = a + t * (b - a)
            if a < x < b:
                bps.append(x)
                vals.append(0.0)
    wrap = abs(f.wrap_value)
    return PiecewiseLinear(bps, vals, wrap)


def l2_norm(f: TorusFunction) -> float:
    return math.sqrt(max(inner_product(f, f), 0.0))


def _signed_power(v: float, p1: float) -> float:
    return math.copysign(abs(v) ** p1, v)


def lp_norm(f: TorusFunction, p: float) -> float:
    """L^p norm for p in (1, inf); per-piece closed-form antiderivative of |linear|^p."""
    if not (math.isfinite(p) and p > 1.0):
        raise ValueError(f"lp_norm requires finite p > 1, got {p}")
    terms = []
    for a, b, va, vb in f.pieces():
        ell = float(b - a)
        if va == vb:
            terms.append(ell * abs(va) ** p)
        else:
            # int |v|^p dx = ell * (F(vb) - F(va)) / (vb - va), F odd primitive
            num = _signed_power(vb, p + 1.0) - _signed_power(va, p + 1.0)
            terms.append(ell * num / ((p + 1.0) * (vb - va)))
    return math.fsum(terms) ** (1.0 / p)


def sup_norm(f: TorusFunction) -> float:
    return max(max(abs(v) for v in f.values), abs(f.wrap_value))


def prefix_integral(f: TorusFunction, points: Iterable[Rational]) -> list[float]:
    """Exact values of P(x) = int_0^x f at the given torus points."""
    bps = list(f.breakpoints)
    pieces = list(f.pieces())
    cum = [0.0]
    for a, b, va, vb in pieces:
        cum.append(cum[-1] + float(b - a) * 0.5 * (va + vb))
    out = []
    for x in points:
        xf = mod1(x)
        i = bisect_right(bps, xf) - 1
        a, b, va, vb = pieces[i]
        t = float(xf - a)
        if t == 0.0:
            out.append(cum[i])
            continue
        s = (vb - va) / float(b - a)
        out.append(cum[i] + va * t + 0.5 * s * t * t)
    return out
