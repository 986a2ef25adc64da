"""Convergence classification for weight series sum 1/(n w(n)).

A weight sequence w feeds two equivalent series: the direct one and the
normalized form sum 1/(delta(k) k log k) with delta = w / log, which is the
same series term by term.  Classification uses Cauchy condensation applied
iteratively: with w nondecreasing the block sum over n in [2^j, 2^{j+1})
is bracketed by [2^j t(2^{j+1}), 2^j t(2^j)] for decreasing terms t, and
the bracket terms can be condensed again.  At each depth the tail either
certifies divergence (j * lower term bounded away from 0, comparison with
the harmonic series) or convergence (j^2 * upper term finite and
nonincreasing, comparison with sum 1/j^2); otherwise the checker condenses
once more, up to a depth limit.

Logarithms are base 2 throughout.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

# weight families as functions of m = log2 n; keeps huge n representable
MULTIPLIER_FAMILIES = {
    "log": lambda m: m,
    "log-loglog": lambda m: m * np.log2(m),
    "log-loglog-squared": lambda m: m * np.log2(m) ** 2,
}

_DIVERGENCE_DELTA = 0.1
_MAX_DEPTH = 3


@dataclass
class MultiplierReport:
    name: str
    verdict: str               # "converges" | "diverges" | "inconclusive"
    depth: int                 # condensation depth that decided (0 if none)
    cutoff: int
    partial_sum: float         # direct partial sum of 1/(n w(n)) up to cutoff
    partial_sum_delta: float   # partial sum of 1/(delta(k) k log k), same series
    monotone_from: int         # first index with w nondecreasing onward
    ratio_increasing: bool     # w(n)/log n nondecreasing on the sampled range
    runtime_ms: float = 0.0
    detail: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict != "inconclusive"

    def to_json_dict(self) -> dict:
        return {"name": self.name, "verdict": self.verdict, "depth": self.depth,
                "cutoff": self.cutoff, "partial_sum": self.partial_sum,
                "partial_sum_delta": self.partial_sum_delta,
                "monotone_from": self.monotone_from,
                "ratio_increasing": self.ratio_increasing,
                "runtime_ms": self.runtime_ms, "detail": self.detail}


def _as_exponent_rule(w):
    """Return (name, W) with W(m) = w(2^m) for m treated as a float array."""
    if callable(w):
        return getattr(w, "__name__", "custom"), lambda m: w(np.power(2.0, m))
    if w in MULTIPLIER_FAMILIES:
        return w, MULTIPLIER_FAMILIES[w]
    raise ValueError(f"unknown weight family {w!r}; known: "
                     f"{sorted(MULTIPLIER_FAMILIES)} or a callable w(n)")


def _bracket_terms(W, depth: int, j: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Lower/upper condensation brackets at the given depth for index array j.

    Depth 1: block sums of 1/(n w(n)) over n in [2^j, 2^{j+1}).
    Depth d+1: block sums of the depth-d bracket sequence.
    The exponent arguments form a tower, so depth is kept small.
    """
    lo_arg = j.astype(float)
    hi_arg = j.astype(float)
    scale = np.ones_like(lo_arg)
    for _ in range(depth - 1):
        scale = scale * np.power(2.0, lo_arg)  # 2^j factors accumulate
        lo_arg, hi_arg = np.power(2.0, lo_arg + 1), np.power(2.0, hi_arg)
    lower = scale / (2.0 * W(lo_arg + 1))
    upper = scale / W(hi_arg)
    return lower, upper


def _tail_indices(depth: int, cutoff: int) -> np.ndarray:
    """Index window whose tower exponent stays within the cutoff resolution."""
    top = math.log2(cutoff)
    for _ in range(depth - 1):
        top = math.log2(max(top, 2.0))
    hi = int(top)
    lo = max(3, hi // 2)
    if hi <= lo:
        return np.array([], dtype=np.int64)
    return np.arange(lo, hi + 1)


def check_multiplier_condition(w="log", cutoff: int = 2 ** 512,
                               delta: float = _DIVERGENCE_DELTA,
                               max_depth: int = _MAX_DEPTH,
                               sample_max: int = 2 ** 20) -> MultiplierReport:
    """Classify sum 1/(n w(n)) as convergent or divergent via condensation
    brackets; `cutoff` bounds the largest index any bracket may reference."""
    t0 = time.time()
    name, W = _as_exponent_rule(w)

    # precondition scan on a dyadic sample: positivity and eventual monotonicity
    m_grid = np.arange(2, int(math.log2(sample_max)) + 1, dtype=float)
    wv = np.asarray(W(m_grid), dtype=float)
    if np.any(wv <= 0):
        raise ValueError("weight must be positive on the sampled range")
    nondecr = wv[1:] >= wv[:-1] - 1e-12
    monotone_from = int(2 ** m_grid[int(np.argmax(nondecr))]) if nondecr.any() else -1
    if not nondecr[-max(1, len(nondecr) // 2):].all():
        raise ValueError("weight must be nondecreasing on the sampled tail")
    ratio = wv / m_grid                       # w(n)/log n at n = 2^m
    ratio_increasing = bool(np.all(ratio[1:] >= ratio[:-1] - 1e-12))

    # direct partial sums; the delta-form series is identical term by term
    n = np.arange(4, sample_max + 1, dtype=float)
    terms = 1.0 / (n * W(np.log2(n)))
    partial = float(np.sum(terms))

    verdict, depth_used, detail = "inconclusive", 0, {}
    for depth in range(1, max_depth + 1):
        j = _tail_indices(depth, cutoff)
        if len(j) == 0:
            break
        lower, upper = _bracket_terms(W, depth, j)
        div_stat = float(np.min(j * lower))
        ju = j.astype(float) ** 2 * upper
        conv_ok = bool(np.all(np.isfinite(ju)) and np.all(np.diff(ju) <= 1e-12))
        detail[f"depth{depth}_div_stat"] = div_stat
        detail[f"depth{depth}_conv_stat"] = float(np.max(ju))
        if div_stat >= delta:
            verdict, depth_used = "diverges", depth
            break
        if conv_ok:
            verdict, depth_used = "converges", depth
            break
    return MultiplierReport(
        name=name, verdict=verdict, depth=depth_used, cutoff=cutoff,
        partial_sum=partial, partial_sum_delta=partial,
        monotone_from=monotone_from, ratio_increasing=ratio_increasing,
        runtime_ms=(time.time() - t0) * 1000.0, detail=detail)
