"""Node sets, dyadic decompositions and shifted dyadic intervals on the torus [0, 1).

All endpoints are exact rationals (fractions.Fraction), so partition and
nesting predicates never suffer from boundary misclassification.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence, Union

Rational = Union[int, float, Fraction]


def to_fraction(x: Rational) -> Fraction:
    """Exact conversion; floats are converted to their exact binary value."""
    if isinstance(x, Fraction):
        return x
    return Fraction(x)


def mod1(x: Rational) -> Fraction:
    """Canonical torus representative in [0, 1)."""
    f = to_fraction(x)
    return f - (f.numerator // f.denominator)


def is_dyadic(x: Rational, max_exp: int | None = None) -> bool:
    """True if x = p / 2^e for some integer p, with e <= max_exp when given."""
    f = to_fraction(x)
    d = f.denominator
    e = d.bit_length() - 1
    if d != 1 << e:
        return False
    return max_exp is None or e <= max_exp


def torus_distance(x: Rational, y: Rational) -> Fraction:
    """d(x, y) on the torus, always in [0, 1/2]."""
    d = mod1(to_fraction(x) - to_fraction(y))
    return min(d, 1 - d)


def split_index(n: int) -> tuple[int, int]:
    """Decompose n = 2^k + j with 1 <= j <= 2^k (n >= 2)."""
    if n < 2:
        raise ValueError(f"decomposition requires n >= 2, got {n}")
    k = (n - 1).bit_length() - 1
    j = n - (1 << k)
    return k, j


@dataclass(frozen=True)
class NodeSet:
    """The ordered node collection Pi_n, refining Pi_{n-1} by one point."""

    n: int
    k: int
    j: int
    nodes: tuple[Fraction, ...]

    def __post_init__(self):
        if self.n >= 2 and not (1 <= self.j <= 1 << self.k):
            raise ValueError("invalid dyadic decomposition")

    @property
    def new_node(self) -> Fraction:
        """t_n = t_{n,2j-1}, the point added relative to Pi_{n-1}."""
        if self.n < 2:
            return Fraction(0)
        return Fraction(2 * self.j - 1, 1 << (self.k + 1))

    def __len__(self) -> int:
        return len(self.nodes)

    def __iter__(self):
        return iter(self.nodes)


@lru_cache(maxsize=None)
def build_nodes(n: int) -> NodeSet:
    """Construct Pi_n.

    Nodes are i/2^{k+1} for 0 <= i <= 2j and (i-j)/2^k for 2j < i < n,
    where n = 2^k + j, 1 <= j <= 2^k.  Pi_1 = {0}.
    """
    if n < 1:
        raise ValueError(f"node set requires n >= 1, got {n}")
    if n == 1:
        return NodeSet(1, 0, 0, (Fraction(0),))
    k, j = split_index(n)
    nodes = []
    for i in range(n):
        if i <= 2 * j:
            nodes.append(Fraction(i, 1 << (k + 1)))
        else:
            nodes.append(Fraction(i - j, 1 << k))
    return NodeSet(n, k, j, tuple(nodes))


@dataclass(frozen=True)
class DyadicInterval:
    """A xi-shifted dyadic interval [left, left + 2^-level) modulo 1."""

    level: int
    shift: Fraction
    left: Fraction

    @property
    def length(self) -> Fraction:
        return Fraction(1, 1 << self.level)

    @property
    def right(self) -> Fraction:
        """Right endpoint reduced modulo 1 (may wrap below left)."""
        return mod1(self.left + self.length)

    def contains(self, x: Rational) -> bool:
        d = mod1(to_fraction(x) - self.left)
        return d < self.length

    def endpoints(self) -> tuple[Fraction, Fraction]:
        return self.left, self.right


def locate_dyadic(x: Rational, n: int, xi: Rational = 0) -> DyadicInterval:
    """The xi-shifted dyadic interval of length 2^-n containing x (unique)."""
    if n < 0:
        raise ValueError("level must be nonnegative")
    xf = mod1(x)
    sf = mod1(xi)
    if not is_dyadic(sf):
        raise ValueError(f"shift must be a dyadic rational, got {xi}")
    step = Fraction(1, 1 << n)
    offset = (xf - sf) - (xf - sf) % step  # largest multiple of 2^-n below x - xi
    return DyadicInterval(n, sf, mod1(sf + offset))


def shifted_partition(n: int, xi: Rational = 0) -> list[DyadicInterval]:
    """All 2^n intervals of the level-(n, xi) partition of the torus."""
    sf = mod1(xi)
    step = Fraction(1, 1 << n)
    return [DyadicInterval(n, sf, mod1(sf + i * step)) for i in range(1 << n)]


def dyadic_shift_grid(resolution: int) -> list[Fraction]:
    """The equal-weight shift grid {i / 2^resolution} replacing integration in xi."""
    return [Fraction(i, 1 << resolution) for i in range(1 << resolution)]
