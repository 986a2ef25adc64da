"""Node sets, dyadic decompositions, shifted intervals."""

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from franklinlab.dyadic import (DyadicInterval, build_nodes, dyadic_shift_grid,
                                is_dyadic, locate_dyadic, mod1, shifted_partition,
                                split_index, to_fraction, torus_distance)


def test_split_index_roundtrip():
    for n in range(2, 600):
        k, j = split_index(n)
        assert n == (1 << k) + j
        assert 1 <= j <= 1 << k


def test_split_index_rejects_small():
    with pytest.raises(ValueError):
        split_index(1)


def test_mod1_and_distance():
    assert mod1(Fraction(7, 4)) == Fraction(3, 4)
    assert mod1(Fraction(-1, 4)) == Fraction(3, 4)
    assert torus_distance(Fraction(1, 8), Fraction(7, 8)) == Fraction(1, 4)
    assert torus_distance(0, Fraction(1, 2)) == Fraction(1, 2)


def test_is_dyadic():
    assert is_dyadic(Fraction(3, 8))
    assert is_dyadic(Fraction(3, 8), max_exp=3)
    assert not is_dyadic(Fraction(3, 8), max_exp=2)
    assert not is_dyadic(Fraction(1, 3))


def test_nodes_refine_by_one_point():
    for n in range(2, 129):
        prev = set(build_nodes(n - 1).nodes)
        cur = set(build_nodes(n).nodes)
        assert prev < cur
        assert cur - prev == {build_nodes(n).new_node}


def test_new_node_formula():
    for n in range(2, 129):
        ns = build_nodes(n)
        assert ns.new_node == Fraction(2 * ns.j - 1, 1 << (ns.k + 1))


def test_full_levels_are_uniform():
    for k in range(0, 6):
        n = 1 << k
        nodes = build_nodes(n).nodes
        assert list(nodes) == [Fraction(i, n) for i in range(n)]


@given(st.integers(0, 1023), st.integers(0, 5), st.integers(0, 31))
def test_locate_dyadic_contains(num, level, shift_num):
    x = Fraction(num, 1024)
    xi = Fraction(shift_num, 32)
    iv = locate_dyadic(x, level, xi)
    assert iv.contains(x)
    assert iv.length == Fraction(1, 1 << level)
    # left endpoint sits on the shifted grid
    assert is_dyadic(mod1(iv.left - xi), max_exp=level)


def test_shifted_partition_covers_disjointly():
    for xi in (0, Fraction(3, 16)):
        part = shifted_partition(3, xi)
        assert len(part) == 8
        for x in [Fraction(i, 64) for i in range(64)]:
            assert sum(iv.contains(x) for iv in part) == 1


def test_interval_wraps():
    iv = DyadicInterval(2, Fraction(7, 8), Fraction(7, 8))
    assert iv.right == Fraction(1, 8)
    assert iv.contains(Fraction(15, 16))
    assert iv.contains(Fraction(1, 16))
    assert not iv.contains(Fraction(1, 4))


def test_shift_grid():
    g = dyadic_shift_grid(3)
    assert g == [Fraction(i, 8) for i in range(8)]


def test_to_fraction_exact_float():
    assert to_fraction(0.375) == Fraction(3, 8)
