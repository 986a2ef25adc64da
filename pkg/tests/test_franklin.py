"""Orthonormal spline system construction and decay measurements."""

import math
from fractions import Fraction

import numpy as np
import pytest

from franklinlab.dyadic import build_nodes
from franklinlab.franklin import (fit_decay, fit_kernel_decay, franklin_function,
                                  get_basis, gram_defect, kernel, kernel_row,
                                  reconstruct_u, u_function)
from franklinlab.pwl import (PiecewiseLinear, inner_product, l2_norm,
                             linear_combination, from_nodal)

SQ3 = math.sqrt(3.0)


def test_f0_is_constant_one():
    f0 = franklin_function(0)
    assert all(abs(v - 1.0) <= 1e-12 for v in f0.values)
    assert abs(f0.wrap_value - 1.0) <= 1e-12


def test_f1_is_sqrt3_linear():
    f1 = franklin_function(1)
    for b in f1.breakpoints:
        assert f1(b) == pytest.approx(SQ3 * (2.0 * float(b) - 1.0), abs=1e-12)
    assert f1.wrap_value == pytest.approx(SQ3, abs=1e-12)


def _dense_gram_schmidt_f2():
    """Independent oracle: orthogonalize (1, x, hat at 1/2) on [0, 1]."""
    one = PiecewiseLinear([Fraction(0)], [1.0], left_limit_at_zero=None)
    lin = PiecewiseLinear([Fraction(0)], [0.0], left_limit_at_zero=1.0)
    hat = PiecewiseLinear([Fraction(0), Fraction(1, 2)], [0.0, 1.0],
                          left_limit_at_zero=0.0)
    basis = []
    for g in (one, lin, hat):
        r = g
        for e in basis:
            r = linear_combination([1.0, -inner_product(g, e)], [r, e])
        n = l2_norm(r)
        basis.append(linear_combination([1.0 / n], [r]))
    f2 = basis[2]
    if f2(Fraction(1, 2)) < 0:
        f2 = linear_combination([-1.0], [f2])
    return f2


def test_f2_nodal_values_match_oracle():
    oracle = _dense_gram_schmidt_f2()
    f2 = franklin_function(2)
    for t, want in ((Fraction(0), -SQ3), (Fraction(1, 2), SQ3)):
        assert oracle(t) == pytest.approx(want, abs=1e-10)
        assert f2(t) == pytest.approx(want, abs=1e-10)
    assert oracle.left_limit(0) == pytest.approx(-SQ3, abs=1e-10)
    assert f2.wrap_value == pytest.approx(-SQ3, abs=1e-10)


def test_orthonormality_modest_range():
    assert gram_defect("classical", 64) <= 1e-9
    assert gram_defect("periodic", 64) <= 1e-9


def test_new_function_orthogonal_to_previous_space():
    # f_n is orthogonal to every hat on the previous node set
    for n in (5, 9, 12):
        f = franklin_function(n)
        prev = build_nodes(n - 1)
        for t in prev.nodes:
            hat_nodes = list(prev.nodes)
            vals = [1.0 if s == t else 0.0 for s in hat_nodes]
            hat = from_nodal(hat_nodes, vals, left_limit_at_zero=vals[0] if t != 0 else None)
            assert abs(inner_product(f, hat)) <= 1e-10


def test_sign_convention_at_new_node():
    for n in range(2, 40):
        f = franklin_function(n)
        assert f(build_nodes(n).new_node) > 0


def test_reconstructed_u_properties():
    # u_n(x) = f_n(2x) / f_n(2 - 2x) pieced together is continuous and unit norm
    for n in (2, 3, 5, 8):
        u = u_function(n)
        assert u.is_continuous
        assert l2_norm(u) == pytest.approx(1.0, abs=1e-8)


def test_u_orthogonal_to_coarse_class():
    # u_n integrates to zero against hats of the coarse uniform class
    basis = get_basis("reconstructed")
    n = 6  # lies in block (4, 8]: orthogonal to the 8-node uniform class
    u = basis.function(n)
    m = 8
    for i in range(m):
        nodes = [Fraction(j, m) for j in range(m)]
        vals = [1.0 if j == i else 0.0 for j in range(m)]
        hat = from_nodal(nodes, vals)
        assert abs(inner_product(u, hat)) <= 1e-9


def test_decay_ratio_below_half():
    for n in (64, 128, 256):
        fit = fit_decay(n)
        assert fit.max_node_ratio is not None
        assert fit.max_node_ratio <= 0.5


def test_kernel_row_decay():
    fit = fit_kernel_decay(4, Fraction(3, 8))
    assert fit.kernel_q is not None
    assert fit.kernel_q < 1.0


def test_kernel_symmetry():
    x, t = Fraction(3, 16), Fraction(11, 16)
    assert kernel(3, x, t) == pytest.approx(kernel(3, t, x), rel=1e-9, abs=1e-9)


def test_kernel_row_reproduces_block_sums():
    row = kernel_row(3, Fraction(1, 3))
    direct = kernel(3, Fraction(1, 3), Fraction(5, 8))
    assert row(Fraction(5, 8)) == pytest.approx(direct, rel=1e-9, abs=1e-9)
