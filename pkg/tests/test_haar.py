"""Shifted interval averages, increments, square function, maximal operators."""

import math
from fractions import Fraction

import numpy as np
import pytest

from franklinlab.haar import (default_max_level, dyadic_maximal,
                              four_point_maximal, haar_increment,
                              haar_partial_sum, level_average_table,
                              maximal_function, maximal_at, resolution_level,
                              shift_level, square_function)
from franklinlab.lab import random_step
from franklinlab.pwl import (StepFunction, indicator, inner_product, integral,
                             l2_norm)


def rand_step(seed, level=4):
    return random_step(np.random.default_rng(seed), level)


def test_resolution_and_shift_levels():
    f = rand_step(0, 3)
    assert resolution_level(f) == 3
    assert shift_level(Fraction(3, 16)) == 4
    with pytest.raises(ValueError):
        shift_level(Fraction(1, 3))


def test_partial_sum_reproduces_resolved_function():
    f = rand_step(1, 4)
    for xi in (0, Fraction(5, 16)):
        h = haar_partial_sum(f, 4, xi)
        for i in range(32):
            x = Fraction(2 * i + 1, 64)
            assert h(x) == pytest.approx(f(x), abs=1e-12)


def test_partial_sum_preserves_mean():
    f = rand_step(2, 5)
    for n in range(0, 5):
        h = haar_partial_sum(f, n, Fraction(3, 32))
        assert integral(h) == pytest.approx(integral(f), abs=1e-12)


def test_increment_orthogonality():
    f = rand_step(3, 5)
    xi = Fraction(1, 8)
    incs = [haar_increment(f, n, xi) for n in range(0, 6)]
    for i in range(len(incs)):
        for j in range(i + 1, len(incs)):
            assert abs(inner_product(incs[i], incs[j])) <= 1e-12


def test_pythagoras():
    f = rand_step(4, 5)
    xi = Fraction(7, 32)
    total = l2_norm(f) ** 2
    parts = sum(l2_norm(haar_increment(f, n, xi)) ** 2 for n in range(0, 6))
    assert parts == pytest.approx(total, rel=1e-12, abs=1e-12)


def test_level_table_matches_partial_sums():
    f = rand_step(5, 4)
    xi = Fraction(3, 16)
    L = default_max_level(f, xi)
    table = level_average_table(f, xi, L)
    for n in range(L + 1):
        h = haar_partial_sum(f, n, xi)
        for i in range(1 << L):
            x = Fraction(2 * i + 1, 1 << (L + 1))
            assert table[n][i] == pytest.approx(h(x), abs=1e-12)


def test_square_function_direct():
    f = rand_step(6, 4)
    xi = Fraction(1, 16)
    sq = square_function(f, xi)
    incs = [haar_increment(f, n, xi) for n in range(1, 5)]
    for i in range(16):
        x = Fraction(2 * i + 1, 32)
        want = math.sqrt(sum(g(x) ** 2 for g in incs))
        assert sq(x) == pytest.approx(want, abs=1e-12)


def test_dyadic_maximal_dominates_averages():
    f = rand_step(7, 4)
    xi = Fraction(5, 16)
    md = dyadic_maximal(f, xi)
    for n in range(1, 5):
        h = haar_partial_sum(f, n, xi)
        for i in range(32):
            x = Fraction(2 * i + 1, 64)
            assert md(x) >= abs(h(x)) - 1e-12


def _brute_force_maximal(f, x, samples=512):
    """Max average of |f| over arcs with endpoints on a fine grid through x."""
    cells = samples
    vals = np.array([abs(f(Fraction(i, cells))) for i in range(cells)])
    pre = np.concatenate([[0.0], np.cumsum(vals / cells)])
    xi = int(float(x) * cells)
    best = 0.0
    for a in range(0, xi + 1):
        for b in range(xi + 1, cells + 1):
            avg = (pre[b] - pre[a]) / ((b - a) / cells)
            best = max(best, avg)
    return best


def test_maximal_function_step_oracle():
    f = rand_step(8, 3)
    est = maximal_function(f, grid_exp=5)
    for num in (1, 7, 12, 20, 27):
        x = Fraction(num, 32)
        lo, hi = est.at(float(x))
        brute = _brute_force_maximal(f, x, samples=256)
        # step data with candidate breakpoints: the lower envelope is exact
        assert lo >= brute - 1e-10
        assert hi >= lo - 1e-12
        assert lo <= hi + 1e-12
        assert brute <= hi + 1e-10


def test_maximal_envelope_brackets_for_pwl():
    from franklinlab.lab import random_lambda_element
    g = random_lambda_element(np.random.default_rng(9), 3)
    est = maximal_function(g, grid_exp=6)
    for num in (3, 17, 44, 59):
        x = Fraction(num, 64)
        lo, hi = est.at(float(x))
        brute = _brute_force_maximal(g, x, samples=512)
        assert brute <= hi + 1e-9
        assert lo <= hi + 1e-12


def test_maximal_dominates_mean_and_value():
    f = rand_step(10, 4)
    est = maximal_function(f, grid_exp=6)
    mean = abs(integral(f))
    assert np.all(est.lower >= mean - 1e-12)
    for i, p in enumerate(est.points):
        assert est.lower[i] >= abs(f(Fraction(p).limit_denominator(1 << 12))) - 1e-9


def test_maximal_at_single_point():
    f = indicator(Fraction(1, 4), Fraction(1, 2))
    lo, hi = maximal_at(f, Fraction(3, 8))
    # f <= 1 everywhere and the point lies inside the support, so M(f) = 1
    assert lo == pytest.approx(1.0, abs=1e-12)
    assert hi >= 1.0 - 1e-12


def test_four_point_maximal_positive_and_scales():
    f = rand_step(11, 4)
    v = four_point_maximal(f, Fraction(1, 3), 2, Fraction(1, 16))
    assert v > 0
    from franklinlab.pwl import scale
    v2 = four_point_maximal(scale(10.0, f), Fraction(1, 3), 2, Fraction(1, 16))
    assert v2 == pytest.approx(10.0 * v, rel=1e-9)


def test_constant_function_maximal():
    c = StepFunction([Fraction(0)], [3.0])
    est = maximal_function(c, grid_exp=4)
    assert np.allclose(est.lower, 3.0)
    assert np.all(est.upper >= est.lower)
