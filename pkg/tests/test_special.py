"""Scalar special functions: harmonic numbers, Bernoulli numbers, truncated
polylogarithm, and the exponential integrals Ei/E1.

High-precision reference values were computed once with mpmath (50 digits)
and frozen here.
"""

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from batchq.errors import DomainError
from batchq.special import (
    E1_SERIES_CUTOFF,
    MAX_BERNOULLI_INDEX,
    bernoulli,
    exp_integral_e1,
    exp_integral_ei,
    falling_factorial,
    harmonic,
    trunc_polylog,
)

EI_REFS = {
    1.0: 1.8951178163559368,
    0.5: 0.4542199048631736,
    0.2: -0.8217605879024003,
    2.0: 4.95423435600189,
    5.0: 40.18527535580318,
}
E1_REFS = {
    0.1: 1.8229239584193906,
    0.5: 0.5597735947761608,
    1.0: 0.21938393439552029,
    2.0: 0.04890051070806112,
    3.9: 0.004267145281218572,   # just below the series/fraction cutoff
    4.1: 0.0033488806360697115,  # just above it
    10.0: 4.156968929685325e-06,
    30.0: 3.0215520106888124e-15,
    50.0: 3.783264029550459e-24,
}


def test_harmonic_small_values():
    assert harmonic(1) == 1.0
    assert harmonic(2) == 1.5
    assert math.isclose(harmonic(4), 25.0 / 12.0, rel_tol=1e-15)


def test_harmonic_empty_sum_and_rejection():
    assert harmonic(0) == 0.0  # empty sum convention
    with pytest.raises(DomainError):
        harmonic(-3)


@given(st.integers(min_value=2, max_value=500))
@settings(max_examples=60, deadline=None)
def test_harmonic_difference_is_reciprocal(n):
    assert math.isclose(harmonic(n) - harmonic(n - 1), 1.0 / n, rel_tol=1e-12)


def test_bernoulli_known_values():
    assert bernoulli(0) == 1.0
    assert bernoulli(1) == 0.5  # the double-sum convention gives +1/2
    assert math.isclose(bernoulli(2), 1.0 / 6.0, rel_tol=1e-12)
    assert math.isclose(bernoulli(4), -1.0 / 30.0, rel_tol=1e-12)
    assert math.isclose(bernoulli(6), 1.0 / 42.0, rel_tol=1e-12)


def test_bernoulli_odd_indices_vanish():
    for i in range(3, MAX_BERNOULLI_INDEX + 1, 2):
        assert abs(bernoulli(i)) < 1e-9


def test_bernoulli_exactness_against_fraction_sum():
    # Re-evaluate the double sum in exact rational arithmetic; the function
    # must match to the last bit since it is built the same way.
    for i in (8, 12, 20, 40):
        total = Fraction(0)
        for k in range(i + 1):
            inner = Fraction(0)
            for j in range(k + 1):
                inner += (-1) ** j * math.comb(k, j) * Fraction((j + 1) ** i)
            total += inner / (k + 1)
        assert bernoulli(i) == float(total)


def test_bernoulli_rejects_out_of_range():
    with pytest.raises(DomainError):
        bernoulli(-1)
    with pytest.raises(DomainError):
        bernoulli(MAX_BERNOULLI_INDEX + 1)


def test_falling_factorial():
    assert falling_factorial(5.0, 0) == 1.0
    assert falling_factorial(5.0, 2) == 20.0
    assert falling_factorial(3.0, 4) == 0.0
    assert math.isclose(falling_factorial(2.5, 3), 2.5 * 1.5 * 0.5, rel_tol=1e-15)


def test_trunc_polylog_values():
    assert math.isclose(trunc_polylog(1.0, 3, 1.0), 11.0 / 6.0, rel_tol=1e-15)
    assert trunc_polylog(0.0, 5, 1.0) == 0.0
    assert math.isclose(trunc_polylog(math.exp(0.1), 2, 1.0),
                        1.7158722971557325, rel_tol=1e-14)


def test_trunc_polylog_matches_harmonic_bitwise():
    # Same summation order, so z = 1, s = 1 must agree exactly, not just
    # within tolerance.
    for n in (1, 2, 5, 17, 100):
        assert trunc_polylog(1.0, n, 1.0) == harmonic(n)


def test_ei_reference_values():
    for x, ref in EI_REFS.items():
        assert math.isclose(exp_integral_ei(x), ref, rel_tol=1e-12)


def test_ei_rejects_nonpositive():
    for x in (0.0, -1.0, -0.01):
        with pytest.raises(DomainError):
            exp_integral_ei(x)


def test_ei_derivative_identity():
    # d/dx Ei(x) = e^x / x, checked with central differences.
    h = 1e-5
    for x in (0.5, 1.0, 2.0, 5.0):
        num = (exp_integral_ei(x + h) - exp_integral_ei(x - h)) / (2.0 * h)
        assert math.isclose(num, math.exp(x) / x, rel_tol=1e-6)


def test_e1_reference_values_both_branches():
    for x, ref in E1_REFS.items():
        assert math.isclose(exp_integral_e1(x), ref, rel_tol=1e-12), x


def test_e1_branches_agree_where_both_work():
    # Evaluate both algorithms at the same points around the crossover; they
    # must agree to the advertised tolerance, so the handover is seamless.
    from batchq.special import _e1_continued_fraction, _e1_series

    for x in (3.0, E1_SERIES_CUTOFF, 4.5, 5.0):
        assert math.isclose(_e1_series(x), _e1_continued_fraction(x),
                            rel_tol=1e-11)


def test_e1_rejects_nonpositive():
    for x in (0.0, -0.5):
        with pytest.raises(DomainError):
            exp_integral_e1(x)


@given(st.floats(min_value=0.01, max_value=60.0))
@settings(max_examples=80, deadline=None)
def test_e1_positive_and_decreasing(x):
    v = exp_integral_e1(x)
    assert v > 0.0
    assert exp_integral_e1(x * 1.01) < v


def test_e1_matches_direct_quadrature():
    # Independent route: integrate e^{-s}/s over [x, inf) numerically.
    from scipy.integrate import quad

    for x in (0.3, 1.0, 2.5, 6.0):
        ref, err = quad(lambda s: math.exp(-s) / s, x, math.inf)
        assert math.isclose(exp_integral_e1(x), ref, rel_tol=1e-9)
