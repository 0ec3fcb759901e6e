"""Scalar special functions used by the queueing formulas.

Everything here is plain float arithmetic with explicit convergence control;
series tolerances live in one place (``REL_TOL``) so the error contract is
easy to audit.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

from .errors import DomainError

# Euler-Mascheroni constant, double precision.
EULER_GAMMA = 0.5772156649015329

# Relative tolerance for the exponential-integral series.
REL_TOL = 1e-12

# Largest Bernoulli index accepted by bernoulli().
MAX_BERNOULLI_INDEX = 40

# Crossover between the alternating series and the continued fraction for E1.
# The series is mathematically valid everywhere but loses ~e^x * eps absolute
# accuracy to cancellation, so beyond x ~ 5 it cannot meet REL_TOL in double
# precision; the Lentz continued fraction takes over well before that point.
E1_SERIES_CUTOFF = 4.0

_MAX_ITER = 500


def harmonic(n: int) -> float:
    """Return the n-th harmonic number H_n = sum_{k<=n} 1/k (H_0 = 0)."""
    if n < 0:
        raise DomainError(f"harmonic index must be >= 0, got {n}")
    total = 0.0
    for k in range(1, n + 1):
        total += 1.0 / k
    return total


@lru_cache(maxsize=None)
def _bernoulli_fraction(i: int) -> Fraction:
    # Double sum over k and j with exact integer binomials; evaluating in
    # rational arithmetic sidesteps the cancellation that plagues the float
    # version at moderate indices.
    total = Fraction(0)
    for k in range(i + 1):
        inner = 0
        for j in range(k + 1):
            inner += (-1) ** j * math.comb(k, j) * (j + 1) ** i
        total += Fraction(inner, k + 1)
    return total


def bernoulli(i: int) -> float:
    """Return the i-th Bernoulli number in the convention with B_1 = +1/2.

    Indices above MAX_BERNOULLI_INDEX are rejected: callers in this package
    never need them and the magnitudes grow too fast to be meaningful in
    double precision.
    """
    if i < 0:
        raise DomainError(f"bernoulli index must be >= 0, got {i}")
    if i > MAX_BERNOULLI_INDEX:
        raise DomainError(
            f"bernoulli index {i} exceeds supported maximum {MAX_BERNOULLI_INDEX}"
        )
    return float(_bernoulli_fraction(i))


def falling_factorial(n: float, i: int) -> float:
    """Return n (n-1) ... (n-i+1), with the empty product for i = 0."""
    if i < 0:
        raise DomainError(f"falling factorial length must be >= 0, got {i}")
    out = 1.0
    for step in range(i):
        out *= n - step
    return out


def trunc_polylog(z: float, n: int, s: float) -> float:
    """Return the truncated polylogarithm sum_{k=1..n} z^k / k^s.

    Terms are accumulated in ascending k so that trunc_polylog(1.0, n, 1.0)
    reproduces harmonic(n) bit for bit.
    """
    if n < 0:
        raise DomainError(f"truncation order must be >= 0, got {n}")
    total = 0.0
    for k in range(1, n + 1):
        total += z**k / k**s
    return total


def exp_integral_ei(x: float) -> float:
    """Exponential integral Ei(x) for x > 0.

    Uses the ascending series gamma + log x + sum_k x^k / (k k!), which has
    nonnegative terms for x > 0 and therefore converges stably.
    """
    if x <= 0.0:
        raise DomainError(f"Ei requires x > 0, got {x}")
    total = EULER_GAMMA + math.log(x)
    power = 1.0  # x^k / k!
    for k in range(1, _MAX_ITER):
        power *= x / k
        term = power / k
        total += term
        if term <= REL_TOL * abs(total):
            return total
    raise RuntimeError(f"Ei series failed to converge for x = {x}")


def _e1_series(x: float) -> float:
    total = -EULER_GAMMA - math.log(x)
    power = 1.0  # (-x)^k / k!
    for k in range(1, _MAX_ITER):
        power *= -x / k
        term = power / k
        total -= term
        if abs(term) <= REL_TOL * abs(total):
            return total
    raise RuntimeError(f"E1 series failed to converge for x = {x}")


def _e1_continued_fraction(x: float) -> float:
    # Modified Lentz evaluation of E1(x) = e^-x / (x+1 - 1/(x+3 - 4/(x+5 - ...))).
    tiny = 1e-300
    b = x + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        a = -float(i * i)
        b += 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) <= REL_TOL:
            return h * math.exp(-x)
    raise RuntimeError(f"E1 continued fraction failed to converge for x = {x}")


def exp_integral_e1(x: float) -> float:
    """Exponential integral E1(x) for x > 0.

    The alternating series -gamma - log x - sum_k (-x)^k / (k k!) is used up
    to E1_SERIES_CUTOFF; larger arguments switch to a continued fraction,
    which keeps the relative error near REL_TOL across the whole domain.
    """
    if x <= 0.0:
        raise DomainError(f"E1 requires x > 0, got {x}")
    if x <= E1_SERIES_CUTOFF:
        return _e1_series(x)
    return _e1_continued_fraction(x)
