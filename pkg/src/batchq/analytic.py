"""Closed-form transient and steady-state quantities for batch infinite-server queues.

Transient formulas accept ``t = math.inf`` and delegate to the dedicated
steady-state entry points, which are computed from their own expressions
rather than by evaluating the transient ones at a large time.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import DomainError
from .model import ExponentialService, FixedBatch, QueueSpec, RatePattern
from .special import bernoulli, falling_factorial, harmonic
from .special import EULER_GAMMA, exp_integral_e1, exp_integral_ei

# Tolerance for the internal Faulhaber-vs-direct cumulant cross-check.
_CUMULANT_CHECK_TOL = 1e-9

# Steady-state probabilities smaller than this are reported as zero.
_PMF_UNDERFLOW = 1e-300


@dataclass(frozen=True)
class MomentPair:
    mean: float
    variance: float


def _require_exponential(spec: QueueSpec) -> float:
    if not isinstance(spec.service, ExponentialService):
        raise DomainError("closed form requires exponential service")
    return spec.service.mu


def _require_fixed_exponential(spec: QueueSpec) -> tuple[int, float]:
    if not isinstance(spec.batch, FixedBatch):
        raise DomainError("closed form requires a fixed batch size")
    return spec.batch.n, _require_exponential(spec)


def _require_stationary(rate: RatePattern) -> float:
    if not rate.is_stationary:
        raise DomainError("steady state requires a stationary arrival rate")
    return rate.base


def exp_weighted_rate_integral(rate: RatePattern, c: float, t: float) -> float:
    """Return exp(-c t) * integral_0^t rate(s) exp(c s) ds in closed form.

    This kernel drives every transient mean/variance/covariance formula; the
    trigonometric part integrates termwise against exp(c s).
    """
    if not c > 0.0:
        raise DomainError(f"exponential weight must be positive, got {c}")
    if t < 0.0:
        raise DomainError(f"time must be >= 0, got {t}")
    decay = math.exp(-c * t)
    total = rate.base / c * (1.0 - decay)
    for k, (a, b) in enumerate(zip(rate.cos_coeffs, rate.sin_coeffs), start=1):
        denom = k * k + c * c
        total += (a * c - b * k) / denom * (math.cos(k * t) - decay)
        total += (a * k + b * c) / denom * math.sin(k * t)
    return total


def exp_weighted_rate_integral_quad(rate: RatePattern, c: float, t: float) -> float:
    """Adaptive-quadrature version of ``exp_weighted_rate_integral``.

    Kept as an independent cross-check of the closed form; the integrand is
    written as rate(s) exp(-c (t - s)) so it stays bounded for large t.
    """
    if not c > 0.0:
        raise DomainError(f"exponential weight must be positive, got {c}")
    if t < 0.0:
        raise DomainError(f"time must be >= 0, got {t}")
    value, _ = quad(
        lambda s: rate.at(s) * math.exp(-c * (t - s)), 0.0, t,
        epsabs=1e-10, limit=200,
    )
    return value


def steady_exponent_power(n: int, theta: float) -> float:
    """Return sum_{k=1..n} (e^{k theta} - 1)/k, the power form of the steady exponent."""
    if n < 1:
        raise DomainError(f"batch size must be >= 1, got {n}")
    return math.fsum((math.exp(k * theta) - 1.0) / k for k in range(1, n + 1))


def steady_exponent_binomial(n: int, theta: float) -> float:
    """Return sum_{k=1..n} C(n,k) (e^theta - 1)^k / k.

    Algebraically identical to ``steady_exponent_power``; the two are kept as
    separate routes so they can check each other.
    """
    if n < 1:
        raise DomainError(f"batch size must be >= 1, got {n}")
    w = math.exp(theta) - 1.0
    return math.fsum(math.comb(n, k) * w**k / k for k in range(1, n + 1))


def steady_mgf_fixed(spec: QueueSpec, theta: float) -> float:
    """Steady-state MGF for fixed batches and exponential service.

    The initial count does not appear: its contribution decays away.
    """
    n, mu = _require_fixed_exponential(spec)
    lam = _require_stationary(spec.rate)
    return math.exp(lam / mu * steady_exponent_power(n, theta))


def transient_mgf_fixed(spec: QueueSpec, theta: float, t: float) -> float:
    """MGF of the queue length at time t for fixed batches, exponential service.

    Initial entities are assigned fresh service draws at time zero, which by
    memorylessness yields the (e^{-mu t}(e^theta - 1) + 1)^{q0} prefactor.
    """
    n, mu = _require_fixed_exponential(spec)
    if t < 0.0:
        raise DomainError(f"time must be >= 0, got {t}")
    if math.isinf(t):
        return steady_mgf_fixed(spec, theta)
    w = math.exp(theta) - 1.0
    prefactor = (math.exp(-mu * t) * w + 1.0) ** spec.q0
    exponent = 0.0
    for j in range(1, n + 1):
        kernel = exp_weighted_rate_integral(spec.rate, j * mu, t)
        exponent += math.comb(n, j) * w**j * kernel
    return prefactor * math.exp(exponent)


def _mean_var(rate: RatePattern, mu: float, mean_n: float, second_n: float,
              q0: int, t: float) -> MomentPair:
    decay = math.exp(-mu * t)
    single = exp_weighted_rate_integral(rate, mu, t)
    double = exp_weighted_rate_integral(rate, 2.0 * mu, t)
    mean = q0 * decay + mean_n * single
    var = q0 * (decay - decay * decay) + mean_n * single + (second_n - mean_n) * double
    return MomentPair(mean, var)


def steady_mean_var_fixed(spec: QueueSpec) -> MomentPair:
    """Steady-state mean n lam/mu and variance n(n+1) lam/(2 mu)."""
    n, mu = _require_fixed_exponential(spec)
    lam = _require_stationary(spec.rate)
    return MomentPair(n * lam / mu, n * (n + 1) * lam / (2.0 * mu))


def mean_var_fixed(spec: QueueSpec, t: float) -> MomentPair:
    """Transient mean and variance for fixed batches and exponential service."""
    n, mu = _require_fixed_exponential(spec)
    if t < 0.0:
        raise DomainError(f"time must be >= 0, got {t}")
    if math.isinf(t):
        return steady_mean_var_fixed(spec)
    return _mean_var(spec.rate, mu, float(n), float(n) ** 2, spec.q0, t)


def steady_mean_var_random(spec: QueueSpec) -> MomentPair:
    mu = _require_exponential(spec)
    lam = _require_stationary(spec.rate)
    mean_n, second_n = spec.batch.moments()
    mean = lam * mean_n / mu
    var = mean + lam * (second_n - mean_n) / (2.0 * mu)
    return MomentPair(mean, var)


def mean_var_random(spec: QueueSpec, t: float) -> MomentPair:
    """Transient mean and variance for an arbitrary batch law, exponential service."""
    mu = _require_exponential(spec)
    if t < 0.0:
        raise DomainError(f"time must be >= 0, got {t}")
    if math.isinf(t):
        return steady_mean_var_random(spec)
    mean_n, second_n = spec.batch.moments()
    return _mean_var(spec.rate, mu, mean_n, second_n, spec.q0, t)


def steady_pmf_fixed_markov(n: int, lam: float, mu: float, j_max: int) -> np.ndarray:
    """Steady-state pmf p_0..p_{j_max} for fixed batches of n, exponential service.

    Uses the recursion j p_j = (lam/mu) sum_{i=1..n} p_{j-i} seeded with
    p_0 = exp(-(lam/mu) H_n).  Probabilities that underflow double precision
    are reported as zero and a RuntimeWarning is issued.
    """
    if n < 1:
        raise DomainError(f"batch size must be >= 1, got {n}")
    if not (lam > 0.0 and mu > 0.0):
        raise DomainError("rates must be positive")
    if j_max < 0:
        raise DomainError(f"pmf length must be >= 0, got {j_max}")
    ratio = lam / mu
    p = np.zeros(j_max + 1)
    p[0] = math.exp(-ratio * harmonic(n))
    for j in range(1, j_max + 1):
        window = p[max(0, j - n):j]
        p[j] = ratio / j * window.sum()
    if np.any(p < _PMF_UNDERFLOW):
        first = int(np.argmax(p < _PMF_UNDERFLOW))
        warnings.warn(
            f"steady-state pmf underflows double precision from index {first}; "
            "those entries are reported as zero",
            RuntimeWarning,
            stacklevel=2,
        )
        p[p < _PMF_UNDERFLOW] = 0.0
    return p


def steady_pmf_n2_direct(i: int, lam: float, mu: float) -> float:
    """Direct double-sum steady-state probability for batches of two.

    Independent route used to validate the recursion: P(Q = i) =
    e^{-3 lam/(2 mu)} sum_j (lam/mu)^{i-j} 2^{-j} / ((i-2j)! j!).
    """
    if i < 0:
        raise DomainError(f"count must be >= 0, got {i}")
    if not (lam > 0.0 and mu > 0.0):
        raise DomainError("rates must be positive")
    ratio = lam / mu
    total = 0.0
    for j in range(i // 2 + 1):
        total += ratio ** (i - j) * 0.5**j / (math.factorial(i - 2 * j) * math.factorial(j))
    return math.exp(-1.5 * ratio) * total


def cumulant_scaled(k: int, n: int, lam: float, mu: float) -> float:
    """k-th cumulant of the steady queue divided by batch size n.

    Evaluates (lam/mu) n^{-k} sum_{j=1..n} j^{k-1} twice, once by direct
    integer summation and once through Faulhaber's formula with Bernoulli
    numbers, and insists the two routes agree.
    """
    if k < 1:
        raise DomainError(f"cumulant order must be >= 1, got {k}")
    if n < 1:
        raise DomainError(f"batch size must be >= 1, got {n}")
    if not (lam > 0.0 and mu > 0.0):
        raise DomainError("rates must be positive")
    ratio = lam / mu
    direct = ratio * (sum(j ** (k - 1) for j in range(1, n + 1)) / n**k)
    nf = float(n)
    # The n^{k-1}/2 term is the B_1 contribution and only enters for k >= 2;
    # at k = 1 the power sum is exactly n.
    poly = nf**k / k + (nf ** (k - 1) / 2.0 if k >= 2 else 0.0)
    for j in range(2, k):
        poly += bernoulli(j) / math.factorial(j) * falling_factorial(k - 1, j - 1) * nf ** (k - j)
    faulhaber = ratio * poly / nf**k
    if abs(direct - faulhaber) > _CUMULANT_CHECK_TOL * max(1.0, abs(direct)):
        raise ArithmeticError(
            f"cumulant cross-check failed for k={k}, n={n}: "
            f"direct {direct!r} vs faulhaber {faulhaber!r}"
        )
    return direct


def cumulant_scaled_limit(k: int, lam: float, mu: float) -> float:
    """Large-batch limit lam/(k mu) of the scaled k-th cumulant."""
    if k < 1:
        raise DomainError(f"cumulant order must be >= 1, got {k}")
    if not (lam > 0.0 and mu > 0.0):
        raise DomainError("rates must be positive")
    return lam / (k * mu)


def scaled_steady_mgf_fixed(theta: float, n: int, lam: float, mu: float) -> float:
    """Steady-state MGF of Q/n for fixed batches of n (finite-n scaling curve)."""
    if not (lam > 0.0 and mu > 0.0):
        raise DomainError("rates must be positive")
    return math.exp(lam / mu * steady_exponent_power(n, theta / n))


def scaled_steady_limit_mgf(theta: float, lam: float, mu: float,
                            mean_b: float = 1.0) -> float:
    """Steady-state MGF of the batch-scaling limit of Q/n.

    For a divisible batch law the only trace of the summand distribution is
    its mean, entering as theta * mean_b.
    """
    if not (lam > 0.0 and mu > 0.0 and mean_b > 0.0):
        raise DomainError("rates and mean summand size must be positive")
    if theta == 0.0:
        return 1.0
    ratio = lam / mu
    x = theta * mean_b
    if x > 0.0:
        return x**-ratio * math.exp(ratio * (exp_integral_ei(x) - EULER_GAMMA))
    return (-x) ** -ratio * math.exp(-ratio * (exp_integral_e1(-x) + EULER_GAMMA))


def scaled_limit_mgf(theta: float, t: float, lam: float, mu: float,
                     mean_b: float = 1.0) -> float:
    """Transient MGF of the batch-scaling limit of Q_t/n started empty."""
    if not (lam > 0.0 and mu > 0.0 and mean_b > 0.0):
        raise DomainError("rates and mean summand size must be positive")
    if t < 0.0:
        raise DomainError(f"time must be >= 0, got {t}")
    if theta == 0.0:
        return 1.0
    if math.isinf(t):
        return scaled_steady_limit_mgf(theta, lam, mu, mean_b)
    if t == 0.0:
        return 1.0
    ratio = lam / mu
    x = theta * mean_b
    decay = math.exp(-mu * t)
    if x > 0.0:
        exponent = exp_integral_ei(x) - exp_integral_ei(x * decay) - mu * t
    else:
        exponent = exp_integral_e1(-x * decay) - exp_integral_e1(-x) - mu * t
    return math.exp(ratio * exponent)


def subqueue_covariance(rate: RatePattern, mu: float, t: float) -> float:
    """Covariance between two sub-queues fed by common batch arrival epochs.

    Equals exp(-2 mu t) * integral_0^t rate(s) exp(2 mu s) ds; the stationary
    case reduces to lam/(2 mu) (1 - e^{-2 mu t}).
    """
    if not mu > 0.0:
        raise DomainError(f"service rate must be positive, got {mu}")
    if t < 0.0:
        raise DomainError(f"time must be >= 0, got {t}")
    if math.isinf(t):
        lam = _require_stationary(rate)
        return lam / (2.0 * mu)
    return exp_weighted_rate_integral(rate, 2.0 * mu, t)


def subqueue_correlation(q0_i: int, q0_j: int, lam: float, mu: float, t: float) -> float:
    """Correlation of two sub-queues under a stationary rate.

    Tends to 1/2 as t grows regardless of the initial counts.  At t = 0 both
    variances vanish and the correlation is undefined.
    """
    if not (lam > 0.0 and mu > 0.0):
        raise DomainError("rates must be positive")
    if t < 0.0:
        raise DomainError(f"time must be >= 0, got {t}")
    if math.isinf(t):
        return 0.5
    decay = math.exp(-mu * t)
    cov = lam / (2.0 * mu) * (1.0 - decay * decay)
    var_i = q0_i * (decay - decay * decay) + lam / mu * (1.0 - decay)
    var_j = q0_j * (decay - decay * decay) + lam / mu * (1.0 - decay)
    if var_i <= 0.0 or var_j <= 0.0:
        raise DomainError(f"sub-queue variance degenerate at t = {t}")
    return cov / math.sqrt(var_i * var_j)


def fluid_mgf(theta: float, t: float, lam: float, mu: float,
              mean_n: float, q0: float) -> float:
    """MGF of the fluid limit: a deterministic path, so the log-MGF is linear in theta."""
    if not (lam > 0.0 and mu > 0.0 and mean_n > 0.0):
        raise DomainError("rates and mean batch size must be positive")
    if t < 0.0:
        raise DomainError(f"time must be >= 0, got {t}")
    decay = math.exp(-mu * t)
    return math.exp(lam * mean_n * theta / mu * (1.0 - decay) + q0 * theta * decay)


def diffusion_params(lam: float, mu: float, mean_n: float,
                     second_moment_n: float) -> MomentPair:
    """Mean and variance of the steady diffusion approximation.

    Matches the t -> infinity limits of the transient mean/variance formulas
    exactly: mean lam E[N]/mu, variance (lam/(2 mu)) (E[N] + E[N^2]).
    """
    if not (lam > 0.0 and mu > 0.0):
        raise DomainError("rates must be positive")
    if not (mean_n > 0.0 and second_moment_n >= mean_n**2):
        raise DomainError("batch moments are inconsistent")
    return MomentPair(
        lam * mean_n / mu,
        lam / (2.0 * mu) * (mean_n + second_moment_n),
    )
