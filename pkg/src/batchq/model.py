"""Input model: arrival-rate patterns, batch-size laws, service laws, queue specs.

A queue spec bundles four ingredients: a periodic arrival rate, a batch-size
distribution, a service-time distribution, and an initial count.  All types
are immutable and JSON round-trippable; the file schema is documented on
``spec_to_dict``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError

_PROB_TOL = 1e-12

# Monte Carlo settings for order statistics of empirical service laws.  The
# seed is pinned so repeated calls (and repeated test runs) agree bit for bit.
ORDER_STAT_MC_DRAWS = 1_000_000
ORDER_STAT_MC_SEED = 1_000_003


@dataclass(frozen=True)
class RatePattern:
    """Arrival rate base + sum_k a_k cos(kt) + b_k sin(kt).

    The trigonometric coefficients may be empty (stationary rate).  The
    pattern must stay strictly positive, which is enforced through the l1
    envelope: base - sum(|a_k| + |b_k|) > 0.
    """

    base: float
    cos_coeffs: tuple[float, ...] = ()
    sin_coeffs: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        cos = tuple(float(a) for a in self.cos_coeffs)
        sin = tuple(float(b) for b in self.sin_coeffs)
        width = max(len(cos), len(sin))
        cos += (0.0,) * (width - len(cos))
        sin += (0.0,) * (width - len(sin))
        object.__setattr__(self, "base", float(self.base))
        object.__setattr__(self, "cos_coeffs", cos)
        object.__setattr__(self, "sin_coeffs", sin)
        if not self.base > 0.0:
            raise ValueError(f"rate base must be positive, got {self.base}")
        slack = self.base - sum(abs(a) + abs(b) for a, b in zip(cos, sin))
        if not slack > 0.0:
            raise ValueError(
                "rate pattern can touch zero: base must exceed the l1 norm "
                f"of the trig coefficients (slack {slack})"
            )

    @property
    def n_harmonics(self) -> int:
        return len(self.cos_coeffs)

    @property
    def is_stationary(self) -> bool:
        return all(a == 0.0 and b == 0.0 for a, b in zip(self.cos_coeffs, self.sin_coeffs))

    def at(self, t):
        """Evaluate the rate at time t (scalar or numpy array)."""
        t_arr = np.asarray(t, dtype=float)
        out = np.full(t_arr.shape, self.base)
        for k, (a, b) in enumerate(zip(self.cos_coeffs, self.sin_coeffs), start=1):
            out = out + a * np.cos(k * t_arr) + b * np.sin(k * t_arr)
        if np.ndim(t) == 0:
            return float(out)
        return out

    def bound(self) -> float:
        """l1 envelope base + sum(|a_k| + |b_k|), dominating the rate everywhere."""
        return self.base + sum(
            abs(a) + abs(b) for a, b in zip(self.cos_coeffs, self.sin_coeffs)
        )


def _validate_pmf(pairs, *, min_size: int, what: str) -> tuple[tuple[int, float], ...]:
    out = []
    previous = None
    for size, prob in pairs:
        size_i = int(size)
        prob_f = float(prob)
        if size_i != size:
            raise ValueError(f"{what} support must be integer, got {size}")
        if size_i < min_size:
            raise ValueError(f"{what} support must be >= {min_size}, got {size_i}")
        if previous is not None and size_i <= previous:
            raise ValueError(f"{what} support must be strictly increasing")
        if prob_f < 0.0:
            raise ValueError(f"{what} probabilities must be >= 0, got {prob_f}")
        previous = size_i
        out.append((size_i, prob_f))
    if not out:
        raise ValueError(f"{what} needs at least one support point")
    total = sum(p for _, p in out)
    if abs(total - 1.0) > _PROB_TOL:
        raise ValueError(f"{what} probabilities sum to {total}, expected 1")
    return tuple(out)


class BatchDist:
    """Common surface of the batch-size laws."""

    def moments(self) -> tuple[float, float]:
        """Return (mean, second moment) of the batch size."""
        raise NotImplementedError

    def mean(self) -> float:
        return self.moments()[0]

    def ccdf(self, j: int) -> float:
        """Return P(N >= j)."""
        raise NotImplementedError

    def pmf_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Return (sizes, probs) arrays describing the full pmf."""
        raise NotImplementedError

    def max_size(self) -> int:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        sizes, probs = self.pmf_arrays()
        return rng.choice(sizes, size=size, p=probs)


@dataclass(frozen=True)
class FixedBatch(BatchDist):
    """Every arrival brings exactly n entities."""

    n: int

    def __post_init__(self) -> None:
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"fixed batch size must be an integer >= 1, got {self.n}")
        object.__setattr__(self, "n", int(self.n))

    def moments(self) -> tuple[float, float]:
        return float(self.n), float(self.n) ** 2

    def ccdf(self, j: int) -> float:
        return 1.0 if j <= self.n else 0.0

    def pmf_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return np.array([self.n], dtype=np.int64), np.array([1.0])

    def max_size(self) -> int:
        return self.n

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return np.full(size, self.n, dtype=np.int64)


@dataclass(frozen=True)
class EmpiricalBatch(BatchDist):
    """Batch size drawn from an explicit finite pmf over sizes >= 1."""

    pmf: tuple[tuple[int, float], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "pmf", _validate_pmf(self.pmf, min_size=1, what="batch pmf"))

    def moments(self) -> tuple[float, float]:
        mean = sum(s * p for s, p in self.pmf)
        second = sum(s * s * p for s, p in self.pmf)
        return mean, second

    def ccdf(self, j: int) -> float:
        return sum(p for s, p in self.pmf if s >= j)

    def pmf_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        sizes = np.array([s for s, _ in self.pmf], dtype=np.int64)
        probs = np.array([p for _, p in self.pmf])
        return sizes, probs

    def max_size(self) -> int:
        return self.pmf[-1][0]


@lru_cache(maxsize=64)
def _convolved_pmf(base: tuple[tuple[int, float], ...], n: int) -> tuple[np.ndarray, np.ndarray]:
    top = base[-1][0]
    dense = np.zeros(top + 1)
    for size, prob in base:
        dense[size] = prob
    # n-fold convolution by repeated squaring; supports stay exact integers.
    result = np.array([1.0])
    power = dense
    todo = n
    while todo:
        if todo & 1:
            result = np.convolve(result, power)
        todo >>= 1
        if todo:
            power = np.convolve(power, power)
    sizes = np.nonzero(result > 0.0)[0].astype(np.int64)
    return sizes, result[sizes]


@dataclass(frozen=True)
class DivisibleSumBatch(BatchDist):
    """Batch size formed as the sum of n iid copies of a base law over {0, 1, ...}.

    Keeping the base law and n separate lets studies scale n while holding the
    per-summand law fixed.  Bases with mean zero are rejected because every
    batch would then be empty.
    """

    base: tuple[tuple[int, float], ...]
    n: int

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "base", _validate_pmf(self.base, min_size=0, what="divisible base pmf")
        )
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"summand count must be an integer >= 1, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        if self.base_mean() == 0.0:
            raise ValueError("divisible base pmf has mean zero (all batches empty)")

    def base_mean(self) -> float:
        return sum(s * p for s, p in self.base)

    def base_variance(self) -> float:
        mean = self.base_mean()
        return sum((s - mean) ** 2 * p for s, p in self.base)

    def moments(self) -> tuple[float, float]:
        mean = self.n * self.base_mean()
        second = self.n * self.base_variance() + mean**2
        return mean, second

    def pmf_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return _convolved_pmf(self.base, self.n)

    def ccdf(self, j: int) -> float:
        sizes, probs = self.pmf_arrays()
        return float(probs[sizes >= j].sum())

    def max_size(self) -> int:
        return self.n * self.base[-1][0]


class ServiceDist:
    """Common surface of the service-time laws."""

    def mean(self) -> float:
        raise NotImplementedError

    def order_stat_means(self, j: int) -> np.ndarray:
        """Return E[S_(1,j)], ..., E[S_(j,j)] for a sample of j draws."""
        raise NotImplementedError

    def order_stat_mean(self, i: int, j: int) -> float:
        """Return E[S_(i,j)], the mean i-th smallest of j draws."""
        if not 1 <= i <= j:
            raise DomainError(f"order statistic index ({i},{j}) out of range")
        return float(self.order_stat_means(j)[i - 1])

    def order_stat_gap_means(self, n: int) -> np.ndarray:
        """Return mean spacings (E[S_(1)], E[S_(2)-S_(1)], ..., E[S_(n)-S_(n-1)])."""
        if n < 1:
            raise DomainError(f"need n >= 1 order statistics, got {n}")
        means = self.order_stat_means(n)
        return np.diff(means, prepend=0.0)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class ExponentialService(ServiceDist):
    """Exponential service with rate mu (mean 1/mu)."""

    mu: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "mu", float(self.mu))
        if not self.mu > 0.0:
            raise ValueError(f"service rate must be positive, got {self.mu}")

    def mean(self) -> float:
        return 1.0 / self.mu

    def order_stat_gap_means(self, n: int) -> np.ndarray:
        if n < 1:
            raise DomainError(f"need n >= 1 order statistics, got {n}")
        # Spacing j of n exponential draws is Exp((n-j+1) mu).
        j = np.arange(1, n + 1)
        return 1.0 / ((n - j + 1) * self.mu)

    def order_stat_means(self, j: int) -> np.ndarray:
        return np.cumsum(self.order_stat_gap_means(j))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.exponential(1.0 / self.mu, size)


@dataclass(frozen=True)
class DeterministicService(ServiceDist):
    """Every entity holds a server for exactly d time units."""

    d: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "d", float(self.d))
        if not self.d > 0.0:
            raise ValueError(f"deterministic service time must be positive, got {self.d}")

    def mean(self) -> float:
        return self.d

    def order_stat_means(self, j: int) -> np.ndarray:
        if j < 1:
            raise DomainError(f"need j >= 1 order statistics, got {j}")
        return np.full(j, self.d)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return np.full(size, self.d)


@dataclass(frozen=True)
class UniformService(ServiceDist):
    """Service uniform on (0, b)."""

    b: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "b", float(self.b))
        if not self.b > 0.0:
            raise ValueError(f"uniform service bound must be positive, got {self.b}")

    def mean(self) -> float:
        return self.b / 2.0

    def order_stat_means(self, j: int) -> np.ndarray:
        if j < 1:
            raise DomainError(f"need j >= 1 order statistics, got {j}")
        return np.arange(1, j + 1) * self.b / (j + 1)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.uniform(0.0, self.b, size)


@lru_cache(maxsize=64)
def _empirical_order_stat_means(samples: tuple[float, ...], j: int) -> tuple[float, ...]:
    # Resample ORDER_STAT_MC_DRAWS j-tuples with replacement under a pinned
    # seed, in chunks to bound memory, and average the sorted columns.
    rng = np.random.default_rng(ORDER_STAT_MC_SEED)
    pool = np.asarray(samples)
    chunk = 100_000
    sums = np.zeros(j)
    done = 0
    while done < ORDER_STAT_MC_DRAWS:
        take = min(chunk, ORDER_STAT_MC_DRAWS - done)
        draws = rng.choice(pool, size=(take, j))
        draws.sort(axis=1)
        sums += draws.sum(axis=0)
        done += take
    return tuple(sums / ORDER_STAT_MC_DRAWS)


@dataclass(frozen=True)
class EmpiricalService(ServiceDist):
    """Service resampled uniformly from observed positive durations."""

    samples: tuple[float, ...]

    def __post_init__(self) -> None:
        vals = tuple(float(s) for s in self.samples)
        if not vals:
            raise ValueError("empirical service needs at least one sample")
        if any(not s > 0.0 for s in vals):
            raise ValueError("empirical service samples must be positive")
        object.__setattr__(self, "samples", vals)

    def mean(self) -> float:
        return math.fsum(self.samples) / len(self.samples)

    def order_stat_means(self, j: int) -> np.ndarray:
        if j < 1:
            raise DomainError(f"need j >= 1 order statistics, got {j}")
        return np.asarray(_empirical_order_stat_means(self.samples, j))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.choice(np.asarray(self.samples), size=size)


@dataclass(frozen=True)
class QueueSpec:
    """Complete description of one batch-arrival infinite-server system."""

    rate: RatePattern
    batch: BatchDist
    service: ServiceDist
    q0: int = 0

    def __post_init__(self) -> None:
        if int(self.q0) != self.q0 or self.q0 < 0:
            raise ValueError(f"initial count must be an integer >= 0, got {self.q0}")
        object.__setattr__(self, "q0", int(self.q0))


def _batch_to_dict(batch: BatchDist) -> dict:
    if isinstance(batch, FixedBatch):
        return {"kind": "fixed", "n": batch.n}
    if isinstance(batch, EmpiricalBatch):
        return {"kind": "empirical", "pmf": [[s, p] for s, p in batch.pmf]}
    if isinstance(batch, DivisibleSumBatch):
        return {
            "kind": "divisible_sum",
            "base": [[s, p] for s, p in batch.base],
            "n": batch.n,
        }
    raise TypeError(f"unknown batch law {batch!r}")


def _batch_from_dict(d: dict) -> BatchDist:
    kind = d.get("kind")
    if kind == "fixed":
        return FixedBatch(n=d["n"])
    if kind == "empirical":
        return EmpiricalBatch(pmf=tuple((s, p) for s, p in d["pmf"]))
    if kind == "divisible_sum":
        return DivisibleSumBatch(base=tuple((s, p) for s, p in d["base"]), n=d["n"])
    raise ValueError(f"unknown batch kind {kind!r}")


def _service_to_dict(service: ServiceDist) -> dict:
    if isinstance(service, ExponentialService):
        return {"kind": "exponential", "mu": service.mu}
    if isinstance(service, DeterministicService):
        return {"kind": "deterministic", "d": service.d}
    if isinstance(service, UniformService):
        return {"kind": "uniform", "b": service.b}
    if isinstance(service, EmpiricalService):
        return {"kind": "empirical", "samples": list(service.samples)}
    raise TypeError(f"unknown service law {service!r}")


def _service_from_dict(d: dict) -> ServiceDist:
    kind = d.get("kind")
    if kind == "exponential":
        return ExponentialService(mu=d["mu"])
    if kind == "deterministic":
        return DeterministicService(d=d["d"])
    if kind == "uniform":
        return UniformService(b=d["b"])
    if kind == "empirical":
        return EmpiricalService(samples=tuple(d["samples"]))
    raise ValueError(f"unknown service kind {kind!r}")


def spec_to_dict(spec: QueueSpec) -> dict:
    """Serialize a spec to plain data.

    Schema::

        {"rate": {"base": float, "cos": [a_1, ...], "sin": [b_1, ...]},
         "batch": {"kind": "fixed", "n": int}
                | {"kind": "empirical", "pmf": [[size, prob], ...]}
                | {"kind": "divisible_sum", "base": [[size, prob], ...], "n": int},
         "service": {"kind": "exponential", "mu": float}
                  | {"kind": "deterministic", "d": float}
                  | {"kind": "uniform", "b": float}
                  | {"kind": "empirical", "samples": [float, ...]},
         "q0": int}
    """
    return {
        "rate": {
            "base": spec.rate.base,
            "cos": list(spec.rate.cos_coeffs),
            "sin": list(spec.rate.sin_coeffs),
        },
        "batch": _batch_to_dict(spec.batch),
        "service": _service_to_dict(spec.service),
        "q0": spec.q0,
    }


def spec_from_dict(d: dict) -> QueueSpec:
    """Inverse of spec_to_dict; raises ValueError on malformed input."""
    try:
        rate_d = d["rate"]
        rate = RatePattern(
            base=rate_d["base"],
            cos_coeffs=tuple(rate_d.get("cos", ())),
            sin_coeffs=tuple(rate_d.get("sin", ())),
        )
        return QueueSpec(
            rate=rate,
            batch=_batch_from_dict(d["batch"]),
            service=_service_from_dict(d["service"]),
            q0=d.get("q0", 0),
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed queue spec: {exc}") from exc


def save_spec(spec: QueueSpec, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(spec_to_dict(spec), fh, indent=2)
        fh.write("\n")


def load_spec(path) -> QueueSpec:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"spec file {path} is not valid JSON: {exc}") from exc
    return spec_from_dict(data)
