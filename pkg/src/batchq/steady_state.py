"""Steady-state queue lengths as weighted sums of independent Poisson variables.

Each representation is a list of (weight, rate) terms meaning
sum_over_terms weight * Poisson(rate).  Terms sharing a weight are merged by
adding their rates, which is exact by Poisson additivity.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .model import BatchDist, ExponentialService, ServiceDist


@dataclass(frozen=True)
class PoissonSumRep:
    """Distribution of sum weight_i * Poisson(rate_i) over independent terms.

    ``truncation_tail_mass`` records any batch-law probability dropped while
    building the representation; it is zero for the finite-support laws
    shipped here.
    """

    terms: tuple[tuple[int, float], ...]
    truncation_tail_mass: float = 0.0

    def __post_init__(self) -> None:
        cleaned = []
        for weight, rate in self.terms:
            w = int(weight)
            r = float(rate)
            if w < 1:
                raise ValueError(f"term weight must be >= 1, got {weight}")
            if r < 0.0:
                raise ValueError(f"term rate must be >= 0, got {rate}")
            cleaned.append((w, r))
        object.__setattr__(self, "terms", tuple(cleaned))

    def mean(self) -> float:
        return math.fsum(w * r for w, r in self.terms)

    def variance(self) -> float:
        return math.fsum(w * w * r for w, r in self.terms)

    def mgf(self, theta: float) -> float:
        return math.exp(
            math.fsum(r * (math.exp(w * theta) - 1.0) for w, r in self.terms)
        )

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["weight", "rate"])
            for w, r in self.terms:
                writer.writerow([w, f"{r:.17g}"])

    @classmethod
    def from_csv(cls, path) -> "PoissonSumRep":
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != ["weight", "rate"]:
                raise ValueError(f"unexpected header {header} in {path}")
            terms = tuple((int(row[0]), float(row[1])) for row in reader if row)
        return cls(terms=terms)


def _merge(raw_terms) -> tuple[tuple[int, float], ...]:
    rates: dict[int, float] = {}
    for weight, rate in raw_terms:
        rates[weight] = rates.get(weight, 0.0) + rate
    return tuple(sorted(rates.items()))


def rep_fixed_exponential(n: int, lam: float, mu: float) -> PoissonSumRep:
    """Fixed batches of n, exponential service: terms (j, lam/(j mu)) for j = 1..n."""
    if n < 1:
        raise DomainError(f"batch size must be >= 1, got {n}")
    if not (lam > 0.0 and mu > 0.0):
        raise DomainError("rates must be positive")
    terms = tuple((j, lam / (j * mu)) for j in range(1, n + 1))
    return PoissonSumRep(terms=terms)


def rep_fixed_general(n: int, lam: float, service: ServiceDist) -> PoissonSumRep:
    """Fixed batches of n, general service, built from mean order-statistic spacings.

    Term j has weight n - j + 1 and rate lam * E[S_(j) - S_(j-1)].
    """
    if n < 1:
        raise DomainError(f"batch size must be >= 1, got {n}")
    if not lam > 0.0:
        raise DomainError(f"arrival rate must be positive, got {lam}")
    gaps = service.order_stat_gap_means(n)
    terms = tuple((n - j + 1, lam * float(gaps[j - 1])) for j in range(1, n + 1))
    return PoissonSumRep(terms=terms)


def rep_random_general(batch: BatchDist, lam: float, service: ServiceDist,
                       tail_eps: float = 1e-12) -> PoissonSumRep:
    """Random batches, general service: superpose the fixed-batch construction
    over the batch pmf, weighting each rate by the batch probability.

    ``tail_eps`` bounds the batch mass that may be dropped; the finite-support
    laws in this package never need truncation, so the recorded tail mass is
    zero.
    """
    if not lam > 0.0:
        raise DomainError(f"arrival rate must be positive, got {lam}")
    if not 0.0 < tail_eps < 1.0:
        raise DomainError(f"tail tolerance must be in (0, 1), got {tail_eps}")
    sizes, probs = batch.pmf_arrays()
    raw = []
    for size, prob in zip(sizes, probs):
        n = int(size)
        if n == 0 or prob == 0.0:
            continue
        gaps = service.order_stat_gap_means(n)
        for j in range(1, n + 1):
            raw.append((n - j + 1, lam * prob * float(gaps[j - 1])))
    return PoissonSumRep(terms=_merge(raw), truncation_tail_mass=0.0)


def rep_random_markov(batch: BatchDist, lam: float, mu: float) -> PoissonSumRep:
    """Random batches, exponential service: term j has rate lam P(N >= j)/(j mu)."""
    if not (lam > 0.0 and mu > 0.0):
        raise DomainError("rates must be positive")
    top = batch.max_size()
    terms = tuple((j, lam * batch.ccdf(j) / (j * mu)) for j in range(1, top + 1))
    return PoissonSumRep(terms=terms)


def rep_sample(rep: PoissonSumRep, seed: int, count: int) -> np.ndarray:
    """Draw iid samples of the represented distribution, one Poisson draw per term."""
    if count < 1:
        raise ValueError(f"sample count must be >= 1, got {count}")
    rng = np.random.default_rng(seed)
    out = np.zeros(count, dtype=np.int64)
    for weight, rate in rep.terms:
        if rate > 0.0:
            out += weight * rng.poisson(rate, count)
    return out


def scaled_limit_sample(n: int, lam: float, mu: float, seed: int, count: int) -> np.ndarray:
    """Sample sum_{j=1..n} (j/n) Poisson(lam/(j mu)), the scaled steady queue.

    Sampling proceeds through the equivalent marked-Poisson form: a total
    event count with rate (lam/mu) H_n, and an independent mark j for each
    event with P(j) proportional to 1/j.  This is Poisson splitting run in
    reverse and is exact, while staying fast for n in the thousands.
    """
    if n < 1:
        raise DomainError(f"batch size must be >= 1, got {n}")
    if not (lam > 0.0 and mu > 0.0):
        raise DomainError("rates must be positive")
    if count < 1:
        raise ValueError(f"sample count must be >= 1, got {count}")
    rng = np.random.default_rng(seed)
    rates = lam / (mu * np.arange(1, n + 1))
    total_rate = rates.sum()
    events = rng.poisson(total_rate, count)
    n_events = int(events.sum())
    marks = rng.choice(np.arange(1, n + 1), size=n_events, p=rates / total_rate)
    owner = np.repeat(np.arange(count), events)
    return np.bincount(owner, weights=marks / n, minlength=count)
