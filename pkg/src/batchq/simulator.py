"""Discrete-event simulation oracle for the batch infinite-server queue.

There is no event calendar: with infinitely many servers an entity is just an
interval [arrival, arrival + service), so a replication generates all arrival
epochs by thinning a homogeneous Poisson stream against the l1 rate envelope,
attaches batches and service draws, and counts intervals covering each
snapshot time.

Draw order within one replication (fixed, part of the determinism contract):
initial service durations, candidate count, candidate epochs, thinning
uniforms, batch sizes, arrival service durations.  Replication r of a batch
run uses seed ``base_seed + r``.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SimConfigError
from .model import FixedBatch, QueueSpec


@dataclass(frozen=True)
class IdenticalRouting:
    """Entity i of every batch (in draw order) joins sub-queue i; fixed batches only."""


@dataclass(frozen=True)
class OrderStatRouting:
    """The i-th smallest service draw of each batch joins sub-queue i."""

    k: int


@dataclass(frozen=True)
class ModuloCapRouting:
    """Order-statistic routing for batches of size at most k; smaller batches
    leave the upper sub-queues untouched."""

    k: int


SubqueueMode = IdenticalRouting | OrderStatRouting | ModuloCapRouting | None


def _mode_k(mode: SubqueueMode, spec: QueueSpec) -> int:
    if isinstance(mode, IdenticalRouting):
        return spec.batch.n
    return mode.k


def _validate_run(spec: QueueSpec, horizon: float, snapshot_times,
                  subqueue_mode: SubqueueMode) -> tuple[float, ...]:
    if not (horizon > 0.0 and math.isfinite(horizon)):
        raise SimConfigError(f"horizon must be positive and finite, got {horizon}")
    times = tuple(float(t) for t in snapshot_times)
    if not times:
        raise SimConfigError("at least one snapshot time is required")
    for t in times:
        if not (0.0 <= t <= horizon) or not math.isfinite(t):
            raise SimConfigError(
                f"snapshot {t} outside [0, {horizon}]; steady-state values "
                "come from the analytic entry points, not infinite snapshots"
            )
    if subqueue_mode is not None:
        if spec.q0 != 0:
            raise SimConfigError(
                "sub-queue tracking starts from empty sub-queues; q0 must be 0"
            )
        if isinstance(subqueue_mode, IdenticalRouting):
            if not isinstance(spec.batch, FixedBatch):
                raise SimConfigError("identical routing requires a fixed batch size")
        elif isinstance(subqueue_mode, (OrderStatRouting, ModuloCapRouting)):
            if subqueue_mode.k < 1:
                raise SimConfigError(f"need at least one sub-queue, got {subqueue_mode.k}")
            if spec.batch.max_size() > subqueue_mode.k:
                raise SimConfigError(
                    f"batch sizes reach {spec.batch.max_size()} but only "
                    f"{subqueue_mode.k} sub-queues are routed"
                )
        else:
            raise SimConfigError(f"unknown sub-queue mode {subqueue_mode!r}")
    return times


@dataclass(frozen=True)
class SimConfig:
    """One batch of replications: system, horizon, snapshots, seeds, routing."""

    spec: QueueSpec
    horizon: float
    snapshot_times: tuple[float, ...]
    replications: int
    base_seed: int
    subqueue_mode: SubqueueMode = None

    def __post_init__(self) -> None:
        times = _validate_run(self.spec, self.horizon, self.snapshot_times,
                              self.subqueue_mode)
        object.__setattr__(self, "snapshot_times", times)
        object.__setattr__(self, "horizon", float(self.horizon))
        if self.replications < 1:
            raise SimConfigError(
                f"replication count must be >= 1, got {self.replications}"
            )


def _simulate_arrays(spec: QueueSpec, horizon: float, times: tuple[float, ...],
                     seed: int, mode: SubqueueMode) -> tuple[np.ndarray, np.ndarray | None]:
    rng = np.random.default_rng(seed)
    q0 = spec.q0
    init_dep = spec.service.sample(rng, q0) if q0 else None

    bound = spec.rate.bound()
    n_cand = rng.poisson(bound * horizon)
    epochs = rng.uniform(0.0, horizon, n_cand)
    epochs.sort()
    accept = rng.random(n_cand) * bound <= spec.rate.at(epochs)
    epochs = epochs[accept]
    batches = spec.batch.sample(rng, epochs.size)
    total = int(batches.sum())
    arr = np.repeat(epochs, batches)
    dep = arr + spec.service.sample(rng, total)

    counts = np.empty(len(times), dtype=np.int64)
    sub = None
    if mode is None:
        for s, t in enumerate(times):
            alive = np.count_nonzero((arr <= t) & (dep > t))
            if init_dep is not None:
                alive += np.count_nonzero(init_dep > t)
            counts[s] = alive
        return counts, None

    k = _mode_k(mode, spec)
    starts = np.repeat(np.cumsum(batches) - batches, batches)
    if isinstance(mode, IdenticalRouting):
        pos = np.arange(total) - starts
    else:
        # Rank service draws within each batch, ascending, ties by draw order.
        batch_idx = np.repeat(np.arange(epochs.size), batches)
        order = np.lexsort((np.arange(total), dep - arr, batch_idx))
        pos = np.empty(total, dtype=np.int64)
        pos[order] = np.arange(total) - starts
    sub = np.zeros((len(times), k), dtype=np.int64)
    for s, t in enumerate(times):
        alive = (arr <= t) & (dep > t)
        sub[s] = np.bincount(pos[alive], minlength=k)
        counts[s] = sub[s].sum()
    return counts, sub


def simulate_one(spec: QueueSpec, horizon: float, snapshot_times, seed: int,
                 subqueue_mode: SubqueueMode = None) -> list[tuple[float, int, np.ndarray | None]]:
    """Run a single replication; returns (time, count, subqueue_counts) per snapshot."""
    times = _validate_run(spec, horizon, snapshot_times, subqueue_mode)
    counts, sub = _simulate_arrays(spec, horizon, times, seed, subqueue_mode)
    return [
        (t, int(counts[s]), None if sub is None else sub[s].copy())
        for s, t in enumerate(times)
    ]


def _run_chunk(config: SimConfig, start: int, stop: int):
    nsnap = len(config.snapshot_times)
    counts = np.empty((stop - start, nsnap), dtype=np.int64)
    sub = None
    if config.subqueue_mode is not None:
        k = _mode_k(config.subqueue_mode, config.spec)
        sub = np.empty((stop - start, nsnap, k), dtype=np.int64)
    for r in range(start, stop):
        c, s = _simulate_arrays(config.spec, config.horizon, config.snapshot_times,
                                config.base_seed + r, config.subqueue_mode)
        counts[r - start] = c
        if sub is not None:
            sub[r - start] = s
    return counts, sub


def replication_counts(config: SimConfig, jobs: int = 1):
    """Counts for every replication: array (replications, snapshots), plus the
    (replications, snapshots, k) sub-queue array when routing is enabled.

    Replication r always uses seed base_seed + r, so the result is identical
    for any job count; parallel chunks are just reassembled in index order.
    """
    reps = config.replications
    if jobs <= 1 or reps < 2 * jobs:
        return _run_chunk(config, 0, reps)
    edges = np.linspace(0, reps, 4 * jobs + 1, dtype=int)
    spans = [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        parts = list(pool.map(_run_chunk, [config] * len(spans),
                              [a for a, _ in spans], [b for _, b in spans]))
    counts = np.concatenate([p[0] for p in parts])
    sub = None
    if config.subqueue_mode is not None:
        sub = np.concatenate([p[1] for p in parts])
    return counts, sub


@dataclass(frozen=True)
class RepSummary:
    """Cross-replication summary at each snapshot.

    With a single replication the variance and standard error are undefined
    and reported as nan.
    """

    times: tuple[float, ...]
    means: np.ndarray
    variances: np.ndarray
    standard_errors: np.ndarray
    count: int
    subqueue_means: np.ndarray | None = None
    pair_cov: np.ndarray | None = None
    pair_corr: np.ndarray | None = None

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "mean", "variance", "se", "count"])
            for s, t in enumerate(self.times):
                writer.writerow([
                    f"{t:.17g}", f"{self.means[s]:.17g}",
                    f"{self.variances[s]:.17g}", f"{self.standard_errors[s]:.17g}",
                    self.count,
                ])

    def pairs_to_csv(self, path) -> None:
        if self.pair_cov is None:
            raise ValueError("no sub-queue statistics were collected")
        k = self.pair_cov.shape[1]
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "i", "j", "cov", "corr"])
            for s, t in enumerate(self.times):
                for i in range(k):
                    for j in range(i + 1, k):
                        writer.writerow([
                            f"{t:.17g}", i + 1, j + 1,
                            f"{self.pair_cov[s, i, j]:.17g}",
                            f"{self.pair_corr[s, i, j]:.17g}",
                        ])


def replicate(config: SimConfig, jobs: int = 1) -> RepSummary:
    """Run all replications and summarize moments per snapshot."""
    counts, sub = replication_counts(config, jobs)
    reps = config.replications
    means = counts.mean(axis=0)
    if reps > 1:
        variances = counts.var(axis=0, ddof=1)
        ses = np.sqrt(variances / reps)
    else:
        variances = np.full(means.shape, np.nan)
        ses = np.full(means.shape, np.nan)
    sub_means = pair_cov = pair_corr = None
    if sub is not None:
        sub_means = sub.mean(axis=0)
        k = sub.shape[2]
        pair_cov = np.full((len(config.snapshot_times), k, k), np.nan)
        pair_corr = np.full((len(config.snapshot_times), k, k), np.nan)
        if reps > 1:
            for s in range(len(config.snapshot_times)):
                pair_cov[s] = np.cov(sub[:, s, :].T, ddof=1)
                with np.errstate(invalid="ignore"):
                    pair_corr[s] = np.corrcoef(sub[:, s, :].T)
    return RepSummary(
        times=config.snapshot_times, means=means, variances=variances,
        standard_errors=ses, count=reps, subqueue_means=sub_means,
        pair_cov=pair_cov, pair_corr=pair_corr,
    )


@dataclass(frozen=True)
class MgfEstimate:
    thetas: tuple[float, ...]
    times: tuple[float, ...]
    estimates: np.ndarray
    standard_errors: np.ndarray


def mgf_point_estimates(counts: np.ndarray, theta: float) -> tuple[np.ndarray, np.ndarray]:
    """Sample-mean estimates of E[exp(theta Q)] per snapshot column of
    ``counts``, with jackknife standard errors.

    theta above 1 is rejected: the exponential moments of batch queues blow
    up too fast there for a sample mean to be meaningful.
    """
    if theta > 1.0:
        raise DomainError(f"theta = {theta} rejected: estimates require theta <= 1")
    x = np.exp(theta * counts)
    reps = x.shape[0]
    est = x.mean(axis=0)
    if reps < 2:
        return est, np.full(est.shape, np.nan)
    # Leave-one-out means; for the sample mean the jackknife reduces to the
    # classical s/sqrt(n), computed here in its general form.
    loo = (x.sum(axis=0) - x) / (reps - 1)
    se = np.sqrt((reps - 1) / reps * ((loo - loo.mean(axis=0)) ** 2).sum(axis=0))
    return est, se


def transient_mgf_estimate(config: SimConfig, theta, jobs: int = 1) -> MgfEstimate:
    """Estimate E[exp(theta Q_t)] at each snapshot; theta may be scalar or a
    sequence and must not exceed 1."""
    thetas = tuple(float(v) for v in np.atleast_1d(theta))
    for v in thetas:
        if v > 1.0:
            raise DomainError(f"theta = {v} rejected: estimates require theta <= 1")
    counts, _ = replication_counts(config, jobs)
    nsnap = len(config.snapshot_times)
    estimates = np.empty((len(thetas), nsnap))
    ses = np.full((len(thetas), nsnap), np.nan)
    for a, v in enumerate(thetas):
        estimates[a], ses[a] = mgf_point_estimates(counts, v)
    return MgfEstimate(thetas=thetas, times=config.snapshot_times,
                       estimates=estimates, standard_errors=ses)
