"""Batch splitting probabilities that equalize sub-queue mean loads.

Each arriving batch is routed by service-duration order: with probability
phi_j the batch has size j and its i-th smallest draw goes to sub-queue i.
Choosing phi to equalize the k sub-queue means reduces to the linear system
(M + v v^T) phi = v with v all ones and M built from order-statistic means.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .model import EmpiricalBatch, QueueSpec, RatePattern, ServiceDist
from .simulator import ModuloCapRouting, SimConfig, replication_counts

_DEGENERATE_TOL = 1e-12
_SINGULAR_TOL = 1e-12
_FEASIBLE_SLACK = 1e-12


@dataclass(frozen=True)
class RoutingProblem:
    """k sub-queues, one shared service law, Poisson batch arrivals at rate lam."""

    k: int
    service: ServiceDist
    lam: float = 1.0

    def __post_init__(self) -> None:
        if self.k < 2:
            raise DomainError(f"routing needs at least 2 sub-queues, got {self.k}")
        if not self.lam > 0.0:
            raise DomainError(f"arrival rate must be positive, got {self.lam}")


def build_matrix(problem: RoutingProblem) -> np.ndarray:
    """Upper-triangular matrix M with M[i,j] = E[S_(i,j)] / (E[S_(k,k)] - E[S_(i,k)]).

    A vanishing denominator means the top order statistics of the service law
    are indistinguishable (deterministic service is the canonical case) and
    the equalization system is degenerate.
    """
    k = problem.k
    top_means = problem.service.order_stat_means(k)
    m = np.zeros((k - 1, k - 1))
    col_means = {j: problem.service.order_stat_means(j) for j in range(1, k)}
    for i in range(1, k):
        denom = float(top_means[k - 1] - top_means[i - 1])
        if denom <= _DEGENERATE_TOL:
            raise DomainError(
                f"service law degenerate for routing: E[S_({k},{k})] - "
                f"E[S_({i},{k})] = {denom}"
            )
        for j in range(i, k):
            m[i - 1, j - 1] = float(col_means[j][i - 1]) / denom
    return m


@dataclass(frozen=True)
class RoutingSolution:
    """Splitting probabilities phi_1..phi_{k-1} plus the closing phi_k."""

    phi: np.ndarray
    phi_k: float
    matrix_m: np.ndarray
    feasible: bool
    residual: float
    sherman_morrison: float

    def full_phi(self) -> np.ndarray:
        return np.append(self.phi, self.phi_k)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["i", "phi_i"])
            for i, value in enumerate(self.full_phi(), start=1):
                writer.writerow([i, f"{value:.17g}"])
            writer.writerow(["feasible", "true" if self.feasible else "false"])
            writer.writerow(["residual", f"{self.residual:.17g}"])
            writer.writerow(["sherman_morrison", f"{self.sherman_morrison:.17g}"])


def matrix_to_csv(m: np.ndarray, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["i"] + [f"j{j}" for j in range(1, m.shape[1] + 1)])
        for i in range(m.shape[0]):
            writer.writerow([i + 1] + [f"{v:.17g}" for v in m[i]])


def solve_phi(problem: RoutingProblem) -> RoutingSolution:
    """Solve (M + v v^T) phi = v by dense LU and close with phi_k = 1 - sum phi.

    Feasibility means every component of (phi, phi_k) lies in [0, 1]; the
    diagnostic 1 + v^T M^{-1} v from the Sherman-Morrison inversion is
    reported alongside.
    """
    m = build_matrix(problem)
    k = problem.k
    v = np.ones(k - 1)
    a = m + np.outer(v, v)
    det = abs(float(np.linalg.det(a)))
    scale = float(np.prod(np.linalg.norm(a, axis=1)))
    if not scale > 0.0 or det < _SINGULAR_TOL * scale:
        raise DomainError(
            f"equalization system is singular (|det| = {det}, scale = {scale})"
        )
    phi = np.linalg.solve(a, v)
    phi_k = 1.0 - float(phi.sum())
    residual = float(np.max(np.abs(a @ phi - v)))
    sherman = 1.0 + float(v @ np.linalg.solve(m, v))
    full = np.append(phi, phi_k)
    feasible = bool(np.all(full >= -_FEASIBLE_SLACK) and np.all(full <= 1.0 + _FEASIBLE_SLACK))
    return RoutingSolution(phi=phi, phi_k=phi_k, matrix_m=m, feasible=feasible,
                           residual=residual, sherman_morrison=sherman)


def subqueue_mean_loads(problem: RoutingProblem, solution: RoutingSolution) -> np.ndarray:
    """Analytic sub-queue means lam * sum_j phi_j E[S_(i,j)] under the solution.

    All k entries agree when the solution solves the equalization system.
    """
    k = problem.k
    full = solution.full_phi()
    means = np.zeros(k)
    per_j = {j: problem.service.order_stat_means(j) for j in range(1, k + 1)}
    for i in range(1, k + 1):
        total = 0.0
        for j in range(i, k + 1):
            total += full[j - 1] * float(per_j[j][i - 1])
        means[i - 1] = problem.lam * total
    return means


@dataclass(frozen=True)
class EqualizationReport:
    """Simulation check that the routed sub-queues share one mean and look Poisson."""

    skipped: bool
    replications: int
    analytic_means: np.ndarray | None = None
    sim_means: np.ndarray | None = None
    sim_variances: np.ndarray | None = None
    max_pairwise_z: float = math.nan
    dispersion_z: np.ndarray | None = None

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["i", "analytic_mean", "sim_mean", "sim_variance",
                            "dispersion_z"])
            if not self.skipped:
                for i in range(len(self.sim_means)):
                    writer.writerow([
                        i + 1,
                        f"{self.analytic_means[i]:.17g}",
                        f"{self.sim_means[i]:.17g}",
                        f"{self.sim_variances[i]:.17g}",
                        f"{self.dispersion_z[i]:.17g}",
                    ])
            writer.writerow(["skipped", "true" if self.skipped else "false"])
            writer.writerow(["max_pairwise_z", f"{self.max_pairwise_z:.17g}"])
            writer.writerow(["replications", self.replications])


def verify_equalization(problem: RoutingProblem, solution: RoutingSolution,
                        replications: int, base_seed: int = 0,
                        horizon: float | None = None, jobs: int = 1) -> EqualizationReport:
    """Simulate the routed system and score the equalization claim.

    Batches of size j arrive with probability phi_j and are split by service
    order over the first j sub-queues.  Reported are the largest pairwise
    z-score for equality of means (computed on per-replication differences)
    and a Poisson dispersion z-score per sub-queue.  Infeasible solutions are
    not simulated.
    """
    if not solution.feasible:
        return EqualizationReport(skipped=True, replications=0)
    k = problem.k
    full = np.clip(solution.full_phi(), 0.0, None)
    batch = EmpiricalBatch(tuple((i + 1, float(p)) for i, p in enumerate(full)))
    spec = QueueSpec(RatePattern(problem.lam), batch, problem.service, q0=0)
    if horizon is None:
        # Long enough that exponential memory has decayed and bounded service
        # laws are fully past their support.
        horizon = 25.0 * problem.service.mean()
    config = SimConfig(spec, horizon, (horizon,), replications=replications,
                       base_seed=base_seed, subqueue_mode=ModuloCapRouting(k))
    _, sub = replication_counts(config, jobs)
    counts = sub[:, 0, :].astype(float)
    sim_means = counts.mean(axis=0)
    sim_vars = counts.var(axis=0, ddof=1)
    max_z = 0.0
    for i in range(k):
        for j in range(i + 1, k):
            diff = counts[:, i] - counts[:, j]
            sd = diff.std(ddof=1)
            if sd == 0.0:
                z = 0.0 if abs(diff.mean()) == 0.0 else math.inf
            else:
                z = abs(diff.mean()) / (sd / math.sqrt(replications))
            max_z = max(max_z, z)
    dispersion = np.empty(k)
    for i in range(k):
        x = counts[:, i]
        u = (x - x.mean()) ** 2 - x
        se_u = u.std(ddof=1) / math.sqrt(replications)
        dispersion[i] = abs(sim_vars[i] - sim_means[i]) / se_u if se_u > 0 else 0.0
    return EqualizationReport(
        skipped=False, replications=replications,
        analytic_means=subqueue_mean_loads(problem, solution),
        sim_means=sim_means, sim_variances=sim_vars,
        max_pairwise_z=float(max_z), dispersion_z=dispersion,
    )
