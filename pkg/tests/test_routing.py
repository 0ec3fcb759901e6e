"""Load-equalizing batch splitting: the linear system, its closed-form
solutions for small k, feasibility bookkeeping, and the simulation check."""

import math

import numpy as np
import pytest

from batchq.errors import DomainError
from batchq.routing import (
    EqualizationReport,
    RoutingProblem,
    RoutingSolution,
    build_matrix,
    matrix_to_csv,
    solve_phi,
    subqueue_mean_loads,
    verify_equalization,
)
from batchq.model import (
    DeterministicService,
    EmpiricalService,
    ExponentialService,
    UniformService,
)

BASE_SEED = 761000


def test_matrix_k3_exponential():
    m = build_matrix(RoutingProblem(3, ExponentialService(1.0)))
    np.testing.assert_allclose(m, [[2.0 / 3.0, 1.0 / 3.0], [0.0, 1.5]],
                               rtol=1e-14)


def test_matrix_k2_exponential_is_identity_like():
    m = build_matrix(RoutingProblem(2, ExponentialService(1.0)))
    np.testing.assert_allclose(m, [[1.0]], rtol=1e-14)


def test_matrix_rate_independent():
    # M is a ratio of order-statistic means; the exponential rate cancels.
    a = build_matrix(RoutingProblem(4, ExponentialService(1.0)))
    b = build_matrix(RoutingProblem(4, ExponentialService(7.0)))
    np.testing.assert_allclose(a, b, rtol=1e-13)


def test_solve_k3_exponential():
    sol = solve_phi(RoutingProblem(3, ExponentialService(1.0)))
    np.testing.assert_allclose(sol.phi, [7.0 / 17.0, 4.0 / 17.0], atol=1e-12)
    assert abs(sol.phi_k - 6.0 / 17.0) < 1e-12
    assert sol.feasible
    assert sol.residual < 1e-10
    # 1 + v^T M^{-1} v, which also equals det(M + v v^T) / det(M)
    assert abs(sol.sherman_morrison - 17.0 / 6.0) < 1e-12
    np.testing.assert_allclose(sol.full_phi().sum(), 1.0, rtol=1e-13)


def test_solve_k2_exponential():
    sol = solve_phi(RoutingProblem(2, ExponentialService(2.5)))
    assert abs(sol.phi[0] - 0.5) < 1e-13
    assert abs(sol.phi_k - 0.5) < 1e-13
    assert abs(sol.sherman_morrison - 2.0) < 1e-13


def test_solve_k2_uniform():
    sol = solve_phi(RoutingProblem(2, UniformService(1.0)))
    assert abs(sol.phi[0] - 0.4) < 1e-13
    assert abs(sol.phi_k - 0.6) < 1e-13


def test_loads_equalized_analytically():
    for service in (ExponentialService(1.0), ExponentialService(0.5),
                    UniformService(2.0)):
        for k in (2, 3, 4, 5):
            problem = RoutingProblem(k, service, lam=1.3)
            sol = solve_phi(problem)
            loads = subqueue_mean_loads(problem, sol)
            assert np.ptp(loads) < 1e-10, (service, k)


def test_common_load_value_k3():
    problem = RoutingProblem(3, ExponentialService(1.0))
    loads = subqueue_mean_loads(problem, solve_phi(problem))
    np.testing.assert_allclose(loads, 11.0 / 17.0, rtol=1e-12)


def test_load_scales_with_rate():
    p1 = RoutingProblem(3, ExponentialService(1.0), lam=1.0)
    p2 = RoutingProblem(3, ExponentialService(1.0), lam=4.0)
    sol = solve_phi(p1)
    np.testing.assert_allclose(subqueue_mean_loads(p2, sol),
                               4.0 * subqueue_mean_loads(p1, sol), rtol=1e-13)


def test_deterministic_service_degenerate():
    with pytest.raises(DomainError):
        build_matrix(RoutingProblem(3, DeterministicService(2.0)))


def test_problem_validation():
    with pytest.raises(DomainError):
        RoutingProblem(1, ExponentialService(1.0))
    with pytest.raises(DomainError):
        RoutingProblem(3, ExponentialService(1.0), lam=0.0)


def test_empirical_service_solvable():
    rng = np.random.default_rng(BASE_SEED)
    service = EmpiricalService(tuple(rng.exponential(1.0, size=400)))
    sol = solve_phi(RoutingProblem(3, service))
    loads = subqueue_mean_loads(RoutingProblem(3, service), sol)
    assert np.ptp(loads) < 1e-10
    assert abs(sol.full_phi().sum() - 1.0) < 1e-12


def test_verify_equalization_statistics():
    problem = RoutingProblem(3, ExponentialService(1.0), lam=1.0)
    sol = solve_phi(problem)
    report = verify_equalization(problem, sol, replications=4000,
                                 base_seed=BASE_SEED + 1)
    assert not report.skipped
    assert report.replications == 4000
    np.testing.assert_allclose(report.analytic_means, 11.0 / 17.0, rtol=1e-12)
    assert report.max_pairwise_z < 4.0
    assert np.all(np.abs(report.dispersion_z) < 4.0)
    se = math.sqrt(11.0 / 17.0 / 4000)
    assert np.all(np.abs(report.sim_means - 11.0 / 17.0) < 5.0 * se)


def test_verify_skips_infeasible():
    problem = RoutingProblem(2, ExponentialService(1.0))
    bad = RoutingSolution(phi=np.array([1.4]), phi_k=-0.4,
                          matrix_m=np.array([[1.0]]), feasible=False,
                          residual=0.0, sherman_morrison=2.0)
    report = verify_equalization(problem, bad, replications=100)
    assert report.skipped
    assert report.replications == 0
    assert math.isnan(report.max_pairwise_z)


def test_solution_csv(tmp_path):
    sol = solve_phi(RoutingProblem(3, ExponentialService(1.0)))
    path = tmp_path / "phi.csv"
    sol.to_csv(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "i,phi_i"
    assert len(lines) == 7  # header, 3 phi rows, 3 diagnostics
    assert lines[4].startswith("feasible,true")
    got = float(lines[1].split(",")[1])
    assert abs(got - 7.0 / 17.0) < 1e-15


def test_matrix_csv(tmp_path):
    m = build_matrix(RoutingProblem(3, ExponentialService(1.0)))
    path = tmp_path / "m.csv"
    matrix_to_csv(m, path)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "i,j1,j2"
    assert len(lines) == 3


def test_report_csv(tmp_path):
    problem = RoutingProblem(2, ExponentialService(1.0))
    sol = solve_phi(problem)
    report = verify_equalization(problem, sol, replications=400,
                                 base_seed=BASE_SEED + 2)
    path = tmp_path / "verify.csv"
    report.to_csv(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "i,analytic_mean,sim_mean,sim_variance,dispersion_z"
    assert len(lines) == 6  # header, 2 sub-queue rows, 3 trailing diagnostics
    assert lines[3] == "skipped,false"


def test_skipped_report_csv(tmp_path):
    report = EqualizationReport(skipped=True, replications=0)
    path = tmp_path / "skip.csv"
    report.to_csv(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[1] == "skipped,true"
    assert len(lines) == 4
