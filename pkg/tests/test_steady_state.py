"""Poisson-sum steady-state representations: the four constructions, their
mutual consistency, sampling, and CSV round trips."""

import math

import numpy as np
import pytest

from batchq.analytic import (
    cumulant_scaled,
    mean_var_random,
    steady_mgf_fixed,
    steady_pmf_fixed_markov,
)
from batchq.model import (
    DeterministicService,
    EmpiricalBatch,
    ExponentialService,
    FixedBatch,
    QueueSpec,
    RatePattern,
    UniformService,
)
from batchq.steady_state import (
    PoissonSumRep,
    rep_fixed_exponential,
    rep_fixed_general,
    rep_random_general,
    rep_random_markov,
    rep_sample,
    scaled_limit_sample,
)

BASE_SEED = 515000


def _nonzero(rep):
    return tuple((w, r) for w, r in rep.terms if r > 0.0)


# ----------------------------------------------------------- constructions

def test_fixed_exponential_terms():
    assert rep_fixed_exponential(1, 1.0, 1.0).terms == ((1, 1.0),)
    assert rep_fixed_exponential(2, 1.0, 1.0).terms == ((1, 1.0), (2, 0.5))


def test_fixed_exponential_mean_telescopes():
    rep = rep_fixed_exponential(3, 2.0, 1.0)
    assert math.isclose(rep.mean(), 6.0, rel_tol=1e-12)


def test_fixed_general_deterministic_collapses():
    # Every batch member departs together: n * Pois(lam d), nothing else.
    rep = rep_fixed_general(4, 1.5, DeterministicService(2.0))
    assert _nonzero(rep) == ((4, 3.0),)


def test_fixed_general_exponential_term_values():
    rep = rep_fixed_general(3, 1.0, ExponentialService(1.0))
    want = ((3, 1.0 / 3.0), (2, 0.5), (1, 1.0))
    for (w, r), (ww, wr) in zip(sorted(rep.terms), sorted(want)):
        assert w == ww and math.isclose(r, wr, rel_tol=1e-12)


def test_fixed_general_uniform_gaps():
    rep = rep_fixed_general(3, 1.0, UniformService(1.0))
    for w, r in rep.terms:
        assert math.isclose(r, 0.25, rel_tol=1e-12)
    assert sorted(w for w, _ in rep.terms) == [1, 2, 3]


def test_fixed_general_matches_fixed_exponential_in_mgf():
    thetas = np.linspace(-2.0, 0.5, 26)
    for n in range(1, 9):
        a = rep_fixed_general(n, 1.0, ExponentialService(1.0))
        b = rep_fixed_exponential(n, 1.0, 1.0)
        for th in thetas:
            assert abs(a.mgf(float(th)) - b.mgf(float(th))) < 1e-10


def test_random_constructions_merge_to_same_terms():
    batch = EmpiricalBatch(((1, 0.5), (2, 0.5)))
    a = rep_random_general(batch, 1.0, ExponentialService(1.0))
    b = rep_random_markov(batch, 1.0, 1.0)
    assert sorted(_nonzero(a)) == [(1, 1.0), (2, 0.25)]
    for (wa, ra), (wb, rb) in zip(sorted(_nonzero(a)), sorted(_nonzero(b))):
        assert wa == wb and math.isclose(ra, rb, rel_tol=1e-12)


def test_random_general_fixed_batch_reduces():
    batch = FixedBatch(3)
    a = rep_random_general(batch, 1.0, UniformService(2.0))
    b = rep_fixed_general(3, 1.0, UniformService(2.0))
    for (wa, ra), (wb, rb) in zip(sorted(a.terms), sorted(b.terms)):
        assert wa == wb and math.isclose(ra, rb, rel_tol=1e-12)


def test_random_markov_ccdf_rates():
    batch = EmpiricalBatch(((2, 1.0),))
    rep = rep_random_markov(batch, 1.0, 1.0)
    assert sorted(rep.terms) == [(1, 1.0), (2, 0.5)]


def test_random_markov_mgf_matches_random_general():
    batch = EmpiricalBatch(((1, 0.3), (3, 0.5), (4, 0.2)))
    a = rep_random_general(batch, 1.2, ExponentialService(0.8))
    b = rep_random_markov(batch, 1.2, 0.8)
    for th in np.linspace(-2.0, 0.5, 21):
        assert abs(a.mgf(float(th)) - b.mgf(float(th))) < 1e-10


def test_rep_mean_factorizes_for_all_constructions():
    # Mean = lam * E[N] * E[S] however the representation was built.
    lam = 1.3
    batch = EmpiricalBatch(((1, 0.25), (2, 0.5), (5, 0.25)))
    mean_n, _ = batch.moments()
    cases = [
        (rep_fixed_exponential(3, lam, 0.7), 3.0 / 0.7),
        (rep_fixed_general(3, lam, UniformService(2.0)), 3.0 * 1.0),
        (rep_random_general(batch, lam, ExponentialService(0.7)),
         mean_n / 0.7),
        (rep_random_markov(batch, lam, 0.7), mean_n / 0.7),
    ]
    for rep, per_lam in cases:
        assert math.isclose(rep.mean(), lam * per_lam, rel_tol=1e-9)


def test_rep_moments_match_closed_forms():
    rep = rep_fixed_exponential(2, 1.0, 1.0)
    assert math.isclose(rep.mean(), 2.0, rel_tol=1e-12)
    assert math.isclose(rep.variance(), 3.0, rel_tol=1e-12)
    spec = QueueSpec(RatePattern(1.0), EmpiricalBatch(((1, 0.5), (2, 0.5))),
                     ExponentialService(1.0), 0)
    rep2 = rep_random_markov(spec.batch, 1.0, 1.0)
    mv = mean_var_random(spec, math.inf)
    assert math.isclose(rep2.mean(), mv.mean, rel_tol=1e-12)
    assert math.isclose(rep2.variance(), mv.variance, rel_tol=1e-12)


def test_rep_mgf_matches_steady_closed_form():
    spec = QueueSpec(RatePattern(1.0), FixedBatch(4), ExponentialService(1.0), 0)
    rep = rep_fixed_exponential(4, 1.0, 1.0)
    for th in (-1.0, -0.25, 0.3):
        assert math.isclose(rep.mgf(th), steady_mgf_fixed(spec, th),
                            rel_tol=1e-12)


def test_rep_validation():
    with pytest.raises(ValueError):
        PoissonSumRep(terms=((0, 1.0),))
    with pytest.raises(ValueError):
        PoissonSumRep(terms=((1, -0.5),))
    with pytest.raises(ValueError):
        rep_random_general(FixedBatch(2), 1.0, ExponentialService(1.0),
                           tail_eps=0.0)


# ---------------------------------------------------------------- sampling

def test_rep_sample_zero_rate_is_zero():
    rep = PoissonSumRep(terms=((1, 0.0),))
    draws = rep_sample(rep, BASE_SEED, 1000)
    assert np.all(draws == 0)


def test_rep_sample_moments():
    rep = rep_fixed_exponential(2, 1.0, 1.0)
    draws = rep_sample(rep, BASE_SEED + 1, 1_000_000)
    se_mean = math.sqrt(rep.variance() / draws.size)
    assert abs(float(np.mean(draws)) - 2.0) < 3.0 * se_mean
    assert abs(float(np.var(draws)) - 3.0) < 0.02 * 3.0


def test_rep_sample_deterministic_per_seed():
    rep = rep_fixed_exponential(3, 1.0, 1.0)
    a = rep_sample(rep, BASE_SEED + 2, 500)
    b = rep_sample(rep, BASE_SEED + 2, 500)
    assert np.array_equal(a, b)
    c = rep_sample(rep, BASE_SEED + 3, 500)
    assert not np.array_equal(a, c)


def test_rep_sample_histogram_near_recursion():
    # TV distance against the recursion PMF; generous cap for a unit test,
    # the acceptance suite tightens this.
    n, lam, mu = 4, 3.0, 1.0
    draws = rep_sample(rep_fixed_exponential(n, lam, mu), BASE_SEED + 4,
                       1_000_000)
    j_max = max(120, int(draws.max()) + 1)
    pmf = steady_pmf_fixed_markov(n, lam, mu, j_max)
    hist = np.bincount(draws, minlength=j_max + 1) / draws.size
    tv = 0.5 * float(np.sum(np.abs(hist[: j_max + 1] - pmf)))
    assert tv < 0.005


def test_scaled_limit_sample_n1_is_poisson():
    draws = scaled_limit_sample(1, 1.0, 1.0, BASE_SEED + 5, 200_000)
    assert np.allclose(draws, np.round(draws))
    assert abs(float(np.mean(draws)) - 1.0) < 0.01


def test_scaled_limit_sample_matches_cumulants():
    n, count = 400, 200_000
    draws = scaled_limit_sample(n, 1.0, 1.0, BASE_SEED + 6, count)
    k1 = cumulant_scaled(1, n, 1.0, 1.0)
    k2 = cumulant_scaled(2, n, 1.0, 1.0)
    se_mean = math.sqrt(k2 / count)
    assert abs(float(np.mean(draws)) - k1) < 4.0 * se_mean
    assert abs(float(np.var(draws)) - k2) < 4.0 * k2 * math.sqrt(2.0 / count)


def test_truncation_tail_mass_default_zero():
    rep = rep_random_general(EmpiricalBatch(((1, 0.5), (2, 0.5))), 1.0,
                             ExponentialService(1.0))
    assert rep.truncation_tail_mass == 0.0


# --------------------------------------------------------------------- csv

def test_rep_csv_roundtrip(tmp_path):
    rep = rep_fixed_general(3, 1.7, UniformService(2.0))
    path = tmp_path / "rep.csv"
    rep.to_csv(path)
    text = path.read_text(encoding="utf-8")
    assert text.splitlines()[0] == "weight,rate"
    back = PoissonSumRep.from_csv(path)
    assert back.terms == rep.terms


def test_rep_csv_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n1,2\n", encoding="utf-8")
    with pytest.raises(ValueError):
        PoissonSumRep.from_csv(path)
