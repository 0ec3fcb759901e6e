"""Analytics and simulation for infinite-server queues with batch arrivals."""

__version__ = "0.1.0"

from .errors import DomainError, SimConfigError
from .model import (
    DeterministicService,
    DivisibleSumBatch,
    EmpiricalBatch,
    EmpiricalService,
    ExponentialService,
    FixedBatch,
    QueueSpec,
    RatePattern,
    UniformService,
    load_spec,
    save_spec,
    spec_from_dict,
    spec_to_dict,
)
from .analytic import (
    MomentPair,
    cumulant_scaled,
    cumulant_scaled_limit,
    diffusion_params,
    fluid_mgf,
    mean_var_fixed,
    mean_var_random,
    scaled_limit_mgf,
    scaled_steady_limit_mgf,
    scaled_steady_mgf_fixed,
    steady_mean_var_fixed,
    steady_mean_var_random,
    steady_mgf_fixed,
    steady_pmf_fixed_markov,
    subqueue_correlation,
    subqueue_covariance,
    transient_mgf_fixed,
)
from .steady_state import (
    PoissonSumRep,
    rep_fixed_exponential,
    rep_fixed_general,
    rep_random_general,
    rep_random_markov,
    rep_sample,
    scaled_limit_sample,
)
