"""Seeded evolutionary optimization with Gaussian, truncated-Gaussian and
q-Gaussian mutation, self-adaptive strategy parameters, classical GA
operators and a small benchmark suite."""

from .adaptation import AdaptationPolicy, adapt_q, adapt_sigma
from .benchmarks import BENCHMARKS, ackley, lj_energy, rastrigin, rosenbrock, sphere
from .engine import GaConfig, GenerationStats, ObjectiveError, RunRecord, evolve, step
from .genome import (
    BinaryGenome,
    GeneBounds,
    RealGenome,
    clamp_to_bounds,
    random_binary_genome,
    random_real_genome,
)
from .operators import (
    MutationParams,
    bit_flip_mutate,
    boundary_mutate,
    direction_based_crossover,
    gaussian_mutate_clamped,
    gaussian_mutate_truncated,
    one_point_crossover,
    q_gaussian_mutate,
    roulette_select,
    tournament_select,
    uniform_mutate,
)
from .population import Individual, Population
from .stochastic import (
    DomainError,
    QShape,
    RngStream,
    erf,
    erf_inv,
    erfc,
    sample_normal,
    sample_q_gaussian,
)

__version__ = "0.1.0"
