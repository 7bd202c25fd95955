"""Generational GA loop with elitism, self-adaptation and seeded replay.

Randomness layout
-----------------
For a run seeded with ``seed`` the root stream is ``RngStream(seed)``.  The
initial member in slot ``i`` draws its genes from ``root.split(("init", i))``.
When generation ``g`` breeds generation ``g + 1``, offspring slot ``i`` owns
``root.split((g, i))`` and its four sub-streams:

``"select"``  ``2k`` uniforms (tournament) or 2 (roulette): two parents
``"cross"``   3 uniforms: apply-crossover test, cut position, extrapolation ``r``
``"adapt"``   two uniforms per strategy entry (sigma entries, then ``q``)
``"mutate"``  three uniforms per gene: apply test, then two operator uniforms

Crossover logic for a mating reads the streams of its first slot.  Because
every draw is addressed by (slot, sub-stream, position), the result does not
depend on evaluation order or parallelism.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .adaptation import AdaptationPolicy, adapt_q_kernel, adapt_sigma_kernel
from .genome import GeneBounds, bounds_arrays
from .operators import (
    MutationParams,
    clamped_gaussian_kernel,
    direction_kernel,
    one_point_kernel,
    roulette_indices,
    tournament_indices,
    truncated_gaussian_kernel,
)
from .population import Individual, Population
from .stochastic import DomainError, RngStream, box_muller, q_box_muller, split_keys, uniform_block

__all__ = [
    "CSV_HEADER",
    "GaConfig",
    "GenerationStats",
    "ObjectiveError",
    "RunRecord",
    "evaluate",
    "evolve",
    "initial_population",
    "step",
]

SELECTIONS = ("tournament", "roulette")
CROSSOVERS = ("one_point", "direction_based", "none")
MUTATIONS = ("clamped", "truncated", "q_gaussian", "bit_flip", "boundary", "uniform")

CSV_HEADER = "generation,best,mean,median,worst,sigma_mean,q_mean,evaluations"

Objective = Callable[[np.ndarray], float]


class ObjectiveError(RuntimeError):
    """The objective returned a non-finite value."""


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 50
    max_generations: int = 100
    elitism_count: int = 1
    selection: str = "tournament"
    tournament_k: int = 3
    crossover: str = "one_point"
    crossover_rate: float = 0.9
    direction_r: Optional[float] = None
    mutation: str = "truncated"
    mutation_params: MutationParams = field(default_factory=MutationParams)
    sigma0: float = 0.1
    per_gene_sigma: bool = False
    q0: float = 1.0
    adaptation: AdaptationPolicy = field(default_factory=AdaptationPolicy)
    target_objective: Optional[float] = None
    seed: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        def need(cond: bool, msg: str) -> None:
            if not cond:
                raise DomainError(msg)

        need(self.population_size >= 2, "population_size must be at least 2")
        need(self.max_generations >= 0, "max_generations must be non-negative")
        need(0 <= self.elitism_count < self.population_size,
             "elitism_count must satisfy 0 <= elitism_count < population_size")
        need(self.selection in SELECTIONS, f"selection must be one of {SELECTIONS}")
        need(1 <= self.tournament_k <= self.population_size,
             "tournament_k must lie in [1, population_size]")
        need(self.crossover in CROSSOVERS, f"crossover must be one of {CROSSOVERS}")
        need(0.0 <= self.crossover_rate <= 1.0, "crossover_rate must lie in [0, 1]")
        need(self.direction_r is None or 0.0 < self.direction_r < 1.0,
             "direction_r must lie in (0, 1)")
        need(self.mutation in MUTATIONS, f"mutation must be one of {MUTATIONS}")
        need(self.mutation != "bit_flip" or self.crossover != "direction_based",
             "direction_based crossover needs real genomes")
        pol = self.adaptation
        need(pol.sigma_min <= self.sigma0 <= pol.sigma_max,
             "sigma0 must lie in [sigma_min, sigma_max]")
        need(1.0 <= self.q0 < 3.0, "q must satisfy 1 <= q < 3")
        need(0 <= self.seed < 2**64, "seed must be a 64-bit unsigned integer")
        if self.target_objective is not None:
            need(math.isfinite(self.target_objective), "target_objective must be finite")

    @property
    def binary(self) -> bool:
        return self.mutation == "bit_flip"

    @property
    def uses_q(self) -> bool:
        return self.mutation == "q_gaussian"


@dataclass(frozen=True)
class GenerationStats:
    generation: int
    best: float
    mean: float
    median: float
    worst: float
    sigma_mean: float
    q_mean: float
    evaluations: int

    def csv_row(self) -> str:
        fields = (self.best, self.mean, self.median, self.worst, self.sigma_mean, self.q_mean)
        return ",".join([str(self.generation), *(repr(float(v)) for v in fields), str(self.evaluations)])


@dataclass
class RunRecord:
    rows: list[GenerationStats]
    best_individual: Individual
    termination_reason: str

    @property
    def best(self) -> float:
        return self.best_individual.objective

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(CSV_HEADER + "\n")
        for row in self.rows:
            buf.write(row.csv_row() + "\n")
        return buf.getvalue()


# --------------------------------------------------------------------------
# evaluation and statistics
# --------------------------------------------------------------------------


def evaluate(objective: Objective, genes: np.ndarray, executor=None) -> np.ndarray:
    """Objective value of every row of ``genes``.

    Objectives flagged ``batched = True`` are called once on the whole
    matrix unless an ``executor`` (anything with ``map``) is supplied, in
    which case rows are evaluated through it.
    """
    genes = genes.view()
    genes.setflags(write=False)
    if executor is not None:
        values = list(executor.map(objective, list(genes)))
    elif getattr(objective, "batched", False):
        values = objective(genes)
    else:
        values = [objective(row) for row in genes]
    values = np.asarray(values, dtype=np.float64).reshape(genes.shape[0])
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        i = int(bad[0])
        raise ObjectiveError(
            f"objective returned {values[i]!r} for genome {genes[i].tolist()}"
        )
    return values


def _stats(pop: Population, evaluations: int) -> GenerationStats:
    f = pop.objective
    sigma_mean = float("nan") if pop.binary else float(np.mean(pop.sigma))
    q_mean = float("nan") if pop.q is None else float(np.mean(pop.q))
    return GenerationStats(
        pop.generation, float(f.min()), float(f.mean()), float(np.median(f)), float(f.max()),
        sigma_mean, q_mean, evaluations,
    )


# --------------------------------------------------------------------------
# initialization and one generation
# --------------------------------------------------------------------------


def _check_bounds(bounds: Sequence[GeneBounds], config: GaConfig) -> tuple[np.ndarray, np.ndarray]:
    if len(bounds) == 0:
        raise DomainError("bounds must not be empty")
    lower, upper = bounds_arrays(bounds)
    if config.binary and not (np.all(lower == 0) and np.all(upper == 1)):
        raise DomainError("bit_flip genomes require every gene bounded by (0, 1)")
    return lower, upper


def initial_population(
    config: GaConfig, objective: Objective, bounds: Sequence[GeneBounds], executor=None
) -> Population:
    lower, upper = _check_bounds(bounds, config)
    size, n = config.population_size, lower.size
    root = RngStream(config.seed).split("init")
    keys = split_keys(root.key, np.arange(size))
    u = uniform_block(keys, n)
    if config.binary:
        genes = (u < 0.5).astype(np.uint8)
    else:
        genes = np.clip(lower + u * (upper - lower), lower, upper)
    sigma = np.full((size, n if config.per_gene_sigma else 1), config.sigma0)
    q = np.full(size, config.q0) if config.uses_q else None
    objective_values = evaluate(objective, genes, executor)
    return Population(genes, sigma, objective_values, lower, upper, q, 0)


def _select(pop: Population, config: GaConfig, keys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    size = len(pop)
    if config.selection == "tournament":
        k = config.tournament_k
        u = uniform_block(split_keys(keys, "select"), 2 * k)
        entrants = np.minimum((u * size).astype(np.int64), size - 1)
        a = tournament_indices(pop.objective, entrants[:, :k])
        b = tournament_indices(pop.objective, entrants[:, k:])
    else:
        u = uniform_block(split_keys(keys, "select"), 2)
        a = roulette_indices(pop.objective, u[:, 0])
        b = roulette_indices(pop.objective, u[:, 1])
    return a, b


def _breed(pop: Population, config: GaConfig, keys: np.ndarray):
    """Offspring genes/strategies before adaptation and mutation (one row per slot)."""
    m, n = keys.size, pop.genes.shape[1]
    a, b = _select(pop, config, keys)
    cross = uniform_block(split_keys(keys, "cross"), 3)
    apply = cross[:, 0] < config.crossover_rate
    genes = pop.genes[a].copy()
    sigma = pop.sigma[a].copy()
    q = None if pop.q is None else pop.q[a].copy()

    if config.crossover == "one_point":
        cut = 1 + np.minimum((cross[:, 1] * (n - 1)).astype(np.int64), max(n - 2, 0))
        leads = np.arange(0, m - 1, 2)
        follow = leads + 1
        pa, pb = a[leads], b[leads]
        do = apply[leads]
        g1, g2 = one_point_kernel(pop.genes[pa], pop.genes[pb], cut[leads])
        genes[leads] = np.where(do[:, None], g1, pop.genes[pa])
        genes[follow] = np.where(do[:, None], g2, pop.genes[pb])
        if pop.sigma.shape[1] == n and n > 1:
            s1, s2 = one_point_kernel(pop.sigma[pa], pop.sigma[pb], cut[leads])
            sigma[leads] = np.where(do[:, None], s1, pop.sigma[pa])
            sigma[follow] = np.where(do[:, None], s2, pop.sigma[pb])
        else:
            sigma[leads] = pop.sigma[pa]
            sigma[follow] = pop.sigma[pb]
        if q is not None:
            q[leads] = pop.q[pa]
            q[follow] = pop.q[pb]
    elif config.crossover == "direction_based":
        fa, fb = pop.objective[a], pop.objective[b]
        a_better = (fa < fb) | ((fa == fb) & (a <= b))
        better = np.where(a_better, a, b)
        worse = np.where(a_better, b, a)
        r = cross[:, 2] if config.direction_r is None else np.full(m, config.direction_r)
        child = direction_kernel(pop.genes[better], pop.genes[worse], r[:, None], pop.lower, pop.upper)
        genes = np.where(apply[:, None], child, genes)
        sigma = np.where(apply[:, None], pop.sigma[better], sigma)
        if q is not None:
            q = np.where(apply, pop.q[better], q)
    return genes, sigma, q


def _adapt(sigma, q, config: GaConfig, keys: np.ndarray, n_genes: int):
    pol = config.adaptation
    ns = sigma.shape[1]
    u = uniform_block(split_keys(keys, "adapt"), 2 * (ns + 1))
    if config.mutation_params.sigma_override is None:
        z = box_muller(u[:, 0 : 2 * ns : 2], u[:, 1 : 2 * ns : 2])
        sigma = adapt_sigma_kernel(sigma, pol.resolved_tau(n_genes), pol.sigma_min, pol.sigma_max, z)
    if q is not None:
        zq = box_muller(u[:, 2 * ns], u[:, 2 * ns + 1])
        q = adapt_q_kernel(q, pol.q_step, pol.q_min, pol.q_max, zq)
    return sigma, q


def _mutate(genes, sigma, q, pop: Population, config: GaConfig, keys: np.ndarray):
    m, n = genes.shape
    u = uniform_block(split_keys(keys, "mutate"), 3 * n).reshape(m, n, 3)
    hit = u[..., 0] < config.mutation_params.rate
    kind = config.mutation
    if kind == "bit_flip":
        return np.where(hit, 1 - genes, genes).astype(np.uint8)

    lower = np.broadcast_to(pop.lower, genes.shape)
    upper = np.broadcast_to(pop.upper, genes.shape)
    override = config.mutation_params.sigma_override
    strength = np.broadcast_to(sigma if override is None else override, genes.shape)
    out = genes.copy()
    if not np.any(hit):
        return out
    x, lo, hi, s = genes[hit], lower[hit], upper[hit], strength[hit]
    u1, u2 = u[..., 1][hit], u[..., 2][hit]
    if kind == "truncated":
        new = truncated_gaussian_kernel(x, s, lo, hi, u1)
    elif kind == "clamped":
        new = clamped_gaussian_kernel(x, s, lo, hi, box_muller(u1, u2))
    elif kind == "q_gaussian":
        qg = np.broadcast_to(q[:, None], genes.shape)[hit]
        new = clamped_gaussian_kernel(x, s, lo, hi, q_box_muller(u1, u2, qg))
    elif kind == "boundary":
        new = np.where(u1 < 0.5, lo, hi)
    else:  # uniform replacement
        new = np.clip(lo + u1 * (hi - lo), lo, hi)
    out[hit] = new
    return np.clip(out, pop.lower, pop.upper)


def step(
    pop: Population, config: GaConfig, objective: Objective, rng: RngStream, executor=None
) -> Population:
    """Breed the next generation from an evaluated population.

    ``rng`` is the run's root stream; per-slot streams are split from it.
    Elites (best ``elitism_count`` by objective, ties by index) are copied
    unchanged into the first slots, keeping their cached objective.
    """
    if not pop.evaluated:
        raise DomainError("step requires an evaluated population")
    size, n = len(pop), pop.genes.shape[1]
    elite = pop.ranking()[: config.elitism_count]
    slots = np.arange(config.elitism_count, size)
    keys = split_keys(split_keys(rng.key, pop.generation), slots)

    genes, sigma, q = _breed(pop, config, keys)
    if not pop.binary:
        sigma, q = _adapt(sigma, q, config, keys, n)
    genes = _mutate(genes, sigma, q, pop, config, keys)
    child_objective = evaluate(objective, genes, executor)

    return Population(
        np.concatenate([pop.genes[elite], genes]),
        np.concatenate([pop.sigma[elite], sigma]),
        np.concatenate([pop.objective[elite], child_objective]),
        pop.lower,
        pop.upper,
        None if q is None else np.concatenate([pop.q[elite], q]),
        pop.generation + 1,
    )


def evolve(
    config: GaConfig, objective: Objective, bounds: Sequence[GeneBounds], executor=None
) -> RunRecord:
    """Run the GA from a seeded random population until a stopping rule fires.

    Stops after ``max_generations`` steps or as soon as the best objective is
    at or below ``target_objective``.  Every generation, including the
    initial one, contributes a row to the returned record.
    """
    config.validate()
    rng = RngStream(config.seed)
    pop = initial_population(config, objective, bounds, executor)
    evaluations = len(pop)
    rows = [_stats(pop, evaluations)]
    best_i = int(pop.ranking()[0])
    best = pop.member(best_i)
    reason = "max_generations"
    while True:
        if config.target_objective is not None and best.objective <= config.target_objective:
            reason = "target_reached"
            break
        if pop.generation >= config.max_generations:
            break
        pop = step(pop, config, objective, rng, executor)
        evaluations += len(pop) - config.elitism_count
        rows.append(_stats(pop, evaluations))
        i = int(pop.ranking()[0])
        if pop.objective[i] < best.objective:
            best = pop.member(i)
    return RunRecord(rows, best, reason)
