"""Selection, crossover and mutation operators.

Each operator exists in two shapes: the per-gene / per-genome function that
takes an :class:`~gauss_evolve.stochastic.RngStream` (or explicit uniform),
and an array kernel (``*_kernel`` / ``*_indices``) that applies the same
formula to whole matrices of genes for the engine.  The per-gene functions
are thin wrappers around the kernels.

All objectives are minimized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, TypeVar

import numpy as np

from .genome import BinaryGenome, GeneBounds, RealGenome
from .population import Individual, Population
from .stochastic import DomainError, RngStream, box_muller, erf, erf_inv, q_box_muller

__all__ = [
    "MutationParams",
    "ROULETTE_EPSILON",
    "bit_flip_mutate",
    "boundary_mutate",
    "clamped_gaussian_kernel",
    "direction_based_crossover",
    "direction_kernel",
    "gaussian_mutate_clamped",
    "gaussian_mutate_truncated",
    "one_point_crossover",
    "one_point_kernel",
    "q_gaussian_mutate",
    "roulette_indices",
    "roulette_select",
    "tournament_indices",
    "tournament_select",
    "truncated_gaussian_kernel",
    "uniform_mutate",
]

ROULETTE_EPSILON = 0.01
_SQRT2 = math.sqrt(2.0)
_LOW_U = math.nextafter(-1.0, 0.0)
_HIGH_U = math.nextafter(1.0, 0.0)


@dataclass(frozen=True)
class MutationParams:
    """Per-gene mutation probability and an optional fixed mutation strength."""

    rate: float = 1.0
    sigma_override: Optional[float] = None

    def __post_init__(self):
        if not 0.0 <= self.rate <= 1.0:
            raise DomainError(f"mutation rate must lie in [0, 1], got {self.rate}")
        if self.sigma_override is not None and not self.sigma_override > 0:
            raise DomainError("sigma_override must be positive")


# --------------------------------------------------------------------------
# Gaussian mutation
# --------------------------------------------------------------------------


def clamped_gaussian_kernel(x, sigma, lower, upper, z):
    """``min(max(x + sigma*z, a), b)`` elementwise, ``z`` standard noise."""
    return np.minimum(np.maximum(x + sigma * z, lower), upper)


def truncated_gaussian_kernel(x, sigma, lower, upper, u):
    """Inverse-CDF draw of a normal truncated to ``[a, b]``.

    The normal is centred on ``x`` with standard deviation
    ``sigma * (b - a)`` (``sigma`` is range-relative).  With
    ``s = sqrt(2) * sigma * (b - a)`` the uniform ``u`` is mapped into
    ``(erf((a - x)/s), erf((b - x)/s))`` and the offspring is
    ``x + s * erf_inv(u')``.  Degenerate genes (``a == b``) return ``a``.
    """
    x, sigma, lower, upper, u = np.broadcast_arrays(
        *(np.asarray(v, dtype=np.float64) for v in (x, sigma, lower, upper, u))
    )
    width = upper - lower
    out = lower.copy()
    live = width > 0
    if np.any(live):
        xl, ll, ul = x[live], lower[live], upper[live]
        s = _SQRT2 * sigma[live] * width[live]
        e_lo = np.asarray(erf((ll - xl) / s))
        e_hi = np.asarray(erf((ul - xl) / s))
        u_prime = np.clip(e_lo + u[live] * (e_hi - e_lo), _LOW_U, _HIGH_U)
        out[live] = np.clip(xl + s * np.asarray(erf_inv(u_prime)), ll, ul)
    return out


def _check_sigma(sigma: float) -> None:
    if not sigma > 0:
        raise DomainError(f"mutation strength must be positive, got {sigma}")


def gaussian_mutate_clamped(x: float, sigma: float, bounds: GeneBounds, rng: RngStream) -> float:
    """Normal perturbation of ``x`` with absolute strength ``sigma``, clipped to the bounds.

    Consumes two uniforms (one Box-Muller normal).
    """
    _check_sigma(sigma)
    z = box_muller(rng.uniform(), rng.uniform())
    return float(clamped_gaussian_kernel(x, sigma, bounds.a, bounds.b, z))


def gaussian_mutate_truncated(x: float, sigma: float, bounds: GeneBounds, u: float) -> float:
    """Exact truncated-normal mutation driven by the uniform ``u`` in (0, 1)."""
    _check_sigma(sigma)
    if not 0.0 < u < 1.0:
        raise DomainError(f"uniform must lie in (0, 1), got {u}")
    if bounds.a == bounds.b:
        return float(bounds.a)
    return float(truncated_gaussian_kernel(x, sigma, bounds.a, bounds.b, u))


def q_gaussian_mutate(x: float, sigma: float, q: float, bounds: GeneBounds, rng: RngStream) -> float:
    """Clamped mutation with q-Gaussian instead of normal noise; two uniforms."""
    _check_sigma(sigma)
    z = q_box_muller(rng.uniform(), rng.uniform(), q)
    return float(clamped_gaussian_kernel(x, sigma, bounds.a, bounds.b, z))


# --------------------------------------------------------------------------
# other mutations
# --------------------------------------------------------------------------


def boundary_mutate(x: float, bounds: GeneBounds, rng: RngStream) -> float:
    """Replace the gene by one of its bounds, each with probability 1/2."""
    return float(bounds.a if rng.uniform() < 0.5 else bounds.b)


def uniform_mutate(x: float, bounds: GeneBounds, rng: RngStream) -> float:
    """Replace the gene by a uniform draw from its range."""
    u = rng.uniform()
    return float(min(max(bounds.a + u * (bounds.b - bounds.a), bounds.a), bounds.b))


def bit_flip_mutate(g: BinaryGenome, rate: float, rng: RngStream) -> BinaryGenome:
    if not 0.0 <= rate <= 1.0:
        raise DomainError(f"flip rate must lie in [0, 1], got {rate}")
    flips = rng.uniforms(len(g)) < rate
    return BinaryGenome(np.where(flips, 1 - g.bits, g.bits))


# --------------------------------------------------------------------------
# crossover
# --------------------------------------------------------------------------

G = TypeVar("G", RealGenome, BinaryGenome)


def one_point_kernel(p1: np.ndarray, p2: np.ndarray, cut) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise splice: columns before ``cut`` from the first parent."""
    cut = np.asarray(cut)
    head = np.arange(p1.shape[-1]) < cut[..., None]
    return np.where(head, p1, p2), np.where(head, p2, p1)


def one_point_crossover(p1: G, p2: G, cut: int) -> tuple[G, G]:
    """Swap parent suffixes after position ``cut`` (``0 <= cut <= len``).

    Real genomes splice per-gene mutation strengths along with the values;
    a shared strength (and ``q``) follows the parent that supplies the head.
    """
    if type(p1) is not type(p2):
        raise DomainError("cannot cross a real genome with a binary one")
    n = len(p1)
    if len(p2) != n:
        raise DomainError(f"parent lengths differ: {n} vs {len(p2)}")
    if not 0 <= cut <= n:
        raise DomainError(f"cut {cut} outside [0, {n}]")
    if isinstance(p1, BinaryGenome):
        c1, c2 = one_point_kernel(p1.bits, p2.bits, cut)
        return BinaryGenome(c1), BinaryGenome(c2)
    if p1.bounds != p2.bounds:
        raise DomainError("parents have different bounds")
    v1, v2 = one_point_kernel(p1.values, p2.values, cut)
    if p1.sigma.size == n and p2.sigma.size == n:
        s1, s2 = one_point_kernel(p1.sigma, p2.sigma, cut)
    elif p1.sigma.size == p2.sigma.size:
        s1, s2 = (p1.sigma, p2.sigma) if cut > 0 else (p2.sigma, p1.sigma)
    else:
        raise DomainError("parents disagree on sigma layout")
    q1, q2 = (p1.q, p2.q) if cut > 0 else (p2.q, p1.q)
    return RealGenome(v1, p1.bounds, s1, q1), RealGenome(v2, p1.bounds, s2, q2)


def direction_kernel(better, worse, r, lower, upper):
    return np.clip(better + r * (better - worse), lower, upper)


def direction_based_crossover(better: RealGenome, worse: RealGenome, r: float) -> RealGenome:
    """Extrapolate from ``better`` away from ``worse`` by ``r``, then clamp.

    The child inherits the strategy parameters of ``better``.
    """
    if better.bounds != worse.bounds or len(better) != len(worse):
        raise DomainError("parents have different bounds")
    values = direction_kernel(better.values, worse.values, r, better.lower, better.upper)
    return better.replace(values=values)


# --------------------------------------------------------------------------
# selection
# --------------------------------------------------------------------------


def tournament_indices(objective: np.ndarray, entrants: np.ndarray) -> np.ndarray:
    """Winner of each row of ``entrants`` (member indices), lowest objective first.

    Ties go to the lowest member index.
    """
    rank = np.empty(objective.size, dtype=np.int64)
    rank[np.argsort(objective, kind="stable")] = np.arange(objective.size)
    best = np.argmin(rank[entrants], axis=-1)
    return np.take_along_axis(entrants, best[..., None], axis=-1)[..., 0]


def roulette_weights(objective: np.ndarray) -> np.ndarray:
    f_max, f_min = objective.max(), objective.min()
    spread = f_max - f_min
    if spread == 0:
        return np.ones_like(objective)
    return (f_max - objective) + ROULETTE_EPSILON * spread


def roulette_indices(objective: np.ndarray, u) -> np.ndarray:
    """Fitness-proportional pick for each uniform in ``u``."""
    cum = np.cumsum(roulette_weights(objective))
    idx = np.searchsorted(cum, np.asarray(u) * cum[-1], side="right")
    return np.minimum(idx, objective.size - 1)


def _require_members(pop: Population) -> None:
    if len(pop) == 0:
        raise DomainError("cannot select from an empty population")


def tournament_select(pop: Population, k: int, rng: RngStream) -> Individual:
    """Best of ``k`` members drawn uniformly with replacement."""
    _require_members(pop)
    if not 1 <= k <= len(pop):
        raise DomainError(f"tournament size {k} outside [1, {len(pop)}]")
    entrants = np.array([rng.integer(len(pop)) for _ in range(k)])
    return pop.member(int(tournament_indices(pop.objective, entrants)))


def roulette_select(pop: Population, rng: RngStream) -> Individual:
    """Pick with probability proportional to ``(f_max - f) + 0.01 (f_max - f_min)``."""
    _require_members(pop)
    return pop.member(int(roulette_indices(pop.objective, rng.uniform())))
