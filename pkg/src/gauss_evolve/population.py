"""Individuals and populations.

A :class:`Population` stores its members column-wise in numpy arrays so the
engine can vary a whole generation at once; :meth:`Population.member`
materializes a single :class:`Individual` with an immutable genome.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .genome import BinaryGenome, GeneBounds, RealGenome, bounds_arrays
from .stochastic import DomainError

Genome = Union[RealGenome, BinaryGenome]


@dataclass(frozen=True)
class Individual:
    genome: Genome
    objective: float = float("nan")
    evaluated: bool = False

    def __post_init__(self):
        if self.evaluated and not np.isfinite(self.objective):
            raise DomainError(f"evaluated individual has non-finite objective {self.objective}")


@dataclass
class Population:
    """Ordered generation of individuals.

    ``genes`` is ``(size, length)``: float64 for real genomes, uint8 for bit
    strings.  ``sigma`` is ``(size, 1)`` or ``(size, length)``; ``q`` is
    ``None`` unless q-Gaussian mutation is in use.  Member order matters:
    selection ties go to the lowest index.
    """

    genes: np.ndarray
    sigma: np.ndarray
    objective: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    q: Optional[np.ndarray] = None
    generation: int = 0

    def __post_init__(self):
        if self.genes.ndim != 2 or self.genes.shape[0] == 0:
            raise DomainError("population must be a non-empty 2-D gene matrix")

    def __len__(self) -> int:
        return self.genes.shape[0]

    @property
    def binary(self) -> bool:
        return self.genes.dtype == np.uint8

    @property
    def evaluated(self) -> bool:
        return bool(np.all(np.isfinite(self.objective)))

    @property
    def bounds(self) -> tuple[GeneBounds, ...]:
        return tuple(GeneBounds(float(a), float(b)) for a, b in zip(self.lower, self.upper))

    def member(self, i: int) -> Individual:
        obj = float(self.objective[i])
        if self.binary:
            genome: Genome = BinaryGenome(self.genes[i])
        else:
            q = None if self.q is None else float(self.q[i])
            genome = RealGenome(self.genes[i], self.bounds, self.sigma[i], q)
        return Individual(genome, obj, bool(np.isfinite(obj)))

    @property
    def members(self) -> list[Individual]:
        return [self.member(i) for i in range(len(self))]

    def ranking(self) -> np.ndarray:
        """Member indices from best to worst, ties by lowest index."""
        return np.argsort(self.objective, kind="stable")

    def copy(self) -> "Population":
        return Population(
            self.genes.copy(),
            self.sigma.copy(),
            self.objective.copy(),
            self.lower.copy(),
            self.upper.copy(),
            None if self.q is None else self.q.copy(),
            self.generation,
        )

    def identical(self, other: "Population") -> bool:
        """Bit-for-bit equality of every stored array."""
        same_q = (self.q is None and other.q is None) or (
            self.q is not None and other.q is not None and np.array_equal(self.q, other.q)
        )
        return (
            self.generation == other.generation
            and same_q
            and all(
                a.dtype == b.dtype and a.shape == b.shape and a.tobytes() == b.tobytes()
                for a, b in (
                    (self.genes, other.genes),
                    (self.sigma, other.sigma),
                    (self.objective, other.objective),
                )
            )
        )

    @classmethod
    def from_individuals(cls, members: Sequence[Individual], generation: int = 0) -> "Population":
        if not members:
            raise DomainError("population must not be empty")
        first = members[0].genome
        objective = np.array([m.objective for m in members], dtype=np.float64)
        if isinstance(first, BinaryGenome):
            genes = np.array([m.genome.bits for m in members], dtype=np.uint8)
            n = genes.shape[1]
            return cls(genes, np.ones((len(members), 1)), objective,
                       np.zeros(n), np.ones(n), None, generation)
        lower, upper = bounds_arrays(first.bounds)
        for m in members:
            if m.genome.bounds != first.bounds:
                raise DomainError("all members must share the same bounds")
        genes = np.array([m.genome.values for m in members])
        sigma = np.array([m.genome.sigma for m in members])
        q = None if first.q is None else np.array([m.genome.q for m in members], dtype=np.float64)
        return cls(genes, sigma, objective, lower, upper, q, generation)
