"""Chromosome representations: bounded real vectors and fixed-length bit strings."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .stochastic import DomainError, QShape, RngStream

__all__ = [
    "BinaryGenome",
    "GeneBounds",
    "RealGenome",
    "bounds_arrays",
    "clamp_to_bounds",
    "random_binary_genome",
    "random_real_genome",
]


@dataclass(frozen=True)
class GeneBounds:
    """Closed feasible range ``[a, b]`` of one gene."""

    a: float
    b: float

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b)):
            raise DomainError(f"gene bounds must be finite, got ({self.a}, {self.b})")
        if self.a > self.b:
            raise DomainError(f"lower bound {self.a} exceeds upper bound {self.b}")

    @property
    def width(self) -> float:
        return self.b - self.a


def bounds_arrays(bounds: Sequence[GeneBounds]) -> tuple[np.ndarray, np.ndarray]:
    """Lower and upper bound vectors."""
    lower = np.array([g.a for g in bounds], dtype=np.float64)
    upper = np.array([g.b for g in bounds], dtype=np.float64)
    return lower, upper


def _frozen(values, dtype=np.float64) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


class RealGenome:
    """Bounded real vector carrying its own strategy parameters.

    ``sigma`` is either one shared mutation strength or one per gene.  ``q``
    is the q-Gaussian shape, present only when that mutation is in use.
    Instances are immutable; operators build new genomes.  Construction
    rejects out-of-range values unless ``check_bounds=False``, which exists
    only to represent a pre-projection state for :func:`clamp_to_bounds`.
    """

    __slots__ = ("values", "bounds", "sigma", "q")

    def __init__(
        self,
        values: Sequence[float],
        bounds: Sequence[GeneBounds],
        sigma: Sequence[float] | float = (0.1,),
        q: Optional[float] = None,
        *,
        check_bounds: bool = True,
    ):
        values = _frozen(values)
        bounds = tuple(bounds)
        sigma = _frozen(np.atleast_1d(sigma))
        if values.ndim != 1 or values.size == 0:
            raise DomainError("a real genome needs at least one gene")
        if len(bounds) != values.size:
            raise DomainError(f"{values.size} genes but {len(bounds)} bounds")
        if sigma.size not in (1, values.size):
            raise DomainError(f"sigma must have length 1 or {values.size}, got {sigma.size}")
        if not np.all(sigma > 0):
            raise DomainError("mutation strengths must be strictly positive")
        lower, upper = bounds_arrays(bounds)
        if check_bounds and not np.all((lower <= values) & (values <= upper)):
            raise DomainError(f"genome {values.tolist()} violates its bounds")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "bounds", bounds)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "q", None if q is None else QShape(q).q)

    def __setattr__(self, name, value):
        raise AttributeError("RealGenome is immutable")

    def __len__(self) -> int:
        return self.values.size

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RealGenome):
            return NotImplemented
        return (
            self.bounds == other.bounds
            and np.array_equal(self.values, other.values)
            and np.array_equal(self.sigma, other.sigma)
            and self.q == other.q
        )

    def __repr__(self) -> str:
        return f"RealGenome(values={self.values.tolist()}, sigma={self.sigma.tolist()}, q={self.q})"

    @property
    def lower(self) -> np.ndarray:
        return bounds_arrays(self.bounds)[0]

    @property
    def upper(self) -> np.ndarray:
        return bounds_arrays(self.bounds)[1]

    def gene_sigma(self) -> np.ndarray:
        """Mutation strength for every gene (broadcasting a shared value)."""
        return np.broadcast_to(self.sigma, self.values.shape).copy()

    def replace(self, *, values=None, sigma=None, q=...) -> "RealGenome":
        return RealGenome(
            self.values if values is None else values,
            self.bounds,
            self.sigma if sigma is None else sigma,
            self.q if q is ... else q,
        )


class BinaryGenome:
    """Fixed-length bit string."""

    __slots__ = ("bits",)

    def __init__(self, bits):
        if isinstance(bits, str):
            bits = [int(c) for c in bits]
        arr = np.array(bits, dtype=np.uint8)
        if arr.ndim != 1 or arr.size == 0:
            raise DomainError("a binary genome needs at least one bit")
        if not np.all(arr <= 1):
            raise DomainError("bits must be 0 or 1")
        arr.setflags(write=False)
        object.__setattr__(self, "bits", arr)

    def __setattr__(self, name, value):
        raise AttributeError("BinaryGenome is immutable")

    def __len__(self) -> int:
        return self.bits.size

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BinaryGenome):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)

    def __str__(self) -> str:
        return "".join(str(b) for b in self.bits)

    def __repr__(self) -> str:
        return f"BinaryGenome({str(self)!r})"


def random_real_genome(
    rng: RngStream,
    bounds: Sequence[GeneBounds],
    sigma0: float,
    *,
    per_gene_sigma: bool = False,
    q: Optional[float] = None,
) -> RealGenome:
    """Uniform random genome inside ``bounds``; one uniform per gene."""
    bounds = tuple(bounds)
    if not bounds:
        raise DomainError("bounds must not be empty")
    lower, upper = bounds_arrays(bounds)
    u = rng.uniforms(len(bounds))
    values = np.clip(lower + u * (upper - lower), lower, upper)
    sigma = np.full(len(bounds) if per_gene_sigma else 1, float(sigma0))
    return RealGenome(values, bounds, sigma, q)


def clamp_to_bounds(g: RealGenome) -> RealGenome:
    return g.replace(values=np.clip(g.values, g.lower, g.upper))


def random_binary_genome(rng: RngStream, length: int) -> BinaryGenome:
    if length < 1:
        raise DomainError("binary genome length must be positive")
    return BinaryGenome((rng.uniforms(length) < 0.5).astype(np.uint8))
