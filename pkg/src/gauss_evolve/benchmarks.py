"""Objective functions (all minimized).

Every function accepts a single vector or a ``(members, n)`` matrix and
reduces over the last axis, so the engine can evaluate a whole population
in one call.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .genome import GeneBounds

__all__ = [
    "BENCHMARKS",
    "Benchmark",
    "LJ_MINIMA",
    "LJ_PENALTY",
    "ackley",
    "benchmark_bounds",
    "get_benchmark",
    "lj_energy",
    "rastrigin",
    "rosenbrock",
    "sphere",
]

LJ_PENALTY = 1e12
_MIN_SEPARATION = 1e-9


def batched(fn: Callable) -> Callable:
    fn.batched = True
    return fn


def _result(out):
    return float(out) if np.ndim(out) == 0 else out


@batched
def sphere(x):
    x = np.asarray(x, dtype=np.float64)
    return _result(np.sum(x * x, axis=-1))


@batched
def rastrigin(x):
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[-1]
    return _result(10.0 * n + np.sum(x * x - 10.0 * np.cos(2.0 * np.pi * x), axis=-1))


@batched
def rosenbrock(x):
    x = np.asarray(x, dtype=np.float64)
    head, tail = x[..., :-1], x[..., 1:]
    return _result(np.sum(100.0 * (tail - head * head) ** 2 + (1.0 - head) ** 2, axis=-1))


@batched
def ackley(x):
    x = np.asarray(x, dtype=np.float64)
    rms = np.sqrt(np.mean(x * x, axis=-1))
    cos_mean = np.mean(np.cos(2.0 * np.pi * x), axis=-1)
    return _result(-20.0 * np.exp(-0.2 * rms) - np.exp(cos_mean) + 20.0 + np.e)


@batched
def lj_energy(x):
    """Lennard-Jones cluster energy in reduced units.

    ``x`` holds flattened 3-D coordinates (length ``3N``, ``N >= 2``).  The
    energy is ``sum_{i<j} 4 (r^-12 - r^-6)``; configurations with any pair
    closer than 1e-9 score :data:`LJ_PENALTY` instead.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] % 3 or x.shape[-1] < 6:
        raise ValueError("cluster coordinates need length 3N with N >= 2")
    atoms = x.shape[-1] // 3
    pos = x.reshape(x.shape[:-1] + (atoms, 3))
    i, j = np.triu_indices(atoms, k=1)
    d = pos[..., i, :] - pos[..., j, :]
    r2 = np.sum(d * d, axis=-1)
    close = np.any(r2 < _MIN_SEPARATION**2, axis=-1)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        inv6 = 1.0 / (r2 * r2 * r2)
        energy = np.sum(4.0 * (inv6 * inv6 - inv6), axis=-1)
    return _result(np.where(close, LJ_PENALTY, energy))


@dataclass(frozen=True)
class Benchmark:
    name: str
    function: Callable
    lower: float
    upper: float
    minimum: float = 0.0

    def bounds(self, n_genes: int) -> list[GeneBounds]:
        return [GeneBounds(self.lower, self.upper)] * n_genes


BENCHMARKS = {
    "sphere": Benchmark("sphere", sphere, -5.12, 5.12),
    "rastrigin": Benchmark("rastrigin", rastrigin, -5.12, 5.12),
    "rosenbrock": Benchmark("rosenbrock", rosenbrock, -2.048, 2.048),
    "ackley": Benchmark("ackley", ackley, -32.768, 32.768),
    "lj": Benchmark("lj", lj_energy, -2.0, 2.0, minimum=float("nan")),
}

# Known global minima of small Lennard-Jones clusters (reduced units).
LJ_MINIMA = {2: -1.0, 3: -3.0, 4: -6.0}


def get_benchmark(name: str) -> Benchmark:
    try:
        return BENCHMARKS[name]
    except KeyError:
        raise KeyError(f"unknown benchmark {name!r}; choose from {sorted(BENCHMARKS)}") from None


def benchmark_bounds(name: str, n_genes: int) -> list[GeneBounds]:
    return get_benchmark(name).bounds(n_genes)
