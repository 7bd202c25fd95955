"""Self-adaptation of per-individual mutation strength and q-Gaussian shape."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .stochastic import DomainError, RngStream, box_muller

__all__ = ["AdaptationPolicy", "adapt_q", "adapt_q_kernel", "adapt_sigma", "adapt_sigma_kernel"]


@dataclass(frozen=True)
class AdaptationPolicy:
    """Learning rates and clamps for strategy parameters.

    ``tau=None`` means the log-normal default ``1/sqrt(2 n)`` for ``n`` genes,
    resolved by :meth:`resolved_tau`.
    """

    tau: Optional[float] = None
    sigma_min: float = 1e-6
    sigma_max: float = 1.0
    q_min: float = 1.0
    q_max: float = 2.5
    q_step: float = 0.05

    def __post_init__(self):
        if self.tau is not None and not self.tau >= 0:
            raise DomainError(f"tau must be non-negative, got {self.tau}")
        if not 0 < self.sigma_min < self.sigma_max:
            raise DomainError("need 0 < sigma_min < sigma_max")
        if not 1.0 <= self.q_min < self.q_max < 3.0:
            raise DomainError("need 1 <= q_min < q_max < 3")
        if not self.q_step >= 0:
            raise DomainError("q_step must be non-negative")

    def resolved_tau(self, n_genes: int) -> float:
        if self.tau is not None:
            return self.tau
        return 1.0 / math.sqrt(2.0 * n_genes)


def adapt_sigma_kernel(sigma, tau: float, sigma_min: float, sigma_max: float, z):
    return np.clip(sigma * np.exp(tau * z), sigma_min, sigma_max)


def adapt_q_kernel(q, q_step: float, q_min: float, q_max: float, z):
    return np.clip(q + q_step * z, q_min, q_max)


def adapt_sigma(sigma: float, policy: AdaptationPolicy, rng: RngStream, n_genes: int = 1) -> float:
    """Log-normal update ``sigma * exp(tau * N(0, 1))`` clamped to the policy range.

    Consumes two uniforms.
    """
    z = box_muller(rng.uniform(), rng.uniform())
    tau = policy.resolved_tau(n_genes)
    return float(adapt_sigma_kernel(sigma, tau, policy.sigma_min, policy.sigma_max, z))


def adapt_q(q: float, policy: AdaptationPolicy, rng: RngStream) -> float:
    """Clamped random walk ``q + q_step * N(0, 1)``; two uniforms."""
    z = box_muller(rng.uniform(), rng.uniform())
    return float(adapt_q_kernel(q, policy.q_step, policy.q_min, policy.q_max, z))
