"""Special functions and samplers built on a counter-based uniform stream.

Every random quantity in the package is derived from :class:`RngStream`.
A stream is identified by a 64-bit key; the ``c``-th uniform of a stream is
a pure function of ``(key, c)`` (a SplitMix64 output), so any sub-block of
draws can be computed independently and in vectorized form.  Child streams
are derived with :meth:`RngStream.split` and depend only on the parent key
and the label.

``erf``/``erfc``/``erf_inv`` and the samplers accept floats or numpy arrays.
"""

from __future__ import annotations

import hashlib
import math
from fractions import Fraction
from typing import Iterable, Union

import numpy as np

__all__ = [
    "DomainError",
    "QShape",
    "RngStream",
    "box_muller",
    "erf",
    "erf_inv",
    "erfc",
    "ln_q",
    "q_box_muller",
    "sample_normal",
    "sample_q_gaussian",
    "split_keys",
    "uniform_block",
]

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

_U_GAMMA = np.uint64(GAMMA)
_U_M1 = np.uint64(_M1)
_U_M2 = np.uint64(_M2)
_U30, _U27, _U31, _U11 = (np.uint64(s) for s in (30, 27, 31, 11))
_TWO_M53 = 2.0**-53

Label = Union[int, str, Iterable[Union[int, str]]]


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


# --------------------------------------------------------------------------
# uniform stream
# --------------------------------------------------------------------------


def _mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def _mix64_vec(z: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = z ^ (z >> _U30)
        z = z * _U_M1
        z = z ^ (z >> _U27)
        z = z * _U_M2
    return z ^ (z >> _U31)


def _label_part(part: Union[int, str]) -> int:
    if isinstance(part, (bool, np.bool_)):
        raise TypeError("boolean stream labels are ambiguous")
    if isinstance(part, (int, np.integer)):
        return int(part) & MASK64
    if isinstance(part, str):
        digest = hashlib.blake2b(part.encode("utf-8"), digest_size=8).digest()
        return int.from_bytes(digest, "little")
    raise TypeError(f"unsupported stream label component {part!r}")


def _label_parts(label: Label) -> list[int]:
    if isinstance(label, (int, np.integer, str)):
        return [_label_part(label)]
    return [_label_part(p) for p in label]


def _child_key(key: int, part: int) -> int:
    return _mix64(key ^ _mix64((part + GAMMA) & MASK64))


def _to_unit(z: int) -> float:
    # 53 random bits centred in their cell: never 0, never 1
    return ((z >> 11) + 0.5) * _TWO_M53


class RngStream:
    """Deterministic, splittable source of uniforms on the open interval (0, 1).

    Parameters
    ----------
    seed:
        64-bit unsigned seed.
    position:
        Index of the next draw.
    """

    __slots__ = ("seed", "key", "position")

    def __init__(self, seed: int, position: int = 0, *, _key: int | None = None):
        if not 0 <= int(seed) <= MASK64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {seed}")
        if position < 0:
            raise DomainError("position must be non-negative")
        self.seed = int(seed)
        self.key = _mix64((self.seed + GAMMA) & MASK64) if _key is None else _key
        self.position = int(position)

    @classmethod
    def from_key(cls, key: int, position: int = 0) -> "RngStream":
        return cls(int(key) & MASK64, position, _key=int(key) & MASK64)

    def __repr__(self) -> str:
        return f"RngStream(key={self.key:#018x}, position={self.position})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RngStream):
            return NotImplemented
        return self.key == other.key and self.position == other.position

    def copy(self) -> "RngStream":
        return RngStream.from_key(self.key, self.position)

    def split(self, label: Label) -> "RngStream":
        """Child stream that depends only on this stream's key and ``label``.

        ``label`` may be an int, a string, or a tuple of those; tuples are folded
        left to right, so ``s.split((a, b)) == s.split(a).split(b)``.
        """
        key = self.key
        for part in _label_parts(label):
            key = _child_key(key, part)
        return RngStream.from_key(key)

    def uniform(self) -> float:
        self.position += 1
        return _to_unit(_mix64(self.key + self.position * GAMMA))

    def uniforms(self, n: int) -> np.ndarray:
        """Next ``n`` uniforms as an array, identical to ``n`` calls of :meth:`uniform`."""
        out = uniform_block(np.array([self.key], dtype=np.uint64), n, self.position)[0]
        self.position += n
        return out

    def integer(self, n: int) -> int:
        """Uniform integer in ``[0, n)`` from a single uniform."""
        if n < 1:
            raise DomainError("integer range must be non-empty")
        return min(int(self.uniform() * n), n - 1)


def split_keys(keys, part) -> np.ndarray:
    """Vectorized :meth:`RngStream.split` for a single label component.

    ``keys`` and ``part`` broadcast against each other; ``part`` is an int,
    string or integer array.
    """
    keys = np.asarray(keys, dtype=np.uint64)
    if isinstance(part, str):
        parts = np.uint64(_label_part(part))
    else:
        parts = np.asarray(part).astype(np.int64).astype(np.uint64)
    with np.errstate(over="ignore"):
        return _mix64_vec(keys ^ _mix64_vec(parts + _U_GAMMA))


def uniform_block(keys, n: int, start: int = 0) -> np.ndarray:
    """Uniforms at positions ``start+1 .. start+n`` for every stream key.

    Returns an array of shape ``keys.shape + (n,)``.
    """
    keys = np.asarray(keys, dtype=np.uint64)
    with np.errstate(over="ignore"):
        counters = np.arange(start + 1, start + n + 1, dtype=np.uint64) * _U_GAMMA
        z = _mix64_vec(keys[..., None] + counters)
    return ((z >> _U11).astype(np.float64) + 0.5) * _TWO_M53


# --------------------------------------------------------------------------
# error function
# --------------------------------------------------------------------------

_SERIES_TERMS = 37
_ERF_SERIES_COEFFS = [
    float(Fraction((-1) ** n, math.factorial(n) * (2 * n + 1))) for n in range(_SERIES_TERMS)
]
_CF_DEPTH = 60
_FAR_TAIL_STEPS = 4
_TWO_OVER_SQRT_PI = 2.0 / math.sqrt(math.pi)
_SQRT_PI = math.sqrt(math.pi)
_BELOW_ONE = math.nextafter(1.0, 0.0)


def _erf_series(a: np.ndarray) -> np.ndarray:
    a2 = a * a
    acc = np.full_like(a, _ERF_SERIES_COEFFS[-1])
    for c in reversed(_ERF_SERIES_COEFFS[:-1]):
        acc *= a2
        acc += c
    return _TWO_OVER_SQRT_PI * a * acc


def _erfc_cf(a: np.ndarray) -> np.ndarray:
    # erfc(a) = exp(-a^2)/sqrt(pi) / (a + (1/2)/(a + 1/(a + (3/2)/(a + ...)))), a > 2
    t = a.copy()
    for k in range(_CF_DEPTH, 0, -1):
        t = a + (0.5 * k) / t
    return np.exp(-a * a) / (_SQRT_PI * t)


def _as_result(out: np.ndarray):
    return float(out) if out.ndim == 0 else out


def erf(y):
    """Gauss error function ``(2/sqrt(pi)) * integral_0^y exp(-t^2) dt``.

    Maclaurin series for ``|y| <= 2`` and a continued fraction for the
    complement beyond.  Odd by construction, and the magnitude is capped at
    the largest double below 1 so that ``erf_inv(erf(y))`` is always finite.
    """
    y = np.asarray(y, dtype=np.float64)
    a = np.abs(y)
    out = np.empty_like(a)
    small = a <= 2.0
    out[small] = _erf_series(a[small])
    big = ~small
    out[big] = 1.0 - _erfc_cf(a[big])
    np.minimum(out, _BELOW_ONE, out=out)
    return _as_result(np.copysign(out, y))


def erfc(y):
    """Complementary error function ``1 - erf(y)``, accurate in the right tail."""
    y = np.asarray(y, dtype=np.float64)
    a = np.abs(y)
    tail = np.empty_like(a)
    small = a <= 2.0
    tail[small] = 1.0 - _erf_series(a[small])
    tail[~small] = _erfc_cf(a[~small])
    return _as_result(np.where(y < 0, 2.0 - tail, tail))


def _erf_inv_initial(v: np.ndarray) -> np.ndarray:
    # Giles' single-precision approximation, relative error ~1e-7
    w = -np.log((1.0 - v) * (1.0 + v))
    central = w < 5.0
    wc = w - 2.5
    p = np.full_like(v, 2.81022636e-08)
    for c in (3.43273939e-07, -3.5233877e-06, -4.39150654e-06, 0.00021858087,
              -0.00125372503, -0.00417768164, 0.246640727, 1.50140941):
        p = c + p * wc
    wt = np.sqrt(w) - 3.0
    r = np.full_like(v, -0.000200214257)
    for c in (0.000100950558, 0.00134934322, -0.00367342844, 0.00573950773,
              -0.0076224613, 0.00943887047, 1.00167406, 2.83297682):
        r = c + r * wt
    return np.where(central, p, r) * v


def erf_inv(u):
    """Inverse error function on the open interval (-1, 1).

    A closed-form initial guess is refined by two Newton steps; near the
    tails the residual is formed with ``erfc`` to avoid cancellation.

    Raises
    ------
    DomainError
        If any ``|u| >= 1`` (or ``u`` is NaN).
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.abs(u).reshape(-1)
    if not np.all(v < 1.0):
        raise DomainError("erf_inv requires -1 < u < 1")
    y = np.asarray(_erf_inv_initial(v))
    tail = v >= 0.5
    comp = 1.0 - v
    far = comp < 1e-7
    if np.any(far):
        # the initial guess degrades past erf(4); Newton on log(erfc) is nearly linear there
        yf, log_c = y[far], np.log(comp[far])
        for _ in range(_FAR_TAIL_STEPS):
            ec = erfc(yf)
            yf = yf + (np.log(ec) - log_c) * ec / (_TWO_OVER_SQRT_PI * np.exp(-yf * yf))
        y[far] = yf
    for _ in range(2):
        resid = np.where(tail, comp - erfc(y), erf(y) - v)
        y = y - resid / (_TWO_OVER_SQRT_PI * np.exp(-y * y))
    return _as_result(np.copysign(y.reshape(u.shape), u))


# --------------------------------------------------------------------------
# samplers
# --------------------------------------------------------------------------


class QShape(float):
    """q-Gaussian shape parameter restricted to ``1 <= q < 3``."""

    def __new__(cls, q: float):
        q = float(q)
        if not 1.0 <= q < 3.0:
            raise DomainError(f"q-Gaussian shape must satisfy 1 <= q < 3, got {q}")
        return super().__new__(cls, q)

    @property
    def q(self) -> float:
        return float(self)


def ln_q(x, q: float):
    """Tsallis q-logarithm; the natural log at ``q == 1``."""
    if q == 1.0:
        return np.log(x)
    return (np.power(x, 1.0 - q) - 1.0) / (1.0 - q)


def box_muller(u1, u2):
    """Standard normal from two uniforms: ``sqrt(-2 ln u1) * cos(2 pi u2)``."""
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


def q_box_muller(u1, u2, q):
    """Standard q-Gaussian by the generalized Box-Muller transform.

    Uses the q-logarithm of index ``(1 + q) / (3 - q)``; reduces exactly to
    :func:`box_muller` when ``q == 1``.  ``q`` may be an array.
    """
    q = np.asarray(q, dtype=np.float64)
    qq = (1.0 + q) / (3.0 - q)
    gaussian = qq == 1.0
    one_minus = np.where(gaussian, 1.0, 1.0 - qq)
    lnq = np.where(gaussian, np.log(u1), (np.power(u1, one_minus) - 1.0) / one_minus)
    return np.sqrt(-2.0 * lnq) * np.cos(2.0 * np.pi * u2)


def sample_normal(rng: RngStream, mean: float, sigma: float) -> float:
    """One draw from Normal(mean, sigma^2); consumes exactly two uniforms."""
    if sigma < 0:
        raise DomainError(f"sigma must be non-negative, got {sigma}")
    u1 = rng.uniform()
    u2 = rng.uniform()
    if sigma == 0:
        return float(mean)
    return float(mean + sigma * box_muller(u1, u2))


def sample_q_gaussian(rng: RngStream, shape: float) -> float:
    """One standard q-Gaussian draw; consumes exactly two uniforms."""
    q = QShape(shape)
    u1 = rng.uniform()
    u2 = rng.uniform()
    return float(q_box_muller(u1, u2, q.q))
