"""Seeded random instances that satisfy the preconditions of each identity.

Weights are normalized exponential variates (a flat Dirichlet draw).  When
strict positivity is requested every entry is at least ``floor``, which is
done by mixing the draw with the uniform law rather than by clipping.
Zeros are exact: points outside a chosen support get weight 0.0.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import simpson

from .conditional import ConditionalKernel
from .density import DensityMeasure
from .errors import UnsatisfiableError
from .measure import ProbabilityMeasure, SampleSpace, SignedMeasure

STRICT_FLOOR = 0.01


def _simplex(rng: np.random.Generator, k: int, floor: float) -> np.ndarray:
    if k < 1:
        raise UnsatisfiableError("cannot draw a probability vector on zero points")
    if floor * k > 1:
        raise UnsatisfiableError(
            f"a floor of {floor} on {k} points leaves no mass to distribute"
        )
    d = rng.exponential(size=k)
    d /= d.sum()
    return floor + (1.0 - floor * k) * d


def random_support(rng: np.random.Generator, n: int, within=None, min_size: int = 1) -> np.ndarray:
    """Random nonempty subset (boolean mask), optionally inside ``within``."""
    pool = np.flatnonzero(np.ones(n, bool) if within is None else within)
    if pool.size < min_size:
        raise UnsatisfiableError(f"need {min_size} points, only {pool.size} available")
    k = int(rng.integers(min_size, pool.size + 1))
    mask = np.zeros(n, dtype=bool)
    mask[rng.choice(pool, size=k, replace=False)] = True
    return mask


def random_probability(
    rng: np.random.Generator, n: int, *, floor: float = 0.0, support=None
) -> ProbabilityMeasure:
    support = np.ones(n, dtype=bool) if support is None else np.asarray(support, bool)
    w = np.zeros(n)
    w[support] = _simplex(rng, int(support.sum()), floor)
    return ProbabilityMeasure(SampleSpace.of_size(n), w)


def random_finite(rng: np.random.Generator, n: int, *, support=None) -> SignedMeasure:
    """Nonnegative measure with random total mass in ``[0.1, 10]``."""
    p = random_probability(rng, n, support=support)
    return SignedMeasure(p.space, p.weights * np.exp(rng.uniform(np.log(0.1), np.log(10.0))))


def random_signed(rng: np.random.Generator, n: int, *, support=None) -> SignedMeasure:
    """Signed measure with nonzero Gaussian weights on ``support``."""
    support = np.ones(n, dtype=bool) if support is None else np.asarray(support, bool)
    w = np.zeros(n)
    draws = rng.normal(size=int(support.sum()))
    draws[draws == 0] = 1.0
    w[support] = draws
    return SignedMeasure(SampleSpace.of_size(n), w)


def random_ac_pair(rng: np.random.Generator, n: int, *, signed_p: bool = False):
    """``(P, Q)`` with ``P << Q``; ``Q`` is a nonnegative finite measure."""
    q_support = random_support(rng, n)
    Q = random_finite(rng, n, support=q_support)
    p_support = random_support(rng, n, within=q_support)
    P = random_signed(rng, n, support=p_support) if signed_p else random_probability(
        rng, n, support=p_support
    )
    return P, Q


def random_chain(rng: np.random.Generator, n: int, length: int, *, signed_first: bool = False):
    """Measures ``m_0 << m_1 << ... << m_{length-1}`` with nested random supports."""
    if length < 1:
        raise UnsatisfiableError("a measure chain needs at least one measure")
    supports = [random_support(rng, n)]
    for _ in range(length - 1):
        supports.append(random_support(rng, n) | supports[-1])
    measures = [random_finite(rng, n, support=s) for s in supports]
    if signed_first:
        measures[0] = random_signed(rng, n, support=supports[0])
    return measures


def random_kernel(
    rng: np.random.Generator, nx: int, ny: int, *, floor: float = 0.0
) -> ConditionalKernel:
    rows = np.stack([_simplex(rng, ny, floor) for _ in range(nx)])
    return ConditionalKernel(SampleSpace.of_size(nx), SampleSpace.of_size(ny), rows)


def random_density(rng: np.random.Generator, n: int = 201, a: float = 0.0, b: float = 1.0) -> DensityMeasure:
    """Smooth, strictly positive density: a constant plus a few Gaussian bumps."""
    if n < 3 or n % 2 == 0:
        raise UnsatisfiableError(f"density grids need an odd number (>= 3) of points, got {n}")
    x = np.linspace(a, b, n)
    width = b - a
    y = np.full(n, 0.2)
    for _ in range(int(rng.integers(1, 4))):
        centre = rng.uniform(a, b)
        spread = width * rng.uniform(0.05, 0.3)
        y += rng.uniform(0.5, 2.0) * np.exp(-0.5 * ((x - centre) / spread) ** 2)
    return DensityMeasure(a, b, y / simpson(y, dx=(b - a) / (n - 1)), "probability")
