"""Finite sample spaces and point-weight measures.

Every measure lives on a finite, ordered sample space whose sigma-algebra is
the full power set, so a measure is completely described by the weight it
puts on each singleton.  Measures are immutable: weight arrays are copied on
construction and flagged read-only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from .errors import CapacityError, DomainError, StructuralError

MAX_POINTS = 2**20
EXHAUSTIVE_LIMIT = 16
SAMPLED_SUBSETS = 1000
DISCRETE_TOL = 1e-12
PARSE_MASS_TOL = 1e-9


def _frozen(values, dtype=np.float64):
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SampleSpace:
    """An ordered finite set of uniquely labelled points."""

    labels: tuple[str, ...]

    def __post_init__(self):
        labels = tuple(str(label) for label in self.labels)
        object.__setattr__(self, "labels", labels)
        if not labels:
            raise StructuralError("a sample space needs at least one point")
        if len(labels) > MAX_POINTS:
            raise CapacityError(f"sample space has {len(labels)} points, limit is {MAX_POINTS}")
        if len(set(labels)) != len(labels):
            raise StructuralError("sample space labels must be unique")

    @classmethod
    def of_size(cls, n: int) -> "SampleSpace":
        return cls(tuple(str(i) for i in range(n)))

    @property
    def size(self) -> int:
        return len(self.labels)

    def __len__(self):
        return len(self.labels)

    def index(self, label) -> int:
        return self.labels.index(str(label))


def product_space(first: SampleSpace, second: SampleSpace) -> SampleSpace:
    """Cartesian product with ``(a, b)`` labels in row-major order."""
    if first.size * second.size > MAX_POINTS:
        raise CapacityError(
            f"product space of {first.size}x{second.size} points exceeds {MAX_POINTS}"
        )
    return SampleSpace(tuple(f"({a}, {b})" for a in first.labels for b in second.labels))


def _require_same_space(*objs):
    space = objs[0].space
    for obj in objs[1:]:
        if obj.space is not space and obj.space != space:
            raise StructuralError("objects are defined on different sample spaces")
    return space


@dataclass(frozen=True, eq=False)
class SignedMeasure:
    """Finite signed measure given by its singleton weights."""

    space: SampleSpace
    weights: np.ndarray

    def __post_init__(self):
        w = _frozen(self.weights)
        if w.ndim != 1 or w.shape[0] != self.space.size:
            raise StructuralError(
                f"expected {self.space.size} weights, got shape {w.shape}"
            )
        if not np.all(np.isfinite(w)):
            raise DomainError("measure weights must be finite")
        object.__setattr__(self, "weights", w)

    @property
    def size(self) -> int:
        return self.space.size

    @property
    def support(self) -> np.ndarray:
        """Boolean mask of charged points (nonzero weight)."""
        return self.weights != 0

    def __repr__(self):
        return f"{type(self).__name__}({self.weights.tolist()!r})"


class ProbabilityMeasure(SignedMeasure):
    """Nonnegative measure rescaled to unit total mass on construction."""

    def __post_init__(self):
        super().__post_init__()
        w = self.weights
        if np.any(w < 0):
            raise DomainError("probability weights must be nonnegative")
        total = w.sum()
        if total <= 0:
            raise DomainError("probability measure needs positive total mass")
        object.__setattr__(self, "weights", _frozen(w / total))


def signed(weights, space: SampleSpace | None = None) -> SignedMeasure:
    weights = np.asarray(weights, dtype=np.float64)
    return SignedMeasure(space or SampleSpace.of_size(weights.size), weights)


def probability(weights, space: SampleSpace | None = None) -> ProbabilityMeasure:
    weights = np.asarray(weights, dtype=np.float64)
    return ProbabilityMeasure(space or SampleSpace.of_size(weights.size), weights)


def counting(space: SampleSpace) -> SignedMeasure:
    return SignedMeasure(space, np.ones(space.size))


@dataclass(frozen=True, eq=False)
class SubsetMask:
    space: SampleSpace
    membership: np.ndarray

    def __post_init__(self):
        m = _frozen(self.membership, dtype=bool)
        if m.shape != (self.space.size,):
            raise StructuralError(
                f"membership must have length {self.space.size}, got shape {m.shape}"
            )
        object.__setattr__(self, "membership", m)

    @classmethod
    def of(cls, space: SampleSpace, indices: Sequence[int]) -> "SubsetMask":
        m = np.zeros(space.size, dtype=bool)
        m[list(indices)] = True
        return cls(space, m)

    @classmethod
    def full(cls, space: SampleSpace) -> "SubsetMask":
        return cls(space, np.ones(space.size, dtype=bool))

    @classmethod
    def empty(cls, space: SampleSpace) -> "SubsetMask":
        return cls(space, np.zeros(space.size, dtype=bool))

    def labels(self) -> list[str]:
        return [lab for lab, inside in zip(self.space.labels, self.membership) if inside]


# -- elementary operations ---------------------------------------------------

def total_mass(m: SignedMeasure) -> float:
    return float(m.weights.sum())


def measure_of(m: SignedMeasure, A: SubsetMask) -> float:
    _require_same_space(m, A)
    return float(m.weights[A.membership].sum())


def ac_witness(P: SignedMeasure, Q: SignedMeasure) -> int | None:
    """Index of the first point charged by ``P`` but null for ``Q``, if any."""
    _require_same_space(P, Q)
    bad = np.flatnonzero((Q.weights == 0) & (P.weights != 0))
    return int(bad[0]) if bad.size else None


def is_absolutely_continuous(P: SignedMeasure, Q: SignedMeasure) -> bool:
    """``P << Q``: every ``Q``-null point is ``P``-null (exact zero test)."""
    return ac_witness(P, Q) is None


def require_absolutely_continuous(P: SignedMeasure, Q: SignedMeasure, what: str = "P << Q"):
    idx = ac_witness(P, Q)
    if idx is not None:
        label = P.space.labels[idx]
        raise DomainError(
            f"absolute continuity {what} fails at point {label!r}: "
            f"weight {float(P.weights[idx])!r} on a null point of the reference",
            witness=label,
        )


FunctionOnPoints = Union[Sequence[float], np.ndarray, Callable[[str], float]]


def evaluate(f: FunctionOnPoints, space: SampleSpace) -> np.ndarray:
    """Tabulate a function on the points of ``space``.

    ``f`` may be a sequence of values in point order or a callable taking a
    point label.
    """
    if callable(f):
        values = np.array([f(label) for label in space.labels], dtype=np.float64)
    else:
        values = np.asarray(f, dtype=np.float64)
    if values.shape != (space.size,):
        raise StructuralError(
            f"function must have {space.size} values, got shape {values.shape}"
        )
    return values


def integrate(f: FunctionOnPoints, m: SignedMeasure, A: SubsetMask | None = None) -> float:
    """Sum of ``f(x) * m({x})`` over the points of ``A`` (default: everything)."""
    if A is None:
        A = SubsetMask.full(m.space)
    _require_same_space(m, A)
    values = evaluate(f, m.space)
    charged = A.membership & (m.weights != 0)
    if not np.all(np.isfinite(values[charged])):
        idx = int(np.flatnonzero(charged & ~np.isfinite(values))[0])
        raise DomainError(
            f"integrand is not finite at charged point {m.space.labels[idx]!r}",
            witness=m.space.labels[idx],
        )
    return float(np.dot(values[charged], m.weights[charged]))


def scale(m: SignedMeasure, c: float) -> SignedMeasure:
    if not np.isfinite(c):
        raise DomainError(f"scale factor must be finite, got {c!r}")
    return SignedMeasure(m.space, m.weights * c)


def mix(coeffs: Sequence[float], measures: Sequence[SignedMeasure]) -> SignedMeasure:
    """Pointwise linear combination ``sum_t c_t * Q_t``."""
    if len(coeffs) != len(measures):
        raise StructuralError(
            f"{len(coeffs)} coefficients for {len(measures)} measures"
        )
    if not measures:
        raise StructuralError("mix needs at least one measure")
    space = _require_same_space(*measures)
    stacked = np.stack([q.weights for q in measures])
    return SignedMeasure(space, np.asarray(coeffs, dtype=np.float64) @ stacked)


def product(m1: SignedMeasure, m2: SignedMeasure) -> SignedMeasure:
    """Product measure on the row-major product space."""
    space = product_space(m1.space, m2.space)
    return SignedMeasure(space, np.outer(m1.weights, m2.weights).ravel())


# -- subset quantification ---------------------------------------------------

def subset_masks(
    n: int,
    *,
    exhaustive_limit: int = EXHAUSTIVE_LIMIT,
    samples: int = SAMPLED_SUBSETS,
    seed: int = 0,
) -> np.ndarray:
    """Boolean ``(k, n)`` matrix of the subsets used to quantify "for all A".

    All ``2**n`` subsets when ``n <= exhaustive_limit``; otherwise ``samples``
    seeded uniform random subsets plus every singleton and the full space.
    """
    if n <= exhaustive_limit:
        codes = np.arange(2**n, dtype=np.int64)[:, None]
        return ((codes >> np.arange(n)) & 1).astype(bool)
    rng = np.random.default_rng(seed)
    random_part = rng.random((samples, n)) < 0.5
    return np.vstack([random_part, np.eye(n, dtype=bool), np.ones((1, n), dtype=bool)])


def relative_deviation(lhs, rhs, magnitude) -> np.ndarray:
    """``|lhs - rhs|`` divided by ``magnitude`` where it is positive."""
    lhs, rhs, magnitude = np.broadcast_arrays(
        np.asarray(lhs, dtype=np.float64),
        np.asarray(rhs, dtype=np.float64),
        np.asarray(magnitude, dtype=np.float64),
    )
    diff = np.abs(lhs - rhs)
    out = diff.copy()
    pos = magnitude > 0
    out[pos] = diff[pos] / magnitude[pos]
    return out


@dataclass(frozen=True)
class SubsetDeviation:
    max_deviation: float
    worst_subset: tuple[str, ...] = field(default=())


def max_subset_deviation(
    lhs_terms: np.ndarray,
    rhs_terms: np.ndarray,
    masks: np.ndarray,
    labels: Sequence[str],
) -> SubsetDeviation:
    """Largest relative gap between two set functions given by point terms.

    For each subset ``A`` the gap ``|sum_A lhs - sum_A rhs|`` is scaled by
    ``max(sum_A |lhs|, sum_A |rhs|)``, which is the plain relative error for
    nonnegative terms and stays meaningful under cancellation.
    """
    fm = masks.astype(np.float64)
    lhs = fm @ lhs_terms
    rhs = fm @ rhs_terms
    magnitude = np.maximum(fm @ np.abs(lhs_terms), fm @ np.abs(rhs_terms))
    dev = relative_deviation(lhs, rhs, magnitude)
    worst = int(np.argmax(dev)) if dev.size else 0
    if not dev.size or dev[worst] == 0:
        return SubsetDeviation(0.0)
    subset = tuple(lab for lab, inside in zip(labels, masks[worst]) if inside)
    return SubsetDeviation(float(dev[worst]), subset)


def measure_to_dict(m: SignedMeasure) -> dict:
    """Measure file representation (see ``fileio``)."""
    kind = "probability" if isinstance(m, ProbabilityMeasure) else "signed"
    return {"space": list(m.space.labels), "weights": m.weights.tolist(), "kind": kind}
