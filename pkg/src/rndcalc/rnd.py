"""Radon-Nikodym derivatives of discrete measures and the basic theorem checkers.

On a finite space with the power-set sigma-algebra, ``dP/dQ`` is the pointwise
weight ratio wherever ``Q`` charges a point.  Off the support of ``Q`` the
derivative is only determined up to a null set; we store the canonical
value 0 there so results are reproducible.

Each ``check_*`` function evaluates both sides of one identity on a concrete
instance and returns a :class:`~rndcalc.report.CheckReport`.  Precondition
failures raise :class:`~rndcalc.errors.DomainError` rather than producing a
failing report: the identities are conditional statements.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, StructuralError
from .measure import (
    DISCRETE_TOL,
    FunctionOnPoints,
    ProbabilityMeasure,
    SignedMeasure,
    SubsetMask,
    _require_same_space,
    evaluate,
    max_subset_deviation,
    measure_of,
    measure_to_dict,
    mix,
    product,
    relative_deviation,
    require_absolutely_continuous,
    scale,
    subset_masks,
)
from .report import CheckReport

CONTINUITY_TOL = 1e-6

# Slack (in units of machine epsilon times the compared magnitude) granted when
# a deviation is compared against a tolerance it equals in exact arithmetic.
_REPRESENTATION_ULPS = 4


@dataclass(frozen=True, eq=False)
class RNDFunction:
    """Derivative values together with the reference measure they are a.s. w.r.t."""

    values: np.ndarray
    reference: SignedMeasure

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        if v.shape != (self.reference.size,):
            raise StructuralError(
                f"expected {self.reference.size} derivative values, got shape {v.shape}"
            )
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def space(self):
        return self.reference.space

    def __repr__(self):
        return f"RNDFunction({self.values.tolist()!r})"


@dataclass(frozen=True)
class ASEqualityVerdict:
    equal: bool
    max_deviation: float
    witness: str | None = None


@dataclass(frozen=True, eq=False)
class MeasureSequence:
    """First ``K`` terms of a convergent sequence of measures plus its limit."""

    terms: tuple[SignedMeasure, ...]
    limit: SignedMeasure

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if not self.terms:
            raise StructuralError("a measure sequence needs at least one term")
        _require_same_space(self.limit, *self.terms)


def rnd(P: SignedMeasure, Q: SignedMeasure) -> RNDFunction:
    """``dP/dQ`` as the weight ratio on the support of ``Q`` and 0 elsewhere."""
    require_absolutely_continuous(P, Q)
    q = Q.weights
    charged = q != 0
    values = np.zeros(Q.size)
    values[charged] = P.weights[charged] / q[charged]
    return RNDFunction(values, Q)


def _values(f) -> np.ndarray:
    if isinstance(f, RNDFunction):
        return f.values
    return np.asarray(f, dtype=np.float64)


def as_equal(f, g, R: SignedMeasure, tol: float = DISCRETE_TOL, *, scale=None) -> ASEqualityVerdict:
    """Almost-sure equality of two functions with respect to ``R``.

    Only points charged by ``R`` are compared.  The deviation at a point is
    ``|f - g| / max(1, |f|, |g|, scale)``, so ``tol`` acts as an absolute
    tolerance for values of order one and a relative one for large values;
    ``scale`` supplies an extra per-point magnitude when ``f`` and ``g`` are
    sums with cancellation.
    """
    fv, gv = _values(f), _values(g)
    if fv.shape != (R.size,) or gv.shape != (R.size,):
        raise StructuralError("compared functions must have one value per point of R")
    charged = R.weights != 0
    magnitude = np.maximum.reduce([np.ones(R.size), np.abs(fv), np.abs(gv)])
    if scale is not None:
        magnitude = np.maximum(magnitude, np.abs(np.asarray(scale, dtype=np.float64)))
    with np.errstate(invalid="ignore"):
        dev = relative_deviation(fv, gv, magnitude)
    dev = np.where(charged, dev, 0.0)
    if np.any(np.isnan(dev)):
        idx = int(np.flatnonzero(np.isnan(dev))[0])
        return ASEqualityVerdict(False, float("inf"), R.space.labels[idx])
    worst = int(np.argmax(dev))
    max_dev = float(dev[worst])
    witness = R.space.labels[worst] if max_dev > 0 else None
    return ASEqualityVerdict(max_dev <= tol, max_dev, witness)


def _merge(theorem, instance, verdicts, tol, details=None) -> CheckReport:
    worst = max(verdicts, key=lambda v: v.max_deviation)
    return CheckReport(
        theorem=theorem,
        instance=instance,
        max_deviation=worst.max_deviation,
        tolerance=tol,
        passed=all(v.equal for v in verdicts),
        witness=worst.witness,
        details=details or {},
    )


# -- defining property of the derivative ---------------------------------------

def _eq1_deviation(P, Q, g_values, f_values=None, *, seed=0):
    """Worst subset gap between ``int_A f dP`` and ``int_A f g dQ``."""
    f_values = np.ones(P.size) if f_values is None else f_values
    q = Q.weights
    charged_p = P.weights != 0
    lhs_terms = np.zeros(P.size)
    lhs_terms[charged_p] = f_values[charged_p] * P.weights[charged_p]
    charged_q = q != 0
    rhs_terms = np.zeros(P.size)
    rhs_terms[charged_q] = f_values[charged_q] * g_values[charged_q] * q[charged_q]
    masks = subset_masks(P.size, seed=seed)
    return max_subset_deviation(lhs_terms, rhs_terms, masks, P.space.labels)


def check_radon_nikodym(
    P: SignedMeasure,
    Q: SignedMeasure,
    g=None,
    tol: float = DISCRETE_TOL,
    *,
    seed: int = 0,
) -> CheckReport:
    """Verify ``P(A) = int_A g dQ`` over every subset ``A``.

    ``g`` defaults to :func:`rnd` ``(P, Q)``; pass other values to test a
    candidate derivative (uniqueness: any valid ``g`` agrees with the
    canonical one on the support of ``Q``).
    """
    require_absolutely_continuous(P, Q)
    g_values = rnd(P, Q).values if g is None else _values(g)
    if g_values.shape != (P.size,):
        raise StructuralError("candidate derivative has the wrong length")
    dev = _eq1_deviation(P, Q, g_values, seed=seed)
    return CheckReport(
        theorem="rn_construction",
        instance={"P": measure_to_dict(P), "Q": measure_to_dict(Q)},
        max_deviation=dev.max_deviation,
        tolerance=tol,
        passed=dev.max_deviation <= tol,
        witness=list(dev.worst_subset) or None,
    )


# -- basic identities ----------------------------------------------------------

def check_change_of_measure(
    f: FunctionOnPoints,
    P: SignedMeasure,
    Q: SignedMeasure,
    tol: float = DISCRETE_TOL,
    *,
    seed: int = 0,
) -> CheckReport:
    """``int_A f dP == int_A f (dP/dQ) dQ`` for every subset ``A``."""
    require_absolutely_continuous(P, Q)
    f_values = evaluate(f, P.space)
    charged = (P.weights != 0) | (Q.weights != 0)
    if not np.all(np.isfinite(f_values[charged])):
        raise DomainError("integrand must be finite at charged points")
    dev = _eq1_deviation(P, Q, rnd(P, Q).values, f_values, seed=seed)
    return CheckReport(
        theorem="change_of_measure",
        instance={"f": f_values, "P": measure_to_dict(P), "Q": measure_to_dict(Q)},
        max_deviation=dev.max_deviation,
        tolerance=tol,
        passed=dev.max_deviation <= tol,
        witness=list(dev.worst_subset) or None,
    )


def check_proportional(P: SignedMeasure, c: float, tol: float = DISCRETE_TOL) -> CheckReport:
    """With ``Q = c P``: ``dP/dQ = 1/c`` a.s.-Q and ``dQ/dP = c`` a.s.-P."""
    if not c > 0:
        raise DomainError(f"proportionality constant must be positive, got {c!r}")
    if not np.any(P.weights != 0):
        raise DomainError("P must charge at least one point")
    Q = scale(P, c)
    forward = as_equal(rnd(P, Q), np.full(P.size, 1.0 / c), Q, tol)
    backward = as_equal(rnd(Q, P), np.full(P.size, float(c)), P, tol)
    return _merge(
        "proportional",
        {"P": measure_to_dict(P), "c": float(c)},
        [forward, backward],
        tol,
    )


def check_chain_rule(
    P: SignedMeasure, Q: SignedMeasure, R: SignedMeasure, tol: float = DISCRETE_TOL
) -> CheckReport:
    """``dP/dR == (dP/dQ)(dQ/dR)`` a.s.-R."""
    require_absolutely_continuous(P, Q, "P << Q")
    require_absolutely_continuous(Q, R, "Q << R")
    direct = rnd(P, R)
    composed = rnd(P, Q).values * rnd(Q, R).values
    verdict = as_equal(direct, composed, R, tol)
    return _merge(
        "chain_rule",
        {"P": measure_to_dict(P), "Q": measure_to_dict(Q), "R": measure_to_dict(R)},
        [verdict],
        tol,
    )


def check_multiplicative_inverse(
    P: SignedMeasure, Q: SignedMeasure, tol: float = DISCRETE_TOL
) -> CheckReport:
    """``dP/dQ == 1 / (dQ/dP)`` a.s.-Q for mutually absolutely continuous measures.

    Positivity of ``dQ/dP`` is required on the support of ``P`` only.
    """
    require_absolutely_continuous(P, Q, "P << Q")
    require_absolutely_continuous(Q, P, "Q << P")
    back = rnd(Q, P).values
    charged = P.weights != 0
    if np.any(back[charged] <= 0):
        idx = int(np.flatnonzero(charged & (back <= 0))[0])
        label = P.space.labels[idx]
        raise DomainError(f"dQ/dP is not positive at charged point {label!r}", witness=label)
    reciprocal = np.zeros(P.size)
    reciprocal[charged] = 1.0 / back[charged]
    verdict = as_equal(rnd(P, Q), reciprocal, Q, tol)
    return _merge(
        "multiplicative_inverse",
        {"P": measure_to_dict(P), "Q": measure_to_dict(Q)},
        [verdict],
        tol,
    )


def check_linearity(
    coeffs: Sequence[float],
    Qs: Sequence[SignedMeasure],
    P: SignedMeasure,
    tol: float = DISCRETE_TOL,
) -> CheckReport:
    """``d(sum c_t Q_t)/dP == sum c_t dQ_t/dP`` a.s.-P for positive ``c_t``."""
    coeffs = [float(c) for c in coeffs]
    if len(coeffs) != len(Qs):
        raise StructuralError(f"{len(coeffs)} coefficients for {len(Qs)} measures")
    for t, (c, Qt) in enumerate(zip(coeffs, Qs)):
        if not c > 0:
            raise DomainError(f"coefficient {t} must be positive, got {c!r}", witness=t)
        try:
            require_absolutely_continuous(Qt, P, f"Q_{t} << P")
        except DomainError as exc:
            raise DomainError(str(exc), witness=t) from exc
    S = mix(coeffs, Qs)
    parts = np.stack([c * rnd(Qt, P).values for c, Qt in zip(coeffs, Qs)])
    verdict = as_equal(rnd(S, P), parts.sum(axis=0), P, tol, scale=np.abs(parts).sum(axis=0))
    return _merge(
        "linearity",
        {
            "coeffs": coeffs,
            "Qs": [measure_to_dict(q) for q in Qs],
            "P": measure_to_dict(P),
        },
        [verdict],
        tol,
    )


def continuity_deviations(seq: MeasureSequence, P: SignedMeasure) -> np.ndarray:
    """``max |dQ_k/dP - dQ/dP|`` over the support of ``P``, one entry per term."""
    for k, term in enumerate(seq.terms):
        try:
            require_absolutely_continuous(term, P, f"Q_{k} << P")
        except DomainError as exc:
            raise DomainError(str(exc), witness=k) from exc
    require_absolutely_continuous(seq.limit, P, "Q << P")
    target = rnd(seq.limit, P).values
    charged = P.weights != 0
    return np.array(
        [np.max(np.abs(rnd(t, P).values - target)[charged], initial=0.0) for t in seq.terms]
    )


def check_continuity(
    seq: MeasureSequence,
    P: SignedMeasure,
    tol: float = CONTINUITY_TOL,
    *,
    k0: int = 0,
) -> CheckReport:
    """Finite-horizon check of ``lim dQ_n/dP == dQ/dP`` a.s.-P.

    Passes when the deviations are non-increasing from term ``k0`` on and the
    last term is within ``tol`` of the limit derivative.  The terminal
    comparison allows a few ulps of the compared derivative values, since a
    term sitting exactly at the tolerance cannot be stored exactly.
    """
    if len(seq.terms) < 3:
        raise StructuralError("continuity check needs at least 3 terms")
    devs = continuity_deviations(seq, P)
    tail = devs[k0:]
    monotone = bool(np.all(np.diff(tail) <= 0))
    limit_values = np.abs(rnd(seq.limit, P).values)
    slack = _REPRESENTATION_ULPS * np.finfo(float).eps * max(1.0, float(limit_values.max()))
    terminal = float(devs[-1])
    passed = monotone and terminal <= tol + slack
    witness = None
    if not monotone:
        witness = k0 + int(np.flatnonzero(np.diff(tail) > 0)[0]) + 1
    elif not passed:
        witness = len(devs) - 1
    return CheckReport(
        theorem="continuity",
        instance={
            "terms": [measure_to_dict(t) for t in seq.terms],
            "limit": measure_to_dict(seq.limit),
            "P": measure_to_dict(P),
        },
        max_deviation=terminal,
        tolerance=tol,
        passed=passed,
        witness=witness,
        details={"deviations": devs, "monotone": monotone},
    )


def check_product_measures(
    P1: SignedMeasure,
    P2: SignedMeasure,
    Q1: SignedMeasure,
    Q2: SignedMeasure,
    tol: float = DISCRETE_TOL,
) -> CheckReport:
    """``d(P1 x P2)/d(Q1 x Q2) == (dP1/dQ1)(dP2/dQ2)`` a.s.-(Q1 x Q2)."""
    require_absolutely_continuous(P1, Q1, "P1 << Q1")
    require_absolutely_continuous(P2, Q2, "P2 << Q2")
    ref = product(Q1, Q2)
    joint = rnd(product(P1, P2), ref)
    factored = np.outer(rnd(P1, Q1).values, rnd(P2, Q2).values).ravel()
    verdict = as_equal(joint, factored, ref, tol)
    return _merge(
        "product_measures",
        {
            "P1": measure_to_dict(P1),
            "P2": measure_to_dict(P2),
            "Q1": measure_to_dict(Q1),
            "Q2": measure_to_dict(Q2),
        },
        [verdict],
        tol,
    )


def check_nonneg_finite(P: SignedMeasure, Q: SignedMeasure, tol: float = DISCRETE_TOL) -> CheckReport:
    """``P({0 <= dP/dQ < inf}) == 1`` for a probability ``P`` and nonnegative ``Q``."""
    if np.any(P.weights < 0) or abs(P.weights.sum() - 1.0) > tol:
        raise DomainError("P must be a probability measure")
    if not isinstance(P, ProbabilityMeasure):
        P = ProbabilityMeasure(P.space, P.weights)
    if np.any(Q.weights < 0):
        raise DomainError("reference measure Q must be nonnegative")
    require_absolutely_continuous(P, Q)
    g = rnd(P, Q).values
    good = SubsetMask(P.space, (g >= 0) & np.isfinite(g))
    mass = measure_of(P, good)
    dev = abs(mass - 1.0)
    bad = np.flatnonzero(~good.membership & P.support)
    witness = P.space.labels[int(bad[0])] if bad.size else None
    return CheckReport(
        theorem="nonneg_finite",
        instance={"P": measure_to_dict(P), "Q": measure_to_dict(Q)},
        max_deviation=dev,
        tolerance=tol,
        passed=dev <= tol,
        witness=witness,
        details={"mass": mass},
    )
