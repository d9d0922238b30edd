"""Registry of theorem checkers and the seeded multi-trial driver.

Every theorem has a stable position in :data:`THEOREMS`; trial ``t`` of the
theorem at position ``i`` draws from ``default_rng([seed, i, t])``, so the
instances do not depend on which other theorems are selected or on the order
in which trials run.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import fixtures as fx
from .conditional import (
    ConditionalKernel,
    check_bayes_like,
    check_inverse_bayes,
    check_unit_measure,
    output_marginal,
)
from .errors import DomainError, MeasureError, StructuralError
from .fileio import Bundle
from .information import IDENTITY_TOL, check_il_identity
from .measure import DISCRETE_TOL, ProbabilityMeasure, SignedMeasure, counting
from .report import CheckReport
from .rnd import (
    CONTINUITY_TOL,
    MeasureSequence,
    check_chain_rule,
    check_change_of_measure,
    check_continuity,
    check_linearity,
    check_multiplicative_inverse,
    check_nonneg_finite,
    check_product_measures,
    check_proportional,
    check_radon_nikodym,
)

log = logging.getLogger(__name__)

MIN_POINTS, MAX_POINTS = 2, 12
STRICT = fx.STRICT_FLOOR


@dataclass(frozen=True)
class Theorem:
    id: str
    tolerance: float
    generate: Callable[[np.random.Generator], dict]
    run: Callable[..., CheckReport]
    from_bundle: Callable[[Bundle], dict]


def _size(rng, lo=MIN_POINTS, hi=MAX_POINTS):
    return int(rng.integers(lo, hi + 1))


def _need(bundle: Bundle, count: int, what: str):
    if len(bundle.measures) < count:
        raise StructuralError(f"{what} needs {count} measures, fixture has {len(bundle.measures)}")
    return bundle.measures[:count]


# -- instance generators -------------------------------------------------------

def _gen_rn(rng):
    P, Q = fx.random_ac_pair(rng, _size(rng), signed_p=bool(rng.integers(2)))
    return {"P": P, "Q": Q}


def _gen_com(rng):
    P, Q = fx.random_ac_pair(rng, _size(rng), signed_p=bool(rng.integers(2)))
    return {"f": rng.normal(size=P.size), "P": P, "Q": Q}


def _gen_proportional(rng):
    n = _size(rng)
    P = fx.random_probability(rng, n, support=fx.random_support(rng, n))
    return {"P": P, "c": float(np.exp(rng.uniform(np.log(0.05), np.log(20.0))))}


def _gen_chain(rng):
    P, Q, R = fx.random_chain(rng, _size(rng), 3, signed_first=bool(rng.integers(2)))
    return {"P": P, "Q": Q, "R": R}


def _gen_inverse(rng):
    n = _size(rng)
    support = fx.random_support(rng, n)
    return {
        "P": fx.random_finite(rng, n, support=support),
        "Q": fx.random_finite(rng, n, support=support),
    }


def _gen_linearity(rng):
    n = _size(rng)
    P = fx.random_finite(rng, n, support=fx.random_support(rng, n))
    terms = int(rng.integers(1, 6))
    Qs = [fx.random_finite(rng, n, support=fx.random_support(rng, n, within=P.support)) for _ in range(terms)]
    return {"coeffs": rng.uniform(0.1, 10.0, size=terms).tolist(), "Qs": Qs, "P": P}


def _gen_continuity(rng, terms: int = 30):
    n = _size(rng)
    support = fx.random_support(rng, n)
    P = fx.random_probability(rng, n, floor=STRICT, support=support)
    limit = fx.random_probability(rng, n, support=fx.random_support(rng, n, within=support))
    start = fx.random_probability(rng, n, support=fx.random_support(rng, n, within=support))
    seq = [
        SignedMeasure(P.space, limit.weights + 2.0**-k * (start.weights - limit.weights))
        for k in range(terms)
    ]
    return {"seq": MeasureSequence(tuple(seq), limit), "P": P}


def _gen_product(rng):
    P1, Q1 = fx.random_ac_pair(rng, _size(rng, 2, 6), signed_p=bool(rng.integers(2)))
    P2, Q2 = fx.random_ac_pair(rng, _size(rng, 2, 6), signed_p=bool(rng.integers(2)))
    return {"P1": P1, "P2": P2, "Q1": Q1, "Q2": Q2}


def _gen_nonneg(rng):
    P, Q = fx.random_ac_pair(rng, _size(rng))
    return {"P": P, "Q": Q}


def _gen_kernel(rng):
    nx, ny = _size(rng, 2, 6), _size(rng, 2, 6)
    return {
        "kernel": fx.random_kernel(rng, nx, ny, floor=STRICT),
        "P_X": fx.random_probability(rng, nx, floor=STRICT),
    }


def _gen_il(rng):
    inst = _gen_kernel(rng)
    P_Y = output_marginal(inst["kernel"], inst["P_X"])
    ny = P_Y.size
    q_random = SignedMeasure(P_Y.space, fx.random_finite(rng, ny).weights + 1e-3)
    inst["Q_list"] = [P_Y, counting(P_Y.space), q_random]
    return inst


# -- fixture adapters ----------------------------------------------------------

def _b_pair(bundle):
    P, Q = _need(bundle, 2, "this theorem")
    return {"P": P, "Q": Q}


def _b_com(bundle):
    P, Q = _need(bundle, 2, "change_of_measure")
    return {"f": bundle.f if bundle.f is not None else np.ones(P.size), "P": P, "Q": Q}


def _b_proportional(bundle):
    (P,) = _need(bundle, 1, "proportional")
    return {"P": P, "c": 2.0 if bundle.c is None else bundle.c}


def _b_chain(bundle):
    P, Q, R = _need(bundle, 3, "chain_rule")
    return {"P": P, "Q": Q, "R": R}


def _b_linearity(bundle):
    P, *Qs = _need(bundle, len(bundle.measures), "linearity")
    if not Qs:
        raise StructuralError("linearity needs P followed by at least one Q_t")
    coeffs = bundle.coeffs if bundle.coeffs is not None else [1.0] * len(Qs)
    return {"coeffs": coeffs, "Qs": Qs, "P": P}


def _b_continuity(bundle):
    (P,) = _need(bundle, 1, "continuity")
    if not bundle.sequence or bundle.limit is None:
        raise StructuralError("continuity needs 'sequence' and 'limit' in the fixture")
    return {"seq": MeasureSequence(tuple(bundle.sequence), bundle.limit), "P": P}


def _b_product(bundle):
    P1, P2, Q1, Q2 = _need(bundle, 4, "product_measures")
    return {"P1": P1, "P2": P2, "Q1": Q1, "Q2": Q2}


def _b_kernel(bundle):
    if bundle.kernel is None:
        raise StructuralError("this theorem needs a kernel fixture")
    kernel: ConditionalKernel = bundle.kernel
    px = bundle.px
    if px is None:
        px = ProbabilityMeasure(kernel.x_space, np.ones(kernel.x_space.size))
    return {"kernel": kernel, "P_X": px}


def _b_il(bundle):
    inst = _b_kernel(bundle)
    qs = list(bundle.q)
    if not qs:
        P_Y = output_marginal(inst["kernel"], inst["P_X"])
        qs = [P_Y, counting(P_Y.space)]
    inst["Q_list"] = qs
    return inst


def _call(check, tol_name="tol"):
    def run(instance, tol):
        return check(**instance, **{tol_name: tol})

    return run


THEOREMS: tuple[Theorem, ...] = (
    Theorem("rn_construction", DISCRETE_TOL, _gen_rn, _call(check_radon_nikodym), _b_pair),
    Theorem("change_of_measure", DISCRETE_TOL, _gen_com, _call(check_change_of_measure), _b_com),
    Theorem("proportional", DISCRETE_TOL, _gen_proportional, _call(check_proportional), _b_proportional),
    Theorem("chain_rule", DISCRETE_TOL, _gen_chain, _call(check_chain_rule), _b_chain),
    Theorem("multiplicative_inverse", DISCRETE_TOL, _gen_inverse, _call(check_multiplicative_inverse), _b_pair),
    Theorem("linearity", DISCRETE_TOL, _gen_linearity, _call(check_linearity), _b_linearity),
    Theorem("continuity", CONTINUITY_TOL, _gen_continuity, _call(check_continuity), _b_continuity),
    Theorem("product_measures", DISCRETE_TOL, _gen_product, _call(check_product_measures), _b_product),
    Theorem("nonneg_finite", DISCRETE_TOL, _gen_nonneg, _call(check_nonneg_finite), _b_pair),
    Theorem("unit_measure", DISCRETE_TOL, _gen_kernel, _call(check_unit_measure), _b_kernel),
    Theorem("bayes_like", DISCRETE_TOL, _gen_kernel, _call(check_bayes_like), _b_kernel),
    Theorem("inverse_bayes", DISCRETE_TOL, _gen_kernel, _call(check_inverse_bayes), _b_kernel),
    Theorem("il_identity", IDENTITY_TOL, _gen_il, _call(check_il_identity), _b_il),
)

THEOREM_IDS = tuple(t.id for t in THEOREMS)
_BY_ID = {t.id: (i, t) for i, t in enumerate(THEOREMS)}


def get_theorem(theorem_id: str) -> tuple[int, Theorem]:
    try:
        return _BY_ID[theorem_id]
    except KeyError:
        raise StructuralError(
            f"unknown theorem {theorem_id!r}; choose from {', '.join(THEOREM_IDS)}"
        ) from None


def trial_rng(seed: int, position: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([seed, position, trial])


def generate_instance(theorem_id: str, seed: int, trial: int = 0) -> dict:
    position, theorem = get_theorem(theorem_id)
    return theorem.generate(trial_rng(seed, position, trial))


def _section(theorem: Theorem, tol: float) -> dict:
    return {
        "theorem": theorem.id,
        "tolerance": tol,
        "trials": 0,
        "passed": 0,
        "failed": 0,
        "inapplicable": 0,
        "max_deviation": 0.0,
        "first_failure": None,
        "notes": [],
    }


def _record(section: dict, trial: int, report: CheckReport):
    section["trials"] += 1
    section["max_deviation"] = max(section["max_deviation"], report.max_deviation)
    if report.passed:
        section["passed"] += 1
        return
    section["failed"] += 1
    if section["first_failure"] is None:
        section["first_failure"] = {
            "trial": trial,
            "max_deviation": report.max_deviation,
            "witness": report.witness,
            "instance": report.instance,
        }


def run_theorem(
    theorem_id: str,
    *,
    seed: int = 0,
    trials: int = 1,
    tolerance: float | None = None,
    bundle: Bundle | None = None,
) -> dict:
    """Run one checker over seeded instances (or once on a fixture bundle)."""
    position, theorem = get_theorem(theorem_id)
    tol = theorem.tolerance if tolerance is None else float(tolerance)
    section = _section(theorem, tol)
    if bundle is not None:
        instance = theorem.from_bundle(bundle)
        try:
            report = theorem.run(instance, tol)
        except DomainError as exc:
            section["trials"] += 1
            section["inapplicable"] += 1
            section["notes"].append(f"inapplicable: {exc}")
            log.info("%s inapplicable on fixture: %s", theorem.id, exc)
        else:
            _record(section, 0, report)
        return section
    for trial in range(trials):
        instance = theorem.generate(trial_rng(seed, position, trial))
        try:
            report = theorem.run(instance, tol)
        except MeasureError as exc:
            # generated instances satisfy the preconditions by construction
            section["trials"] += 1
            section["failed"] += 1
            section["notes"].append(f"trial {trial}: generator produced an invalid instance: {exc}")
            continue
        log.debug("%s trial %d deviation %.3e", theorem.id, trial, report.max_deviation)
        _record(section, trial, report)
    return section


def run_suite(
    theorem_ids=THEOREM_IDS,
    *,
    seed: int = 0,
    trials: int = 1,
    tolerances: dict | None = None,
    bundle: Bundle | None = None,
) -> dict:
    tolerances = tolerances or {}
    unknown = set(tolerances) - set(THEOREM_IDS)
    if unknown:
        raise StructuralError(f"tolerance override for unknown theorem(s): {', '.join(sorted(unknown))}")
    ordered = sorted(theorem_ids, key=lambda t: get_theorem(t)[0])
    sections = [
        run_theorem(t, seed=seed, trials=trials, tolerance=tolerances.get(t), bundle=bundle)
        for t in ordered
    ]
    return {
        "seed": seed,
        "trials": trials if bundle is None else 1,
        "source": "generated" if bundle is None else "fixture",
        "sections": sections,
        "pass": all(s["failed"] == 0 for s in sections),
    }
