"""KL divergence, mutual and lautum information, and the reference-measure identity.

All logarithms are natural (nats).  Terms at points that the integrating
measure does not charge are skipped, which encodes ``0 * log 0 = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .conditional import ConditionalKernel, output_marginal
from .errors import DomainError, StructuralError
from .measure import SignedMeasure, measure_to_dict, require_absolutely_continuous
from .report import CheckReport
from .rnd import rnd

IDENTITY_TOL = 1e-9


@dataclass(frozen=True)
class InfoResult:
    """A value in nats and its per-point contributions (``[x, y]`` table)."""

    value: float
    decomposition: np.ndarray | None = None


def _log_ratio_terms(weights: np.ndarray, ratio: np.ndarray) -> np.ndarray:
    terms = np.zeros_like(weights)
    charged = weights != 0
    terms[charged] = weights[charged] * np.log(ratio[charged])
    return terms


def kl_divergence(P: SignedMeasure, Q: SignedMeasure) -> float:
    """``sum_x P(x) log(P(x)/Q(x))`` over the support of ``P``."""
    if np.any(P.weights < 0) or np.any(Q.weights < 0):
        raise DomainError("KL divergence needs nonnegative measures")
    require_absolutely_continuous(P, Q)
    return float(_log_ratio_terms(P.weights, rnd(P, Q).values).sum())


def _check_rows(kernel: ConditionalKernel, P_Y, *, rows_under_marginal: bool):
    for i, row in enumerate(kernel.rows()):
        x = kernel.x_space.labels[i]
        try:
            if rows_under_marginal:
                require_absolutely_continuous(row, P_Y, f"P_{{Y|X={x}}} << P_Y")
            else:
                require_absolutely_continuous(P_Y, row, f"P_Y << P_{{Y|X={x}}}")
        except DomainError as exc:
            raise DomainError(str(exc), witness=[x, exc.witness]) from exc


def mutual_information_terms(kernel: ConditionalKernel, P_X: SignedMeasure) -> InfoResult:
    P_Y = output_marginal(kernel, P_X)
    _check_rows(kernel, P_Y, rows_under_marginal=True)
    table = np.stack(
        [
            P_X.weights[i] * _log_ratio_terms(row.weights, rnd(row, P_Y).values)
            for i, row in enumerate(kernel.rows())
        ]
    )
    return InfoResult(float(table.sum()), table)


def lautum_information_terms(kernel: ConditionalKernel, P_X: SignedMeasure) -> InfoResult:
    P_Y = output_marginal(kernel, P_X)
    _check_rows(kernel, P_Y, rows_under_marginal=False)
    table = np.stack(
        [
            P_X.weights[i] * _log_ratio_terms(P_Y.weights, rnd(P_Y, row).values)
            for i, row in enumerate(kernel.rows())
        ]
    )
    return InfoResult(float(table.sum()), table)


def mutual_information(kernel: ConditionalKernel, P_X: SignedMeasure) -> float:
    """``sum_x P_X(x) D(P_{Y|X=x} || P_Y)``."""
    return mutual_information_terms(kernel, P_X).value


def lautum_information(kernel: ConditionalKernel, P_X: SignedMeasure) -> float:
    """``sum_x P_X(x) D(P_Y || P_{Y|X=x})``; undefined unless every row charges supp(P_Y)."""
    return lautum_information_terms(kernel, P_X).value


def _check_identity_chain(kernel, P_Y, Q):
    if Q.space != kernel.y_space:
        raise StructuralError("reference measure must live on the kernel's outcome space")
    if np.any(Q.weights < 0):
        raise DomainError("reference measure Q must be nonnegative")
    for i, row in enumerate(kernel.rows()):
        x = kernel.x_space.labels[i]
        links = (
            (P_Y, row, f"P_Y << P_{{Y|X={x}}}"),
            (row, Q, f"P_{{Y|X={x}}} << Q"),
        )
        for a, b, name in links:
            try:
                require_absolutely_continuous(a, b, name)
            except DomainError as exc:
                raise DomainError(str(exc), witness={"link": name, "point": exc.witness}) from exc
    try:
        require_absolutely_continuous(Q, P_Y, "Q << P_Y")
    except DomainError as exc:
        raise DomainError(str(exc), witness={"link": "Q << P_Y", "point": exc.witness}) from exc


def identity_rhs(kernel: ConditionalKernel, P_X: SignedMeasure, Q: SignedMeasure) -> float:
    """Difference of the expected log-likelihood ratio ``log dP_{Y|X=x}/dQ``
    under the joint and under the product of marginals.
    """
    P_Y = output_marginal(kernel, P_X)
    _check_identity_chain(kernel, P_Y, Q)
    under_joint = 0.0
    under_product = 0.0
    for i, row in enumerate(kernel.rows()):
        px = P_X.weights[i]
        if px == 0:
            continue
        log_ratio = np.zeros(Q.size)
        g = rnd(row, Q).values
        positive = g > 0
        log_ratio[positive] = np.log(g[positive])
        on_row = row.weights != 0
        on_marginal = P_Y.weights != 0
        under_joint += px * float(np.dot(row.weights[on_row], log_ratio[on_row]))
        under_product += px * float(np.dot(P_Y.weights[on_marginal], log_ratio[on_marginal]))
    return under_joint - under_product


def check_il_identity(
    kernel: ConditionalKernel,
    P_X: SignedMeasure,
    Q_list: Sequence[SignedMeasure],
    tol: float = IDENTITY_TOL,
) -> CheckReport:
    """``I + L == identity_rhs(Q)`` for every reference measure ``Q`` in ``Q_list``."""
    if not Q_list:
        raise StructuralError("at least one reference measure is required")
    rhs = [identity_rhs(kernel, P_X, Q) for Q in Q_list]
    I = mutual_information(kernel, P_X)
    L = lautum_information(kernel, P_X)
    devs = [abs(I + L - r) for r in rhs]
    worst = int(np.argmax(devs))
    return CheckReport(
        theorem="il_identity",
        instance={
            "kernel": kernel.to_dict(),
            "P_X": measure_to_dict(P_X),
            "Q": [measure_to_dict(Q) for Q in Q_list],
        },
        max_deviation=float(devs[worst]),
        tolerance=tol,
        passed=max(devs) <= tol,
        witness=worst if devs[worst] > tol else None,
        details={"I": I, "L": L, "rhs": rhs},
    )
