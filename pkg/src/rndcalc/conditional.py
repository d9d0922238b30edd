"""Conditional kernels, joint measures, marginals, and the Bayes-type identities.

A :class:`ConditionalKernel` is a row-stochastic matrix whose row ``x`` is the
law of the outcome given input ``x``.  Joints carry an explicit orientation
tag: an ``XY`` joint lives on ``X x Y`` while its swap lives on ``Y x X``, so
mixing the two is caught as a space mismatch instead of silently transposing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import DomainError, StructuralError
from .measure import (
    DISCRETE_TOL,
    PARSE_MASS_TOL,
    ProbabilityMeasure,
    SampleSpace,
    SignedMeasure,
    measure_to_dict,
    product,
    product_space,
)
from .report import CheckReport
from .rnd import as_equal, rnd

Orientation = Literal["XY", "YX"]


@dataclass(frozen=True, eq=False)
class ConditionalKernel:
    """Family of outcome laws on ``y_space`` indexed by the conditioning ``x_space``.

    ``synthetic`` flags rows that were filled in (uniformly) at conditioning
    points of zero probability; such rows never enter almost-sure comparisons.
    """

    x_space: SampleSpace
    y_space: SampleSpace
    matrix: np.ndarray
    synthetic: tuple[bool, ...] = field(default=())

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.float64)
        if m.shape != (self.x_space.size, self.y_space.size):
            raise StructuralError(
                f"kernel must be {self.x_space.size}x{self.y_space.size}, got {m.shape}"
            )
        if not np.all(np.isfinite(m)) or np.any(m < 0):
            raise DomainError("kernel entries must be finite and nonnegative")
        sums = m.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > PARSE_MASS_TOL)
        if bad.size:
            label = self.x_space.labels[int(bad[0])]
            raise DomainError(f"kernel row {label!r} sums to {sums[bad[0]]!r}", witness=label)
        m = m / sums[:, None]
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        synthetic = tuple(bool(s) for s in self.synthetic) or (False,) * self.x_space.size
        if len(synthetic) != self.x_space.size:
            raise StructuralError("synthetic flags must match the number of rows")
        object.__setattr__(self, "synthetic", synthetic)

    @classmethod
    def from_rows(cls, rows, x_labels=None, y_labels=None) -> "ConditionalKernel":
        m = np.asarray(rows, dtype=np.float64)
        x_space = SampleSpace(tuple(x_labels)) if x_labels else SampleSpace.of_size(m.shape[0])
        y_space = SampleSpace(tuple(y_labels)) if y_labels else SampleSpace.of_size(m.shape[1])
        return cls(x_space, y_space, m)

    def row(self, i: int) -> ProbabilityMeasure:
        return ProbabilityMeasure(self.y_space, self.matrix[i])

    def rows(self) -> list[ProbabilityMeasure]:
        return [self.row(i) for i in range(self.x_space.size)]

    def to_dict(self) -> dict:
        return {
            "x_space": list(self.x_space.labels),
            "y_space": list(self.y_space.labels),
            "rows": self.matrix.tolist(),
        }


def binary_symmetric_channel(crossover: float) -> ConditionalKernel:
    e = float(crossover)
    return ConditionalKernel.from_rows([[1 - e, e], [e, 1 - e]])


def identity_kernel(n: int) -> ConditionalKernel:
    return ConditionalKernel.from_rows(np.eye(n))


def constant_kernel(nx: int, q) -> ConditionalKernel:
    q = np.asarray(q, dtype=np.float64)
    return ConditionalKernel.from_rows(np.tile(q, (nx, 1)))


@dataclass(frozen=True, eq=False)
class JointMeasure:
    """Probability measure on ``X x Y`` (orientation ``XY``) or ``Y x X`` (``YX``).

    ``weights`` is indexed in orientation order: ``(|X|, |Y|)`` for ``XY`` and
    ``(|Y|, |X|)`` for ``YX``.
    """

    x_space: SampleSpace
    y_space: SampleSpace
    weights: np.ndarray
    orientation: Orientation = "XY"

    def __post_init__(self):
        if self.orientation not in ("XY", "YX"):
            raise StructuralError(f"orientation must be 'XY' or 'YX', got {self.orientation!r}")
        w = np.array(self.weights, dtype=np.float64)
        nx, ny = self.x_space.size, self.y_space.size
        expected = (nx, ny) if self.orientation == "XY" else (ny, nx)
        if w.shape != expected:
            raise StructuralError(f"{self.orientation} joint must have shape {expected}, got {w.shape}")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise DomainError("joint weights must be finite and nonnegative")
        if abs(w.sum() - 1.0) > PARSE_MASS_TOL:
            raise DomainError(f"joint weights sum to {w.sum()!r}, not 1")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def xy(self) -> np.ndarray:
        """Weights indexed ``[x, y]`` whatever the orientation."""
        return self.weights if self.orientation == "XY" else self.weights.T

    @property
    def space(self) -> SampleSpace:
        if self.orientation == "XY":
            return product_space(self.x_space, self.y_space)
        return product_space(self.y_space, self.x_space)

    def as_measure(self) -> SignedMeasure:
        """The joint as a flat measure on its (oriented) product space."""
        return SignedMeasure(self.space, self.weights.ravel())

    def to_dict(self) -> dict:
        return {
            "x_space": list(self.x_space.labels),
            "y_space": list(self.y_space.labels),
            "weights": self.weights.tolist(),
            "orientation": self.orientation,
        }


def joint_from(kernel: ConditionalKernel, P_X: SignedMeasure) -> JointMeasure:
    """``P_XY({(x, y)}) = P_X({x}) * P_{Y|X=x}({y})``."""
    if P_X.space != kernel.x_space:
        raise StructuralError("input measure must live on the kernel's conditioning space")
    return JointMeasure(kernel.x_space, kernel.y_space, P_X.weights[:, None] * kernel.matrix)


def swap(J: JointMeasure) -> JointMeasure:
    flipped: Orientation = "YX" if J.orientation == "XY" else "XY"
    return JointMeasure(J.x_space, J.y_space, J.weights.T, flipped)


def marginal_x(J: JointMeasure) -> ProbabilityMeasure:
    return ProbabilityMeasure(J.x_space, J.xy.sum(axis=1))


def marginal_y(J: JointMeasure) -> ProbabilityMeasure:
    return ProbabilityMeasure(J.y_space, J.xy.sum(axis=0))


def output_marginal(kernel: ConditionalKernel, P_X: SignedMeasure) -> ProbabilityMeasure:
    """Total probability: ``P_Y = sum_x P_X(x) P_{Y|X=x}``."""
    return ProbabilityMeasure(kernel.y_space, P_X.weights @ kernel.matrix)


def conditional_from_joint(J: JointMeasure, given: Literal["x", "y"] = "y") -> ConditionalKernel:
    """Disintegrate a joint into the conditional law given one coordinate.

    For ``given="y"`` the result is ``P_{X|Y}``: its ``x_space`` is ``Y`` and
    its rows are laws on ``X``.  Rows at zero-probability conditioning points
    are uniform and flagged synthetic.
    """
    if given not in ("x", "y"):
        raise StructuralError(f"given must be 'x' or 'y', got {given!r}")
    table = J.xy.T if given == "y" else J.xy
    cond_space, out_space = (J.y_space, J.x_space) if given == "y" else (J.x_space, J.y_space)
    mass = table.sum(axis=1)
    rows = np.full(table.shape, 1.0 / table.shape[1])
    charged = mass > 0
    rows[charged] = table[charged] / mass[charged, None]
    return ConditionalKernel(cond_space, out_space, rows, tuple(~charged))


def _kernel_ac(kernel, ref, *, reverse=False, skip=None, name="P_{Y|X=x} << P_Y"):
    """Check ``row_i << ref`` (or ``ref << row_i``) for every non-skipped row."""
    for i in range(kernel.x_space.size):
        if skip is not None and skip[i]:
            continue
        row = kernel.matrix[i]
        a, b = (ref.weights, row) if reverse else (row, ref.weights)
        bad = np.flatnonzero((b == 0) & (a != 0))
        if bad.size:
            x = kernel.x_space.labels[i]
            y = kernel.y_space.labels[int(bad[0])]
            raise DomainError(
                f"absolute continuity {name} fails at ({x}, {y})", witness=[x, y]
            )


def _instance(kernel, P_X):
    return {"kernel": kernel.to_dict(), "P_X": measure_to_dict(P_X)}


def check_unit_measure(
    kernel: ConditionalKernel, P_X: SignedMeasure, tol: float = DISCRETE_TOL
) -> CheckReport:
    """``sum_x (dP_{Y|X=x}/dP_Y)(y) P_X(x) == 1`` at every ``y`` charged by ``P_Y``."""
    P_Y = output_marginal(kernel, P_X)
    _kernel_ac(kernel, P_Y)
    ratios = np.stack([rnd(row, P_Y).values for row in kernel.rows()])
    integral = P_X.weights @ ratios
    verdict = as_equal(integral, np.ones(P_Y.size), P_Y, tol)
    return CheckReport(
        theorem="unit_measure",
        instance=_instance(kernel, P_X),
        max_deviation=verdict.max_deviation,
        tolerance=tol,
        passed=verdict.equal,
        witness=verdict.witness,
        details={"integral": integral},
    )


@dataclass(frozen=True)
class _BayesPieces:
    P_Y: ProbabilityMeasure
    joint: JointMeasure
    backward: ConditionalKernel
    product_xy: SignedMeasure
    product_yx: SignedMeasure


def _bayes_pieces(kernel, P_X) -> _BayesPieces:
    J = joint_from(kernel, P_X)
    P_Y = marginal_y(J)
    return _BayesPieces(
        P_Y=P_Y,
        joint=J,
        backward=conditional_from_joint(J, "y"),
        product_xy=product(P_X, P_Y),
        product_yx=product(P_Y, P_X),
    )


def _ratio(num: SignedMeasure, den: SignedMeasure) -> np.ndarray:
    """Weight ratio with canonical zeros; callers check absolute continuity."""
    out = np.zeros(den.size)
    charged = den.weights != 0
    out[charged] = num.weights[charged] / den.weights[charged]
    return out


def bayes_quantities(kernel: ConditionalKernel, P_X: SignedMeasure) -> dict[str, np.ndarray]:
    """The four derivatives of the Bayes-like rule, each as an ``[x, y]`` table.

    Keys: ``joint`` (dP_XY/dP_XP_Y), ``backward`` (dP_{X|Y=y}/dP_X),
    ``forward`` (dP_{Y|X=x}/dP_Y), ``swapped`` (dP_YX/dP_YP_X read at (y, x)).
    """
    pc = _bayes_pieces(kernel, P_X)
    nx, ny = kernel.x_space.size, kernel.y_space.size
    joint = _ratio(pc.joint.as_measure(), pc.product_xy).reshape(nx, ny)
    backward = np.stack(
        [_ratio(pc.backward.row(j), P_X) for j in range(ny)], axis=1
    )
    forward = np.stack([_ratio(row, pc.P_Y) for row in kernel.rows()])
    swapped = _ratio(swap(pc.joint).as_measure(), pc.product_yx).reshape(ny, nx).T
    return {"joint": joint, "backward": backward, "forward": forward, "swapped": swapped}


def inverse_bayes_quantities(kernel: ConditionalKernel, P_X: SignedMeasure) -> dict[str, np.ndarray]:
    """The four derivatives of the inverse Bayes-like rule as ``[x, y]`` tables.

    Keys: ``joint`` (dP_XP_Y/dP_XY), ``backward`` (dP_X/dP_{X|Y=y}),
    ``forward`` (dP_Y/dP_{Y|X=x}), ``swapped`` (dP_YP_X/dP_YX read at (y, x)).
    """
    pc = _bayes_pieces(kernel, P_X)
    nx, ny = kernel.x_space.size, kernel.y_space.size
    joint = _ratio(pc.product_xy, pc.joint.as_measure()).reshape(nx, ny)
    backward = np.stack(
        [_ratio(P_X, pc.backward.row(j)) for j in range(ny)], axis=1
    )
    forward = np.stack([_ratio(pc.P_Y, row) for row in kernel.rows()])
    swapped = _ratio(pc.product_yx, swap(pc.joint).as_measure()).reshape(ny, nx).T
    return {"joint": joint, "backward": backward, "forward": forward, "swapped": swapped}


def _four_way(quantities, reference: SignedMeasure, tol):
    base = quantities["joint"].ravel()
    return [
        as_equal(base, quantities[key].ravel(), reference, tol)
        for key in ("backward", "forward", "swapped")
    ]


def _report(theorem, kernel, P_X, verdicts, tol, details=None):
    worst = max(verdicts, key=lambda v: v.max_deviation)
    return CheckReport(
        theorem=theorem,
        instance=_instance(kernel, P_X),
        max_deviation=worst.max_deviation,
        tolerance=tol,
        passed=all(v.equal for v in verdicts),
        witness=worst.witness,
        details=details or {},
    )


def check_bayes_like(
    kernel: ConditionalKernel, P_X: SignedMeasure, tol: float = DISCRETE_TOL
) -> CheckReport:
    """Four-way a.s.-(P_X x P_Y) equality of the Bayes-like rule."""
    pc = _bayes_pieces(kernel, P_X)
    _kernel_ac(kernel, pc.P_Y, name="P_{Y|X=x} << P_Y")
    _kernel_ac(pc.backward, P_X, skip=pc.backward.synthetic, name="P_{X|Y=y} << P_X")
    quantities = bayes_quantities(kernel, P_X)
    return _report("bayes_like", kernel, P_X, _four_way(quantities, pc.product_xy, tol), tol)


def remark_unit_integral(kernel: ConditionalKernel, P_X: SignedMeasure) -> np.ndarray:
    """Unit-measure integral recomputed through the inverse rule, one value per ``y``.

    Integrates ``(dP_{Y|X=x}/dP_Y)(y) * (dP_X/dP_{X|Y=y})(x)`` against
    ``P_{X|Y=y}``; entries at ``P_Y``-null ``y`` are 0.
    """
    pc = _bayes_pieces(kernel, P_X)
    forward = np.stack([rnd(row, pc.P_Y).values for row in kernel.rows()])
    out = np.zeros(kernel.y_space.size)
    for j in range(kernel.y_space.size):
        if pc.P_Y.weights[j] == 0:
            continue
        cond = pc.backward.row(j)
        out[j] = np.sum(forward[:, j] * rnd(P_X, cond).values * cond.weights)
    return out


def check_inverse_bayes(
    kernel: ConditionalKernel, P_X: SignedMeasure, tol: float = DISCRETE_TOL
) -> CheckReport:
    """Four-way a.s.-P_XY equality of the inverse Bayes-like rule.

    Also checks, at every point charged by ``P_XY``, that each inverse
    quantity times its Bayes-like counterpart is 1, and that the unit-measure
    integral rebuilt through the inverse rule equals 1 for every charged ``y``.
    """
    pc = _bayes_pieces(kernel, P_X)
    _kernel_ac(kernel, pc.P_Y, reverse=True, name="P_Y << P_{Y|X=x}")
    _kernel_ac(pc.backward, P_X, reverse=True, skip=pc.backward.synthetic, name="P_X << P_{X|Y=y}")
    inverse = inverse_bayes_quantities(kernel, P_X)
    reference = pc.joint.as_measure()
    verdicts = _four_way(inverse, reference, tol)

    # Bayes-side ratios are defined on the joint's support without extra assumptions
    forward_bayes = bayes_quantities(kernel, P_X)
    ones = np.ones(reference.size)
    reciprocity = [
        as_equal((inverse[k] * forward_bayes[k]).ravel(), ones, reference, tol)
        for k in ("joint", "backward", "forward", "swapped")
    ]
    remark = as_equal(remark_unit_integral(kernel, P_X), np.ones(pc.P_Y.size), pc.P_Y, tol)
    details = {
        "four_way_max_deviation": max(v.max_deviation for v in verdicts),
        "reciprocity_max_deviation": max(v.max_deviation for v in reciprocity),
        "remark_max_deviation": remark.max_deviation,
    }
    return _report("inverse_bayes", kernel, P_X, verdicts + reciprocity + [remark], tol, details)
