"""JSON file formats for measures, kernels, joints, densities and fixture bundles.

Measure:  {"space": [...], "weights": [...], "kind": "signed" | "probability"}
Kernel:   {"x_space": [...], "y_space": [...], "rows": [[...], ...]}
Joint:    kernel-style spaces plus "weights" and "orientation": "XY" | "YX"
Density:  {"a": f, "b": f, "n": int, "samples": [...], "kind": "probability" | "finite"}

A bundle groups the inputs of one checker run; see :func:`load_bundle`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .conditional import ConditionalKernel, JointMeasure
from .density import DensityMeasure
from .errors import DomainError, StructuralError
from .measure import (
    PARSE_MASS_TOL,
    ProbabilityMeasure,
    SampleSpace,
    SignedMeasure,
    measure_to_dict,
)


class ParseError(StructuralError):
    """Input file is not valid JSON or does not match the expected schema."""


def _reject_constant(name):
    raise ParseError(f"non-finite number {name} is not allowed")


def read_json(source) -> Any:
    """Parse a JSON file, or pass an already-decoded object through."""
    if isinstance(source, (dict, list)):
        return source
    try:
        text = Path(source).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {source}: {exc}") from exc
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in {source}: {exc}") from exc


def _require(obj, *keys):
    if not isinstance(obj, dict):
        raise ParseError(f"expected a JSON object, got {type(obj).__name__}")
    missing = [k for k in keys if k not in obj]
    if missing:
        raise ParseError(f"missing field(s): {', '.join(missing)}")


def _floats(values, what) -> np.ndarray:
    try:
        arr = np.asarray(values, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{what} must be numbers") from exc
    if not np.all(np.isfinite(arr)):
        raise ParseError(f"{what} must be finite")
    return arr


def measure_from_dict(obj) -> SignedMeasure:
    _require(obj, "space", "weights")
    space = SampleSpace(tuple(obj["space"]))
    w = _floats(obj["weights"], "weights")
    kind = obj.get("kind", "signed")
    if kind == "signed":
        return SignedMeasure(space, w)
    if kind != "probability":
        raise ParseError(f"unknown measure kind {kind!r}")
    if np.any(w < 0):
        raise DomainError("probability weights must be nonnegative")
    if abs(w.sum() - 1.0) > PARSE_MASS_TOL:
        raise DomainError(f"probability weights sum to {float(w.sum())!r}, outside 1 +/- {PARSE_MASS_TOL}")
    return ProbabilityMeasure(space, w)


def kernel_from_dict(obj) -> ConditionalKernel:
    _require(obj, "x_space", "y_space", "rows")
    return ConditionalKernel(
        SampleSpace(tuple(obj["x_space"])),
        SampleSpace(tuple(obj["y_space"])),
        _floats(obj["rows"], "kernel rows"),
    )


def joint_from_dict(obj) -> JointMeasure:
    _require(obj, "x_space", "y_space", "weights", "orientation")
    return JointMeasure(
        SampleSpace(tuple(obj["x_space"])),
        SampleSpace(tuple(obj["y_space"])),
        _floats(obj["weights"], "joint weights"),
        obj["orientation"],
    )


def density_from_dict(obj) -> DensityMeasure:
    _require(obj, "a", "b", "samples")
    samples = _floats(obj["samples"], "density samples")
    if "n" in obj and int(obj["n"]) != samples.size:
        raise ParseError(f"n={obj['n']} but {samples.size} samples given")
    return DensityMeasure(float(obj["a"]), float(obj["b"]), samples, obj.get("kind", "probability"))


def load_measure(source) -> SignedMeasure:
    return measure_from_dict(read_json(source))


def load_kernel(source) -> ConditionalKernel:
    return kernel_from_dict(read_json(source))


def load_density(source) -> DensityMeasure:
    return density_from_dict(read_json(source))


@dataclass
class Bundle:
    """Inputs for one checker run, gathered from one or more fixture files.

    Recognised keys: ``measures`` (list), ``f``, ``c``, ``coeffs``,
    ``sequence`` (list of measures), ``limit``, ``kernel``, ``px``, ``q``
    (list of measures).  A bare measure file contributes one entry to
    ``measures``; a bare kernel file sets ``kernel``.
    """

    measures: list = field(default_factory=list)
    f: list | None = None
    c: float | None = None
    coeffs: list | None = None
    sequence: list = field(default_factory=list)
    limit: SignedMeasure | None = None
    kernel: ConditionalKernel | None = None
    px: SignedMeasure | None = None
    q: list = field(default_factory=list)

    def merge(self, obj: dict):
        if "weights" in obj and "space" in obj:
            self.measures.append(measure_from_dict(obj))
            return
        if "rows" in obj and "x_space" in obj:
            self.kernel = kernel_from_dict(obj)
            return
        known = {"measures", "f", "c", "coeffs", "sequence", "limit", "kernel", "px", "q"}
        unknown = set(obj) - known
        if unknown:
            raise ParseError(f"unknown bundle field(s): {', '.join(sorted(unknown))}")
        self.measures += [measure_from_dict(m) for m in obj.get("measures", [])]
        self.sequence += [measure_from_dict(m) for m in obj.get("sequence", [])]
        self.q += [measure_from_dict(m) for m in obj.get("q", [])]
        if "f" in obj:
            self.f = _floats(obj["f"], "f").tolist()
        if "c" in obj:
            self.c = float(_floats(obj["c"], "c"))
        if "coeffs" in obj:
            self.coeffs = _floats(obj["coeffs"], "coeffs").tolist()
        if "limit" in obj:
            self.limit = measure_from_dict(obj["limit"])
        if "kernel" in obj:
            self.kernel = kernel_from_dict(obj["kernel"])
        if "px" in obj:
            self.px = measure_from_dict(obj["px"])


def load_bundle(*sources) -> Bundle:
    bundle = Bundle()
    for src in sources:
        obj = read_json(src)
        if not isinstance(obj, dict):
            raise ParseError("fixture files must contain a JSON object")
        bundle.merge(obj)
    return bundle


def bundle_to_dict(**parts) -> dict:
    """Serialize checker inputs into bundle form (inverse of :func:`load_bundle`)."""
    out = {}
    for key, value in parts.items():
        if value is None:
            continue
        if isinstance(value, SignedMeasure):
            out[key] = measure_to_dict(value)
        elif isinstance(value, ConditionalKernel):
            out[key] = value.to_dict()
        elif isinstance(value, (list, tuple)) and value and isinstance(value[0], SignedMeasure):
            out[key] = [measure_to_dict(m) for m in value]
        else:
            out[key] = np.asarray(value).tolist() if isinstance(value, np.ndarray) else value
    return out
