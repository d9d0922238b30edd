"""Checker reports and their JSON form."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np


def jsonable(obj: Any) -> Any:
    """Convert numpy scalars/arrays and tuples into plain JSON values."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def dumps(obj: Any) -> str:
    # float repr is the shortest round-trip form, so output is reproducible
    return json.dumps(jsonable(obj), indent=2, allow_nan=False) + "\n"


@dataclass
class CheckReport:
    theorem: str
    instance: dict
    max_deviation: float
    tolerance: float
    passed: bool
    witness: Any = None
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "theorem": self.theorem,
            "instance": self.instance,
            "max_deviation": self.max_deviation,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "witness": self.witness,
        }
        if self.details:
            out["details"] = self.details
        return jsonable(out)

    def to_json(self) -> str:
        return dumps(self.to_dict())
