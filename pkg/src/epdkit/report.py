"""Residual reports and deterministic number formatting for artifacts."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

SCHEMA_VERSION = 1


def fmt(x) -> str:
    """17 significant digits, enough to round-trip a double."""
    return format(float(x), ".17g")


def _jsonable(v):
    if isinstance(v, complex):
        return [_jsonable(v.real), _jsonable(v.imag)]
    if isinstance(v, (np.floating, float)):
        v = float(v)
        if not math.isfinite(v):
            return None
        return float(fmt(v))
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.complexfloating):
        return _jsonable(complex(v))
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def dumps(obj) -> str:
    d = {"schema": SCHEMA_VERSION, **_jsonable(obj)}
    return json.dumps(d, indent=2, sort_keys=True)


@dataclass
class ResidualReport:
    identity: str
    max: float
    mean: float
    grid: tuple = ()
    step: float = float("nan")
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_values(cls, identity, values, grid=(), step=float("nan"), **extra):
        a = np.abs(np.asarray(values, dtype=complex)).ravel()
        if a.size == 0:
            return cls(identity, 0.0, 0.0, tuple(grid), float(step), extra)
        return cls(identity, float(a.max()), float(a.mean()), tuple(grid), float(step), extra)

    def ok(self, tol: float) -> bool:
        return self.max <= tol

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return dumps(self.to_dict())


def empirical_order(errors, steps) -> np.ndarray:
    """log2-style slopes between consecutive (step, error) pairs."""
    e = np.asarray(errors, dtype=float)
    h = np.asarray(steps, dtype=float)
    return np.log(e[:-1] / e[1:]) / np.log(h[:-1] / h[1:])
