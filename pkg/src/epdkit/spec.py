"""Descriptions of solutions W(z, zb) of E(1/2,1/2).

A solution is fixed by two densities phi, psi and the contours they live on.
Four families are supported, plus sums of them:

* :class:`Monomial`      phi = sum x_k lam^k (k >= 1), psi = sum y_k lam^k (k >= 0),
                         large circle; values carry the 1/(2 pi i) normalization.
* :class:`InversePower`  phi = sum x_k lam^-k, psi = sum y_k lam^-k (k >= 1),
                         small circle around the origin; same normalization.
* :class:`Delta`         point masses on the real axis.
* :class:`Sampled`       real-axis densities given as callables.
* :class:`Composite`     a sum of the above.

``log_scale`` is the constant c in log((z - zb) / (c (lam - z)(lam - zb))).
c = 1 is the plain general solution; c = 2i makes the logarithm real on
zb = conj(z), real lam, which is what makes psi-terms real-valued.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ConfigError

__all__ = [
    "Monomial",
    "InversePower",
    "Delta",
    "Sampled",
    "Composite",
    "FlowLabel",
    "SolutionSpec",
    "basis_spec",
    "get_coefficient",
    "with_coefficient",
    "has_real_gradient",
    "spec_from_dict",
    "spec_to_dict",
    "load_spec",
    "gaussian_density",
    "table_density",
]

FAMILIES = ("monomial-x", "monomial-y", "inverse-x", "inverse-y", "delta-x", "delta-y")


def _floats(seq) -> tuple:
    out = tuple(float(v) for v in seq)
    if not all(np.isfinite(out)):
        raise ValueError("coefficients must be finite")
    return out


@dataclass(frozen=True)
class Monomial:
    x: tuple = ()  # x_1, x_2, ...
    y: tuple = ()  # y_0, y_1, ...
    log_scale: complex = 1.0
    nodes: int = 256
    radius: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "x", _floats(self.x))
        object.__setattr__(self, "y", _floats(self.y))


@dataclass(frozen=True)
class InversePower:
    x: tuple = ()  # x_1, x_2, ... multiplying lam^-1, lam^-2, ...
    y: tuple = ()  # y_1, y_2, ...
    log_scale: complex = 1.0
    nodes: int = 256
    radius: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "x", _floats(self.x))
        object.__setattr__(self, "y", _floats(self.y))


@dataclass(frozen=True)
class Delta:
    points_phi: tuple = ()  # ((weight, node), ...)
    points_psi: tuple = ()
    log_scale: complex = 1.0

    def __post_init__(self):
        pp = tuple((float(w), float(n)) for w, n in self.points_phi)
        ps = tuple((float(w), float(n)) for w, n in self.points_psi)
        for pts in (pp, ps):
            nodes = [n for _, n in pts]
            if len(set(nodes)) != len(nodes):
                raise ValueError("delta nodes must be pairwise distinct")
        object.__setattr__(self, "points_phi", pp)
        object.__setattr__(self, "points_psi", ps)


@dataclass(frozen=True)
class Sampled:
    phi: Optional[Callable] = None
    psi: Optional[Callable] = None
    support: tuple = (-1.0, 1.0)
    log_scale: complex = 1.0
    nodes: int = 16
    cells: int = 64
    source: Optional[dict] = field(default=None, compare=False)

    def __post_init__(self):
        a, b = float(self.support[0]), float(self.support[1])
        if not a < b:
            raise ValueError("support must satisfy a < b")
        object.__setattr__(self, "support", (a, b))


@dataclass(frozen=True)
class Composite:
    parts: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))


SolutionSpec = Monomial | InversePower | Delta | Sampled | Composite


@dataclass(frozen=True)
class FlowLabel:
    """A deformation parameter: which coefficient of which family."""

    family: str
    index: int

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown flow family {self.family!r}")
        lo = 0 if self.family in ("monomial-y", "delta-x", "delta-y") else 1
        if self.index < lo:
            raise ValueError(f"index {self.index} out of range for {self.family}")

    def __str__(self):
        return f"{self.family}:{self.index}"

    @classmethod
    def parse(cls, text: str) -> "FlowLabel":
        fam, _, idx = text.partition(":")
        try:
            return cls(fam, int(idx))
        except ValueError as exc:
            raise ConfigError(f"bad flow label {text!r}") from exc


_FAMILY_TYPE = {
    "monomial": Monomial,
    "inverse": InversePower,
    "delta": Delta,
}


def _locate(spec, label: FlowLabel):
    """Return (part, position-in-composite or None) holding the label's family."""
    kind = _FAMILY_TYPE[label.family.split("-")[0]]
    if isinstance(spec, kind):
        return spec, None
    if isinstance(spec, Composite):
        for i, part in enumerate(spec.parts):
            if isinstance(part, kind):
                return part, i
    raise ValueError(f"spec has no {label.family} component")


def _slot(part, label: FlowLabel):
    fam = label.family
    if fam == "monomial-x" or fam == "inverse-x":
        return "x", label.index - 1
    if fam == "monomial-y":
        return "y", label.index
    if fam == "inverse-y":
        return "y", label.index - 1
    if fam == "delta-x":
        return "points_phi", label.index
    return "points_psi", label.index


def get_coefficient(spec, label: FlowLabel) -> float:
    part, _ = _locate(spec, label)
    attr, i = _slot(part, label)
    seq = getattr(part, attr)
    if i >= len(seq):
        if attr.startswith("points"):
            raise IndexError(f"{label} out of range")
        return 0.0
    return seq[i][0] if attr.startswith("points") else seq[i]


def with_coefficient(spec, label: FlowLabel, value: float):
    """Copy of ``spec`` with the coefficient addressed by ``label`` set to value."""
    part, pos = _locate(spec, label)
    attr, i = _slot(part, label)
    seq = list(getattr(part, attr))
    if attr.startswith("points"):
        if i >= len(seq):
            raise IndexError(f"{label} out of range")
        seq[i] = (float(value), seq[i][1])
    else:
        seq.extend([0.0] * (i + 1 - len(seq)))
        seq[i] = float(value)
    new_part = replace(part, **{attr: tuple(seq)})
    if pos is None:
        return new_part
    parts = list(spec.parts)
    parts[pos] = new_part
    return Composite(tuple(parts))


def basis_spec(spec, label: FlowLabel):
    """Unit spec for the basis function multiplying the coefficient ``label``."""
    part, _ = _locate(spec, label)
    attr, i = _slot(part, label)
    if isinstance(part, Delta):
        seq = getattr(part, attr)
        if i >= len(seq):
            raise IndexError(f"{label} out of range")
        pt = ((1.0, seq[i][1]),)
        if attr == "points_phi":
            return Delta(points_phi=pt, log_scale=part.log_scale)
        return Delta(points_psi=pt, log_scale=part.log_scale)
    coeffs = [0.0] * (i + 1)
    coeffs[i] = 1.0
    if attr == "x":
        return replace(part, x=tuple(coeffs), y=())
    return replace(part, x=(), y=tuple(coeffs))


def has_real_gradient(spec) -> bool:
    """True when W_zb = conj(W_z) on zb = conj(z) for every z.

    Holds for real coefficients when the psi-logarithm is real (c = 2i), and
    for c = 1 when the only psi-term is the monomial y_0 (its imaginary part
    is a constant).
    """
    if isinstance(spec, Composite):
        return all(has_real_gradient(p) for p in spec.parts)
    if isinstance(spec, Sampled):
        return spec.psi is None or np.isclose(spec.log_scale, 2j)
    c = complex(spec.log_scale)
    log_real = np.isclose(c, 2j)
    if isinstance(spec, Monomial):
        return log_real or all(v == 0 for v in spec.y[1:])
    if isinstance(spec, InversePower):
        return log_real or all(v == 0 for v in spec.y)
    if isinstance(spec, Delta):
        return log_real or all(w == 0 for w, _ in spec.points_psi)
    return False


# --- densities built from JSON ------------------------------------------------


def gaussian_density(terms: Sequence[Sequence[float]]) -> Callable:
    """Sum of amp * exp(-((lam - center)/width)^2 / 2)."""
    arr = np.asarray(terms, dtype=float).reshape(-1, 3)

    def density(lam):
        lam = np.asarray(lam)
        out = np.zeros(lam.shape, dtype=float)
        for amp, c, w in arr:
            out = out + amp * np.exp(-0.5 * ((lam.real - c) / w) ** 2)
        return out

    return density


def table_density(lam: Sequence[float], values: Sequence[float]) -> Callable:
    """Cubic-spline interpolant of a tabulated density, zero outside the table."""
    from scipy.interpolate import CubicSpline

    lam = np.asarray(lam, dtype=float)
    spline = CubicSpline(lam, np.asarray(values, dtype=float))
    lo, hi = lam[0], lam[-1]

    def density(x):
        x = np.asarray(x).real
        return np.where((x >= lo) & (x <= hi), spline(np.clip(x, lo, hi)), 0.0)

    return density


def _density_from_dict(d):
    if d is None:
        return None
    kind = d.get("kind")
    if kind == "gaussians":
        return gaussian_density(d["terms"])
    if kind == "table":
        return table_density(d["lam"], d["values"])
    raise ConfigError(f"unknown density kind {kind!r}")


def _log_scale_from(d) -> complex:
    v = d.get("log_scale", 1.0)
    if isinstance(v, str):
        return complex(v.replace("i", "j"))
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1])
    return complex(v)


def _log_scale_to(c: complex):
    c = complex(c)
    return [c.real, c.imag]


def spec_from_dict(d: dict):
    """Build a spec from its JSON form (see schema/solution_spec.json)."""
    if not isinstance(d, dict) or "variant" not in d:
        raise ConfigError("spec must be an object with a 'variant' field")
    v = d["variant"]
    try:
        if v == "monomial":
            return Monomial(d.get("x", ()), d.get("y", ()), _log_scale_from(d),
                            int(d.get("nodes", 256)), d.get("radius"))
        if v == "inverse":
            return InversePower(d.get("x", ()), d.get("y", ()), _log_scale_from(d),
                                int(d.get("nodes", 256)), d.get("radius"))
        if v == "delta":
            return Delta(tuple(map(tuple, d.get("points_phi", ()))),
                         tuple(map(tuple, d.get("points_psi", ()))), _log_scale_from(d))
        if v == "sampled":
            return Sampled(_density_from_dict(d.get("phi")), _density_from_dict(d.get("psi")),
                           tuple(d["support"]), _log_scale_from(d),
                           int(d.get("nodes", 16)), int(d.get("cells", 64)), source=d)
        if v == "composite":
            return Composite(tuple(spec_from_dict(p) for p in d["parts"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {v} spec: {exc}") from exc
    raise ConfigError(f"unknown variant {v!r}")


def spec_to_dict(spec) -> dict:
    if isinstance(spec, Monomial):
        return {"variant": "monomial", "x": list(spec.x), "y": list(spec.y),
                "log_scale": _log_scale_to(spec.log_scale), "nodes": spec.nodes,
                "radius": spec.radius}
    if isinstance(spec, InversePower):
        return {"variant": "inverse", "x": list(spec.x), "y": list(spec.y),
                "log_scale": _log_scale_to(spec.log_scale), "nodes": spec.nodes,
                "radius": spec.radius}
    if isinstance(spec, Delta):
        return {"variant": "delta", "points_phi": [list(p) for p in spec.points_phi],
                "points_psi": [list(p) for p in spec.points_psi],
                "log_scale": _log_scale_to(spec.log_scale)}
    if isinstance(spec, Sampled):
        if spec.source is None:
            raise ConfigError("sampled spec built from callables cannot be serialized")
        return dict(spec.source)
    if isinstance(spec, Composite):
        return {"variant": "composite", "parts": [spec_to_dict(p) for p in spec.parts]}
    raise TypeError(f"not a spec: {spec!r}")


def load_spec(text_or_path: str):
    """Parse a spec from inline JSON or from a file path."""
    text = text_or_path.strip()
    if not text.startswith("{"):
        try:
            with open(text_or_path) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read spec file {text_or_path!r}: {exc}") from exc
    try:
        return spec_from_dict(json.loads(text))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"spec is not valid JSON: {exc}") from exc
