"""Branch-aware kernels and contour quadrature.

Every solution of the EPD equation handled by this package is a superposition
of two pointwise kernels in the auxiliary variable ``lam``::

    K(lam; z, zb) = ((lam - z) (lam - zb)) ** (-1/2)
    L(lam; z, zb) = log((z - zb) / ((lam - z) (lam - zb)))

Complex points are plain Python/numpy complex numbers. ``zb`` is an
independent variable; the "real" slice of the theory is ``zb == conj(z)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .errors import CoincidentPointError, ConvergenceError, SingularPointError

SINGULAR_RTOL = 1e-12
DEFAULT_NODES = 256

__all__ = [
    "CircleAtInfinity",
    "CircleAtOrigin",
    "SegmentBetween",
    "RealInterval",
    "Contour",
    "kernel_pow",
    "kernel_log",
    "branch_kernels",
    "contour_nodes",
    "integrate",
    "check_finite",
]


def check_finite(*values) -> None:
    for v in values:
        if not np.all(np.isfinite(np.asarray(v))):
            raise ValueError(f"non-finite complex coordinate: {v!r}")


def _check_singular(lam, z, zb) -> None:
    lam = np.asarray(lam)
    for p in (z, zb):
        tol = SINGULAR_RTOL * max(1.0, abs(p))
        if np.any(np.abs(lam - p) <= tol):
            raise SingularPointError(f"kernel evaluated at its branch point {p!r}")


def kernel_pow(lam, z, zb):
    """((lam - z)(lam - zb))^(-1/2) with the principal root of the product.

    For zb = conj(z) and real lam the product is |lam - z|^2, so the result is
    1/|lam - z|. Works elementwise on arrays of ``lam``.
    """
    check_finite(lam, z, zb)
    _check_singular(lam, z, zb)
    return 1.0 / np.sqrt((np.asarray(lam, dtype=complex) - z) * (lam - zb))


def kernel_log(lam, z, zb):
    """Principal log of (z - zb) / ((lam - z)(lam - zb))."""
    check_finite(lam, z, zb)
    if abs(z - zb) <= SINGULAR_RTOL * max(1.0, abs(z)):
        raise CoincidentPointError("z and zb coincide")
    _check_singular(lam, z, zb)
    return np.log((z - zb) / ((np.asarray(lam, dtype=complex) - z) * (lam - zb)))


def branch_kernels(lam, z, zb, branch: str = "principal"):
    """Return (K, L) evaluated on the requested branch.

    ``principal``  product-principal root and log (real-axis densities).
    ``outer``      branch analytic for |lam| > |z|, |zb|, with K ~ 1/lam at
                   infinity. The multivalued ``-2 log(lam)`` part of L is
                   dropped, which is what a residue at infinity keeps.
    ``inner``      branch analytic for |lam| < |z|, |zb|; the overall sign is
                   chosen so that contour integrals reproduce the expansion of
                   the inverse-power family about lam = 0.
    """
    lam = np.asarray(lam, dtype=complex)
    if branch == "principal":
        return kernel_pow(lam, z, zb), kernel_log(lam, z, zb)
    check_finite(lam, z, zb)
    if abs(z - zb) <= SINGULAR_RTOL * max(1.0, abs(z)):
        raise CoincidentPointError("z and zb coincide")
    if branch == "outer":
        u, v = z / lam, zb / lam
        if np.any(np.abs(u) >= 1) or np.any(np.abs(v) >= 1):
            raise SingularPointError("circle at infinity does not enclose z and zb")
        K = 1.0 / (lam * np.sqrt(1 - u) * np.sqrt(1 - v))
        L = np.log(z - zb) - np.log(1 - u) - np.log(1 - v)
        return K, L
    if branch == "inner":
        u, v = lam / z, lam / zb
        if np.any(np.abs(u) >= 1) or np.any(np.abs(v) >= 1):
            raise SingularPointError("circle at origin must exclude z and zb")
        K = -1.0 / (np.sqrt(z * zb) * np.sqrt(1 - u) * np.sqrt(1 - v))
        L = np.log((z - zb) / (z * zb)) - np.log(1 - u) - np.log(1 - v)
        return K, L
    raise ValueError(f"unknown branch {branch!r}")


@dataclass(frozen=True)
class CircleAtInfinity:
    radius: float
    nodes: int = DEFAULT_NODES

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        if self.nodes < 16:
            raise ValueError("need at least 16 nodes")

    def admits(self, *points) -> bool:
        return all(abs(p) < self.radius for p in points)


@dataclass(frozen=True)
class CircleAtOrigin:
    radius: float
    nodes: int = DEFAULT_NODES

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        if self.nodes < 16:
            raise ValueError("need at least 16 nodes")

    def admits(self, *points) -> bool:
        return all(abs(p) > self.radius for p in points)


@dataclass(frozen=True)
class SegmentBetween:
    """The segment lam = cos^2(a) z + sin^2(a) zb, 0 <= a <= pi/2."""

    z: complex
    zb: complex
    nodes: int = 64

    def __post_init__(self):
        if self.nodes < 16:
            raise ValueError("need at least 16 nodes")


@dataclass(frozen=True)
class RealInterval:
    a: float
    b: float
    nodes: int = 16
    cells: int = 64

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError("RealInterval needs a < b")
        if self.nodes < 2 or self.cells < 1:
            raise ValueError("need nodes >= 2 and cells >= 1")
        if self.nodes * self.cells < 16:
            raise ValueError("need at least 16 quadrature nodes in total")


Contour = Union[CircleAtInfinity, CircleAtOrigin, SegmentBetween, RealInterval]


def _with_nodes(contour: Contour, n: int) -> Contour:
    if isinstance(contour, RealInterval):
        return RealInterval(contour.a, contour.b, contour.nodes, max(1, n // contour.nodes))
    return type(contour)(**{**contour.__dict__, "nodes": n})


def _n_total(contour: Contour) -> int:
    if isinstance(contour, RealInterval):
        return contour.nodes * contour.cells
    return contour.nodes


def contour_nodes(contour: Contour):
    """Quadrature nodes and weights: sum(w * f(lam)) approximates the integral."""
    if isinstance(contour, (CircleAtInfinity, CircleAtOrigin)):
        n = contour.nodes
        # half-step offset keeps nodes off the real axis
        theta = 2 * np.pi * (np.arange(n) + 0.5) / n
        lam = contour.radius * np.exp(1j * theta)
        return lam, 1j * lam * (2 * np.pi / n)
    if isinstance(contour, RealInterval):
        x, w = np.polynomial.legendre.leggauss(contour.nodes)
        edges = np.linspace(contour.a, contour.b, contour.cells + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        lam = (mid[:, None] + half[:, None] * x[None, :]).ravel()
        wt = (half[:, None] * w[None, :]).ravel()
        return lam.astype(complex), wt.astype(complex)
    if isinstance(contour, SegmentBetween):
        x, w = np.polynomial.legendre.leggauss(contour.nodes)
        alpha = (x + 1) * (np.pi / 4)
        c2, s2 = np.cos(alpha) ** 2, np.sin(alpha) ** 2
        lam = c2 * contour.z + s2 * contour.zb
        dlam = np.sin(2 * alpha) * (contour.zb - contour.z)
        return lam, w * (np.pi / 4) * dlam
    raise TypeError(f"not a contour: {contour!r}")


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    contour: Contour,
    tol: float = 1e-12,
    max_doublings: int = 6,
) -> complex:
    """Integrate a vectorized integrand over a contour, doubling nodes to converge.

    Convergence is declared when two successive node counts agree to ``tol``
    relative to the magnitude scale sum(|w f|). ConvergenceError otherwise.
    """
    lam, w = contour_nodes(contour)
    vals = w * f(lam)
    prev = complex(np.sum(vals))
    n = _n_total(contour)
    for _ in range(max_doublings):
        n *= 2
        lam, w = contour_nodes(_with_nodes(contour, n))
        vals = w * f(lam)
        cur = complex(np.sum(vals))
        scale = max(float(np.sum(np.abs(vals))), 1e-300)
        if abs(cur - prev) <= tol * scale:
            return cur
        prev = cur
    raise ConvergenceError(f"quadrature did not converge after {max_doublings} doublings")


def default_outer_radius(*points) -> float:
    return 2.0 * max(abs(p) for p in points) + 1.0


def default_inner_radius(*points) -> float:
    r = 0.5 * min(abs(p) for p in points)
    if r <= 0 or not math.isfinite(r):
        raise SingularPointError("inverse-power kernels need z, zb away from the origin")
    return r
