"""Poisson operators J0, J1, J1^eps on a periodic grid in the variables (rho, u).

Gradients are pairs (dF/drho, dF/du); an operator maps a gradient pair to a
flow (rho_t, u_t). Differentiation is spectral by default, with the Nyquist
mode dropped so the discrete derivative is exactly skew-symmetric.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError
from .report import ResidualReport, empirical_order, fmt

__all__ = [
    "FieldState",
    "Functional",
    "CasimirU",
    "H1Toda",
    "DNLSEnergy",
    "deriv",
    "grad",
    "apply",
    "limit_flow",
    "skew_check",
    "rk4",
    "random_state",
]


@dataclass(frozen=True)
class FieldState:
    rho: np.ndarray
    u: np.ndarray
    L: float = 2 * np.pi

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=float)
        u = np.asarray(self.u, dtype=float)
        if rho.shape != u.shape or rho.ndim != 1:
            raise ValueError("rho and u must be 1-D arrays of equal length")
        if rho.size < 8:
            raise ValueError("need at least 8 grid points")
        if np.any(rho <= 0):
            raise DomainError("rho must be strictly positive")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "u", u)

    @property
    def n(self) -> int:
        return self.rho.size

    @property
    def x(self) -> np.ndarray:
        return self.L * np.arange(self.n) / self.n

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "rho", "u"])
            for row in zip(self.x, self.rho, self.u):
                w.writerow([fmt(v) for v in row])

    @classmethod
    def from_csv(cls, path, L: float | None = None) -> "FieldState":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        x = data[:, 0]
        if L is None:
            L = (x[1] - x[0]) * len(x)
        return cls(data[:, 1], data[:, 2], L)


@dataclass(frozen=True)
class Functional:
    """Local functional with pointwise density f(rho, u)."""

    name: str
    density: Callable
    gradient: Callable | None = None


CasimirU = Functional("CasimirU", lambda r, u: u, lambda r, u: (np.zeros_like(r), np.ones_like(u)))


def _h1toda_grad(r, u):
    return -np.log(r), u.copy()


H1Toda = Functional("H1Toda", lambda r, u: -r * (np.log(r) - 1) + u**2 / 2, _h1toda_grad)
DNLSEnergy = Functional("DNLSEnergy", lambda r, u: r * u**2 / 2 - r**2 / 2,
                        lambda r, u: (u**2 / 2 - r, r * u))


def grad(F: Functional, s: FieldState):
    """Pointwise (dF/drho, dF/du); complex-step differentiation for custom densities."""
    if F.gradient is not None:
        return F.gradient(s.rho, s.u)
    h = 1e-30
    gr = np.imag(F.density(s.rho + 1j * h, s.u + 0j)) / h
    gu = np.imag(F.density(s.rho + 0j, s.u + 1j * h)) / h
    if not (np.all(np.isfinite(gr)) and np.all(np.isfinite(gu))):
        raise DomainError(f"density of {F.name} is not differentiable at this state")
    return gr, gu


def deriv(f: np.ndarray, L: float, method: str = "spectral") -> np.ndarray:
    """Periodic d/dx; "spectral" (Nyquist mode zeroed) or "fd4" central differences."""
    n = f.size
    if method == "spectral":
        k = np.fft.fftfreq(n, d=L / (2 * np.pi * n))
        if n % 2 == 0:
            k[n // 2] = 0.0
        return np.real(np.fft.ifft(1j * k * np.fft.fft(f)))
    if method == "fd4":
        h = L / n
        return (8 * (np.roll(f, -1) - np.roll(f, 1)) - (np.roll(f, -2) - np.roll(f, 2))) / (12 * h)
    raise ValueError(f"unknown differencing {method!r}")


def apply(op: str, g, s: FieldState, eps: float | None = None, method: str = "spectral"):
    """Flow (rho_t, u_t) = op . g for op in {"J0", "J1", "J1eps"}."""
    gr, gu = (np.asarray(a, dtype=float) for a in g)
    rho, u = s.rho, s.u

    def D(f):
        return deriv(f, s.L, method)

    if op == "J0":
        return D(gu), D(gr)
    if op == "J1":
        return (rho * D(gr) + D(rho * gr) + u * D(gu),
                D(u * gr) - 2 * D(gu))
    if op == "J1eps":
        if eps is None or eps <= 0:
            raise ValueError("J1eps needs eps > 0")
        re = rho**eps
        return (rho * D(gr) + D(rho * gr) + u * D(gu) + eps * D(u * gu),
                eps * u * D(gr) + D(u * gr) - re * D(gu) - D(re * gu))
    raise ValueError(f"unknown operator {op!r}")


def limit_flow(s: FieldState, eps_seq=(0.1, 0.05, 0.025, 0.0125), method: str = "spectral"):
    """Flows J1^eps grad(u/eps) against the limit (u_x, -(ln rho)_x).

    Returns (reference flow, errors, empirical orders).
    """
    eps_seq = np.asarray(eps_seq, dtype=float)
    if np.any(eps_seq <= 0) or np.any(np.diff(eps_seq) >= 0):
        raise ValueError("eps sequence must be positive and decreasing")
    ref = (deriv(s.u, s.L, method), -deriv(np.log(s.rho), s.L, method))
    errs = []
    for e in eps_seq:
        g = (np.zeros(s.n), np.full(s.n, 1.0 / e))
        fr, fu = apply("J1eps", g, s, e, method)
        errs.append(max(np.abs(fr - ref[0]).max(), np.abs(fu - ref[1]).max()))
    errs = np.array(errs)
    return ref, errs, empirical_order(errs, eps_seq)


def skew_check(op: str, s: FieldState, trials: int = 5, seed: int = 0, eps=None,
               method: str = "spectral") -> ResidualReport:
    """Relative |<g1, op g2> + <op g1, g2>| over random gradient pairs."""
    rng = np.random.default_rng(seed)
    h = s.L / s.n
    vals = []
    for _ in range(trials):
        g1 = rng.standard_normal((2, s.n))
        g2 = rng.standard_normal((2, s.n))
        a1 = apply(op, g1, s, eps, method)
        a2 = apply(op, g2, s, eps, method)
        lhs = h * (g1[0] @ a2[0] + g1[1] @ a2[1])
        rhs = h * (a1[0] @ g2[0] + a1[1] @ g2[1])
        scale = h * (np.abs(g1[0] * a2[0]).sum() + np.abs(g1[1] * a2[1]).sum())
        vals.append((lhs + rhs) / scale)
    return ResidualReport.from_values(f"skew {op}", vals, (s.n,), h)


def rk4(s: FieldState, F: Functional, op: str = "J0", dt: float | None = None, steps: int = 100,
        cfl: float = 0.2, eps=None, method: str = "spectral") -> FieldState:
    """Advance rho, u along op . grad(F) with classical RK4.

    The flows here are of elliptic (focusing) type, so high modes grow; use
    short horizons only, e.g. for conservation spot checks.
    """
    if dt is None:
        # covers both the dToda (1/sqrt(rho)) and dNLS (sqrt(rho)) speeds
        speed = np.max(np.abs(s.u)) + np.sqrt(np.max(s.rho)) + 1 / np.sqrt(np.min(s.rho)) + 1.0
        dt = cfl * (s.L / s.n) / speed

    def rhs(r, u):
        st = FieldState(r, u, s.L)
        return np.array(apply(op, grad(F, st), st, eps, method))

    y = np.array([s.rho, s.u])
    for _ in range(steps):
        k1 = rhs(*y)
        k2 = rhs(*(y + 0.5 * dt * k1))
        k3 = rhs(*(y + 0.5 * dt * k2))
        k4 = rhs(*(y + dt * k3))
        y = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return FieldState(y[0], y[1], s.L)


def random_state(n: int = 64, modes: int = 4, seed: int = 0, L: float = 2 * np.pi, amp: float = 0.3):
    """Smooth random state; ln(rho) and u are trigonometric polynomials."""
    rng = np.random.default_rng(seed)
    x = L * np.arange(n) / n
    k = np.arange(1, modes + 1)[:, None]

    def trig():
        a, b = rng.standard_normal((2, modes, 1)) * amp / k
        return (a * np.cos(2 * np.pi * k * x / L) + b * np.sin(2 * np.pi * k * x / L)).sum(0)

    return FieldState(np.exp(trig()), trig(), L)
