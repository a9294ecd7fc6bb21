"""Curvature/torsion form of the quasi-classical Da Rios hierarchy.

The filament state (K, tau) is packed as beta = -tau + i K. Solutions come
from critical points of a real W built from x, the flow times, and two real
densities on the real axis, with the logarithm normalized by 2i so that it is
real on the real slice.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .critical import find_critical
from .errors import ConvergenceError, DegenerateHessianError, DomainError, GridError, NoRootError
from .hydro import hodograph_solve
from .report import ResidualReport, fmt
from .spec import Composite, Monomial, Sampled, table_density

LOG_SCALE = 2j

# which coefficient of the monomial part each flow time multiplies
FLOW_TIMES = {
    "DaRios": "monomial-x:2",
    "Higher2": "monomial-x:3",
    "DTodaFlow": "monomial-y:0",
    "Log2Flow": "monomial-y:1",
}

__all__ = [
    "FLOW_TIMES",
    "FilamentState",
    "beta_map",
    "state_from_beta",
    "darios_spec",
    "flow_residual",
    "solve_hodograph_darios",
    "initial_data_map",
    "initial_profile",
    "read_densities",
    "write_history",
]


@dataclass
class FilamentState:
    K: np.ndarray
    tau: np.ndarray
    x: np.ndarray

    def __post_init__(self):
        self.K = np.asarray(self.K, dtype=float)
        self.tau = np.asarray(self.tau, dtype=float)
        self.x = np.asarray(self.x, dtype=float)
        if np.any(~(self.K > 0)):
            raise DomainError("curvature must be positive")


def beta_map(K, tau):
    K = np.asarray(K, dtype=float)
    if np.any(~(K > 0)):
        raise DomainError("curvature must be positive")
    return -np.asarray(tau, dtype=float) + 1j * K


def state_from_beta(beta):
    """(K, tau) = (Im beta, -Re beta)."""
    beta = np.asarray(beta, dtype=complex)
    if np.any(~(beta.imag > 0)):
        raise DomainError("beta must lie in the upper half-plane")
    return beta.imag, -beta.real


def darios_spec(phi=None, psi=None, support=(-1.0, 1.0), x=0.0, t=0.0, t2=0.0, tm1=0.0, tm2=0.0,
                nodes: int = 16, cells: int = 64):
    """W = x W_1 + t W_2 + t2 W_3 + tm1 W~_0 + tm2 W~_1 + real-axis density integrals."""
    mono = Monomial(x=(x, t, t2), y=(tm1, tm2), log_scale=LOG_SCALE)
    dens = Sampled(phi, psi, support, LOG_SCALE, nodes, cells)
    return Composite((mono, dens))


# --- the flows in (K, tau) ----------------------------------------------------


def _flow_terms(flow, K, tau, Kx, tx):
    """Right-hand sides (K_t, tau_t) of the selected flow."""
    if flow == "DaRios":
        return -2 * tau * Kx - K * tx, -2 * tau * tx + K * Kx
    if flow == "Higher2":
        a = 3 * tau**2 - 1.5 * K**2
        return a * Kx + 3 * tau * K * tx, -3 * tau * K * Kx + a * tx
    if flow == "DTodaFlow":
        return tx / K, -Kx / K
    if flow == "Log2Flow":
        g = 2 + np.log(K)
        return g * Kx - tau / K * tx, tau / K * Kx + g * tx
    raise ValueError(f"unknown flow {flow!r}")


def flow_residual(K, tau, x, t, flow: str = "DaRios", converged=None) -> ResidualReport:
    """Central-difference residual of a flow on a history K[t, x], tau[t, x]."""
    K, tau = np.asarray(K, dtype=float), np.asarray(tau, dtype=float)
    x, t = np.asarray(x, dtype=float), np.asarray(t, dtype=float)
    if K.shape != (len(t), len(x)) or tau.shape != K.shape:
        raise ValueError("history arrays must have shape (len(t), len(x))")
    if len(t) < 3 or len(x) < 3:
        raise GridError("need at least 3 time levels and 3 x nodes")
    ht, hx = t[1] - t[0], x[1] - x[0]
    if not (np.allclose(np.diff(t), ht) and np.allclose(np.diff(x), hx)):
        raise GridError("steps must be uniform")
    ok = np.ones(K.shape, bool) if converged is None else np.asarray(converged, bool)
    Kt = (K[2:, 1:-1] - K[:-2, 1:-1]) / (2 * ht)
    tt = (tau[2:, 1:-1] - tau[:-2, 1:-1]) / (2 * ht)
    Kx = (K[1:-1, 2:] - K[1:-1, :-2]) / (2 * hx)
    tx = (tau[1:-1, 2:] - tau[1:-1, :-2]) / (2 * hx)
    Kc, tc = K[1:-1, 1:-1], tau[1:-1, 1:-1]
    fK, ft = _flow_terms(flow, Kc, tc, Kx, tx)
    mask = ok[1:-1, 1:-1] & ok[2:, 1:-1] & ok[:-2, 1:-1] & ok[1:-1, 2:] & ok[1:-1, :-2]
    res = np.concatenate([(Kt - fK)[mask], (tt - ft)[mask]])
    return ResidualReport.from_values(flow, res, K.shape, max(ht, hx), nodes=int(mask.sum()))


def _first_root(spec, support, n=6):
    """First critical point reached from seeds ordered by distance to the support's centre."""
    a, b = support
    mid, w = 0.5 * (a + b), b - a
    seeds = [complex(x, y) for x in np.linspace(a, b, n) for y in np.linspace(0.05 * w, 0.6 * w, n)]
    seeds.sort(key=lambda s: abs(s - complex(mid, 0.3 * w)))
    for s in seeds:
        try:
            return find_critical(spec, s, max_iter=30).beta
        except (ConvergenceError, DegenerateHessianError):
            continue
    raise NoRootError("no critical point found at the first node")


def solve_hodograph_darios(phi, psi, support, xs, ts, flow: str = "DaRios", seed=None, **kw):
    """Follow the critical point over (t, x); returns (K, tau, converged) with shape (len(ts), len(xs)).

    ``seed`` is a guess for beta at (ts[0], xs[0]); without one, seeds spread over the
    densities' support are tried in turn. Unconverged nodes are nan.
    """
    if flow not in FLOW_TIMES:
        raise ValueError(f"unknown flow {flow!r}")
    spec = darios_spec(phi, psi, support)
    labels = (FLOW_TIMES[flow], "monomial-x:1")
    s0 = darios_spec(phi, psi, support, x=xs[0])
    from .spec import FlowLabel, with_coefficient
    s0 = with_coefficient(s0, FlowLabel.parse(labels[0]), ts[0])
    if seed is None:
        seed = _first_root(s0, support)
    else:
        seed = find_critical(s0, seed).beta
    field = hodograph_solve(spec, labels, (ts, xs), seed, **kw)
    beta = np.where(field.converged, field.beta, np.nan)
    return beta.imag, -beta.real, field.converged


# --- t = 0 initial data --------------------------------------------------------


def _nodes(support, K0, n=16):
    a, b = support
    cells = max(64, int(np.ceil(4 * (b - a) / K0)))
    x, w = np.polynomial.legendre.leggauss(n)
    edges = np.linspace(a, b, cells + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    return (mid[:, None] + half[:, None] * x).ravel(), (half[:, None] * w).ravel()


def initial_data_map(phi, psi, tau0: float, K0: float, support=(-1.0, 1.0)):
    """The two real integrals of the t = 0 critical-point equations.

    With s = lam + tau0 and r2 = s^2 + K0^2:
      I1 = int s / r2^(3/2) (phi + psi ln(e^2 K0 / r2))
      I2 = int K0 / r2^(3/2) (phi + psi ((K0^2 - s^2)/K0^2 + ln(K0 / r2)))
    A profile at position x solves I1 = -x, I2 = 0.
    """
    if not K0 > 0:
        raise DomainError("K0 must be positive")
    lam, w = _nodes(support, K0)
    s = lam + tau0
    r2 = s * s + K0 * K0
    kern = r2**-1.5
    f = phi(lam) if phi is not None else 0.0
    g = psi(lam) if psi is not None else 0.0
    I1 = np.sum(w * s * kern * (f + g * (2 + np.log(K0 / r2))))
    I2 = np.sum(w * K0 * kern * (f + g * ((K0 * K0 - s * s) / (K0 * K0) + np.log(K0 / r2))))
    if not (np.isfinite(I1) and np.isfinite(I2)):
        raise ConvergenceError("initial-data quadrature is not finite")
    return float(I1), float(I2)


def _solve_profile_point(phi, psi, support, x, guess, tol=1e-12, max_iter=60):
    tau0, K0 = guess
    for _ in range(max_iter):
        F = np.array(initial_data_map(phi, psi, tau0, K0, support)) + [x, 0.0]
        h = 1e-6 * max(1.0, K0)
        J = np.empty((2, 2))
        for j, (dt, dk) in enumerate(((h, 0), (0, h))):
            Fp = np.array(initial_data_map(phi, psi, tau0 + dt, K0 + dk, support))
            Fm = np.array(initial_data_map(phi, psi, tau0 - dt, K0 - dk, support))
            J[:, j] = (Fp - Fm) / (2 * h)
        try:
            d = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            raise NoRootError("singular Jacobian in the initial-data map") from None
        alpha = 1.0
        if K0 + d[1] <= 0.1 * K0:
            alpha = 0.9 * K0 / abs(d[1])
        tau0, K0 = tau0 + alpha * d[0], K0 + alpha * d[1]
        if K0 < 1e-8:
            raise NoRootError("curvature driven to zero: no admissible root")
        if alpha * np.hypot(*d) < tol * (1 + abs(tau0) + K0):
            F = np.array(initial_data_map(phi, psi, tau0, K0, support)) + [x, 0.0]
            if np.abs(F).max() < 1e-9 * (1 + abs(x)):
                return tau0, K0
    raise NoRootError(f"no root of the initial-data equations near x = {x}")


def initial_profile(phi, psi, xs, guess, support=(-1.0, 1.0)):
    """(K0(x), tau0(x)) by damped Newton, continued along xs from guess = (tau0, K0)."""
    K, tau = [], []
    g = guess
    for x in xs:
        g = _solve_profile_point(phi, psi, support, x, g)
        tau.append(g[0])
        K.append(g[1])
    return np.array(K), np.array(tau)


# --- I/O ------------------------------------------------------------------------


def read_densities(path):
    """Densities from CSV columns (lam, phi, psi); returns (phi, psi, support)."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    lam = data[:, 0]
    return table_density(lam, data[:, 1]), table_density(lam, data[:, 2]), (lam[0], lam[-1])


def write_history(path, ts, xs, K, tau) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "x", "K", "tau"])
        for i, t in enumerate(ts):
            for j, x in enumerate(xs):
                w.writerow([fmt(t), fmt(x), fmt(K[i, j]), fmt(tau[i, j])])
