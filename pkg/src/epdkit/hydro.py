"""Hodograph fields over deformation-parameter grids and their PDE residuals.

A deformation parameter is a coefficient of the spec addressed by a
FlowLabel. Moving two of them over a rectangular grid and following the
critical point gives beta(p1, p2); the Riemann-invariant equations
beta_{p_k} = lambda_{k,l} beta_{p_l} are then checked by central differences.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .critical import CriticalPoint, find_critical
from .epd import eval_jet
from .errors import ConvergenceError, DegenerateHessianError, GridError
from .report import ResidualReport, fmt
from .spec import Delta, FlowLabel, basis_spec, get_coefficient, with_coefficient

__all__ = [
    "velocity",
    "velocity_pair",
    "HodographField",
    "hodograph_solve",
    "pde_residual",
    "dtoda_phi_residual",
    "delta_flow_residual",
    "dual_equivalence",
    "coefficient_grid",
]


def _label(l) -> FlowLabel:
    return FlowLabel.parse(l) if isinstance(l, str) else l


def _point(cp):
    if isinstance(cp, CriticalPoint):
        return cp.beta, cp.betabar
    if isinstance(cp, tuple):
        return complex(cp[0]), complex(cp[1])
    b = complex(cp)
    return b, b.conjugate()


def velocity_pair(spec, cp, k, l, **jet_kw):
    """(W_b(k)/W_b(l), W_b'(k)/W_b'(l)) from the basis functions of k and l."""
    b, bb = _point(cp)
    Jk = eval_jet(basis_spec(spec, _label(k)), b, bb, **jet_kw)
    Jl = eval_jet(basis_spec(spec, _label(l)), b, bb, **jet_kw)
    if Jl.wz == 0 or Jl.wzb == 0:
        raise ZeroDivisionError(f"W_beta of {l} vanishes at {b}")
    return Jk.wz / Jl.wz, Jk.wzb / Jl.wzb


def velocity(spec, cp, k, l, **jet_kw) -> complex:
    """Characteristic velocity lambda_{k,l}: beta_{p_k} = lambda beta_{p_l}."""
    return velocity_pair(spec, cp, k, l, **jet_kw)[0]


@dataclass
class HodographField:
    labels: tuple
    axes: tuple
    beta: np.ndarray
    betabar: np.ndarray
    converged: np.ndarray
    spec: object = None

    @property
    def shape(self):
        return self.beta.shape

    @property
    def steps(self):
        return tuple(float(a[1] - a[0]) for a in self.axes)

    def spec_at(self, i, j):
        s = with_coefficient(self.spec, self.labels[0], self.axes[0][i])
        return with_coefficient(s, self.labels[1], self.axes[1][j])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([str(self.labels[0]), str(self.labels[1]), "re_beta", "im_beta", "converged"])
            for i, p in enumerate(self.axes[0]):
                for j, q in enumerate(self.axes[1]):
                    b = self.beta[i, j]
                    w.writerow([fmt(p), fmt(q), fmt(b.real), fmt(b.imag), int(self.converged[i, j])])


def hodograph_solve(spec, labels, axes, seed, **kw) -> HodographField:
    """Continue the critical point over the grid axes[0] x axes[1].

    Row-major sweep; each node is seeded from its converged left neighbour
    (or the one above), retried once from the other one. Nodes that fail are
    flagged, their beta set to nan.
    """
    labels = tuple(_label(l) for l in labels)
    axes = tuple(np.asarray(a, dtype=float) for a in axes)
    n1, n2 = len(axes[0]), len(axes[1])
    beta = np.full((n1, n2), np.nan + 0j)
    betabar = np.full((n1, n2), np.nan + 0j)
    ok = np.zeros((n1, n2), dtype=bool)
    seed_b, seed_bb = _point(seed)

    def solve(i, j, g, gb):
        s = with_coefficient(with_coefficient(spec, labels[0], axes[0][i]), labels[1], axes[1][j])
        try:
            cp = find_critical(s, g, gb, **kw)
        except (ConvergenceError, DegenerateHessianError, ZeroDivisionError):
            return False
        beta[i, j], betabar[i, j], ok[i, j] = cp.beta, cp.betabar, True
        return True

    for i in range(n1):
        for j in range(n2):
            cands = []
            if j > 0 and ok[i, j - 1]:
                cands.append((i, j - 1))
            if i > 0 and ok[i - 1, j]:
                cands.append((i - 1, j))
            if not cands:
                if i == 0 and j == 0:
                    solve(0, 0, seed_b, seed_bb)
                elif i > 0 and j + 1 < n2 and ok[i - 1, j + 1]:
                    solve(i, j, beta[i - 1, j + 1], betabar[i - 1, j + 1])
                continue
            for c in cands[:2]:
                if solve(i, j, beta[c], betabar[c]):
                    break
    return HodographField(labels, axes, beta, betabar, ok, spec)


def _interior(field: HodographField):
    n1, n2 = field.shape
    if n1 < 3 or n2 < 3:
        raise GridError("need at least 3 nodes per axis")
    for i in range(1, n1 - 1):
        for j in range(1, n2 - 1):
            if field.converged[i - 1:i + 2, j - 1:j + 2].all():
                yield i, j


def _axis_of(field, lab):
    lab = _label(lab)
    for a, l in enumerate(field.labels):
        if l == lab:
            return a
    raise ValueError(f"{lab} is not an axis of this field")


def _d(arr, i, j, axis, h):
    if axis == 0:
        return (arr[i + 1, j] - arr[i - 1, j]) / (2 * h)
    return (arr[i, j + 1] - arr[i, j - 1]) / (2 * h)


def pde_residual(field: HodographField, k, l, **jet_kw) -> ResidualReport:
    """max |beta_k - lambda_{k,l} beta_l| (and the betabar companion) on interior nodes."""
    ak, al = _axis_of(field, k), _axis_of(field, l)
    hk, hl = field.steps[ak], field.steps[al]
    rb, rbb = [], []
    for i, j in _interior(field):
        lam, mu = velocity_pair(field.spec_at(i, j), (field.beta[i, j], field.betabar[i, j]), k, l, **jet_kw)
        rb.append(_d(field.beta, i, j, ak, hk) - lam * _d(field.beta, i, j, al, hl))
        rbb.append(_d(field.betabar, i, j, ak, hk) - mu * _d(field.betabar, i, j, al, hl))
    rep = ResidualReport.from_values(f"flow {_label(k)} vs {_label(l)}", rb + rbb, field.shape, max(hk, hl))
    rep.extra.update(max_beta=float(np.max(np.abs(rb))) if rb else 0.0,
                     max_betabar=float(np.max(np.abs(rbb))) if rbb else 0.0,
                     nodes=len(rb))
    return rep


def dtoda_phi_residual(field: HodographField) -> ResidualReport:
    """Residual of phi_{x1 x1} + (e^phi)_{y0 y0} = 0 with e^phi = -(beta - betabar)^2 / 4.

    On the real slice e^phi = (Im beta)^2, i.e. phi = 2 ln(Im beta).
    """
    ax = _axis_of(field, "monomial-x:1")
    ay = _axis_of(field, "monomial-y:0")
    hx, hy = field.steps[ax], field.steps[ay]
    e = -((field.beta - field.betabar) ** 2) / 4
    phi = np.log(e)

    def d2(arr, i, j, axis, h):
        if axis == 0:
            return (arr[i + 1, j] - 2 * arr[i, j] + arr[i - 1, j]) / h**2
        return (arr[i, j + 1] - 2 * arr[i, j] + arr[i, j - 1]) / h**2

    res = [d2(phi, i, j, ax, hx) + d2(e, i, j, ay, hy) for i, j in _interior(field)]
    return ResidualReport.from_values("dToda phi", res, field.shape, max(hx, hy))


def delta_flow_residual(field: HodographField) -> ResidualReport:
    """Residual of u_t = (u ubar)^(-1/2) u^(-1) u_{x0}, u = 1 - lam_t / beta.

    The axes must be delta-x coefficients: one whose node is 0 (x0) and one
    at node lam_t != 0 (t). The companion equation for ubar is included.
    """
    if not isinstance(field.spec, Delta):
        raise ValueError("delta_flow_residual needs a Delta spec")
    nodes = [field.spec.points_phi[l.index][1] if l.family == "delta-x" else None for l in field.labels]
    if None in nodes or 0.0 not in nodes:
        raise ValueError("axes must be delta-x labels, one of them with node 0")
    ax = nodes.index(0.0)
    at = 1 - ax
    lam_t = nodes[at]
    if lam_t == 0:
        raise ValueError("the t-node must differ from 0")
    if np.any(np.abs(field.beta[field.converged]) < 1e-12):
        raise ZeroDivisionError("beta too close to 0")
    u = 1 - lam_t / field.beta
    ub = 1 - lam_t / field.betabar
    if np.any(np.abs(u[field.converged]) < 1e-12) or np.any(np.abs(ub[field.converged]) < 1e-12):
        raise ZeroDivisionError("u vanishes")
    hx, ht = field.steps[ax], field.steps[at]
    res = []
    for i, j in _interior(field):
        s = 1 / np.sqrt(u[i, j] * ub[i, j])
        res.append(_d(u, i, j, at, ht) - s / u[i, j] * _d(u, i, j, ax, hx))
        res.append(_d(ub, i, j, at, ht) - s / ub[i, j] * _d(ub, i, j, ax, hx))
    return ResidualReport.from_values("delta u-flow", res, field.shape, max(hx, ht))


def dual_equivalence(spec, labels, points, **jet_kw) -> ResidualReport:
    """Compare flow right-hand sides built from W with those built from W*.

    For each point and label k: -W_{k,b}/W_bb against
    -W*_{k,b}/W*_bb with W*_{k,b} = (b - b') W_{k,b} and
    W*_bb = W_b + (b - b') W_bb; same for the betabar side. Velocity ratios
    from both functions are compared too. The points should be critical
    points (W_b = 0); elsewhere the two constructions differ.
    """
    labels = [_label(l) for l in labels]
    diffs = []
    for p in points:
        b, bb = _point(p)
        J = eval_jet(spec, b, bb, **jet_kw)
        dz = b - bb
        Ws_bb = J.wz + dz * J.wzz
        Ws_bbbb = J.wzb - dz * J.wzbzb
        rhs, rhs_s = [], []
        for k in labels:
            Jk = eval_jet(basis_spec(spec, k), b, bb, **jet_kw)
            r = (-Jk.wz / J.wzz, -Jk.wzb / J.wzbzb)
            rs = (-(dz * Jk.wz) / Ws_bb, -(-dz * Jk.wzb) / Ws_bbbb)
            rhs.append(r)
            rhs_s.append(rs)
            diffs += [r[0] - rs[0], r[1] - rs[1]]
        for a in range(len(labels)):
            for c in range(len(labels)):
                if a != c:
                    diffs.append(rhs[a][0] / rhs[c][0] - rhs_s[a][0] / rhs_s[c][0])
                    diffs.append(rhs[a][1] / rhs[c][1] - rhs_s[a][1] / rhs_s[c][1])
    return ResidualReport.from_values("dual equivalence", diffs, (len(points),))


def coefficient_grid(spec, label, half_width: float, n: int):
    """Uniform axis of n values centred on the current coefficient."""
    c = get_coefficient(spec, _label(label))
    return c + half_width * np.linspace(-1, 1, n)
