"""Critical points of W, their Hessian data, and level curves through them.

A critical point is a root beta of W_z(beta, betabar) = W_zb(beta, betabar) = 0.
For specs whose gradient is real on zb = conj(z) the root is found with a
2-real-unknown Newton iteration on (Re beta, Im beta); otherwise beta and
betabar are independent unknowns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import epd
from .epd import eval_jet, pure_derivative
from .errors import CollapseError, ConvergenceError, DegenerateHessianError
from .report import ResidualReport
from .spec import Composite, FlowLabel, basis_spec, get_coefficient, has_real_gradient, with_coefficient

DEGENERACY = 1e-8

__all__ = [
    "CriticalPoint",
    "find_critical",
    "scan_critical",
    "clinants",
    "tangent_angles",
    "vary_critical",
    "exactness_check",
    "potential_loop",
    "LevelCurve",
    "trace_level_curve",
    "double_point_angle",
]


@dataclass(frozen=True)
class CriticalPoint:
    beta: complex
    betabar: complex
    wbb: complex
    wbbb: complex
    wbmix: complex
    order: int = 1
    iterations: int = 0
    residual: float = 0.0
    mode: str = "real"
    # (d^{N+1}W/dbeta^{N+1}, d^{N+1}W/dbetabar^{N+1}) for an order-N point
    leading: tuple = ()
    spec: object = field(default=None, repr=False, compare=False)


def _abs_scale(spec, z, zb, n: int, nodes=None) -> float:
    """Cancellation-free size of the n-th pure z-derivative (sum of |terms|)."""
    if isinstance(spec, Composite):
        return sum(_abs_scale(p, z, zb, n, nodes) for p in spec.parts)
    total = 0.0
    for lam, wphi, wpsi, branch, log_c, norm in epd._quadrature(spec, z, zb, nodes):
        K, L, a, b, d = epd._kernel_terms(lam, z, zb, branch, log_c)
        aK, aa, ad = np.abs(K), np.abs(a), abs(d)
        total += abs(norm) * np.sum(np.abs(wphi) * aK * epd._rising(0.5, n) * aa**n)
        if np.any(wpsi):
            acc = epd._rising(0.5, n) * aa**n * np.abs(L)
            for j in range(n):
                m = n - j
                acc = acc + math.comb(n, j) * epd._rising(0.5, j) * aa**j * math.factorial(m - 1) * (ad**m + aa**m)
            total += abs(norm) * np.sum(np.abs(wpsi) * aK * acc)
    return float(total)


def _jet(spec, b, bb, jet_kw):
    return eval_jet(spec, b, bb, **jet_kw)


def _newton_real(spec, guess, tol, max_iter, jet_kw):
    X, Y = guess.real, guess.imag
    J = _jet(spec, complex(X, Y), complex(X, -Y), jet_kw)
    fnorm = abs(J.wz)
    for it in range(1, max_iter + 1):
        A = J.wzz + J.wzzb          # dF/dX
        B = 1j * (J.wzz - J.wzzb)   # dF/dY
        M = np.array([[A.real, B.real], [A.imag, B.imag]])
        rhs = -np.array([J.wz.real, J.wz.imag])
        det = np.linalg.det(M)
        if not np.isfinite(det) or abs(det) <= 1e-14 * max(np.abs(M).max() ** 2, 1e-300):
            raise ConvergenceError("Jacobian is singular; no isolated critical point here")
        dX, dY = np.linalg.solve(M, rhs)
        alpha = 1.0
        if Y + dY < 0.1 * Y:
            alpha = 0.9 * Y / abs(dY)
        cap = 10.0 * (1.0 + math.hypot(X, Y))
        alpha = min(alpha, cap / max(math.hypot(dX, dY), 1e-300))
        # backtrack on |F|; accept the last trial if none decreases it
        for _ in range(20):
            Xn, Yn = X + alpha * dX, Y + alpha * dY
            Jn = _jet(spec, complex(Xn, Yn), complex(Xn, -Yn), jet_kw)
            if abs(Jn.wz) <= (1 - 1e-4 * alpha) * fnorm:
                break
            alpha *= 0.5
        step = alpha * math.hypot(dX, dY)
        X, Y, J, fnorm = Xn, Yn, Jn, abs(Jn.wz)
        if Y < 1e-8 * (1.0 + abs(X)):
            raise CollapseError(f"iterates collapsed onto the real axis near {X:.6g}")
        if step <= 1e-15 * (1.0 + math.hypot(X, Y)):
            return complex(X, Y), complex(X, -Y), J, it
    return complex(X, Y), complex(X, -Y), J, -1


def _newton_complex(spec, guess, guess_bar, tol, max_iter, jet_kw):
    b, bb = complex(guess), complex(guess_bar)
    J = _jet(spec, b, bb, jet_kw)
    fnorm = math.hypot(abs(J.wz), abs(J.wzb))
    for it in range(1, max_iter + 1):
        M = np.array([[J.wzz, J.wzzb], [J.wzzb, J.wzbzb]], dtype=complex)
        det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
        if not np.isfinite(det) or abs(det) <= 1e-14 * max(np.abs(M).max() ** 2, 1e-300):
            raise ConvergenceError("Jacobian is singular; no isolated critical point here")
        db, dbb = np.linalg.solve(M, -np.array([J.wz, J.wzb]))
        sep = abs(b - bb)
        alpha = 1.0
        if abs((b + db) - (bb + dbb)) < 0.1 * sep:
            alpha = min(1.0, 0.45 * sep / max(abs(db - dbb), 1e-300))
        for _ in range(20):
            bn, bbn = b + alpha * db, bb + alpha * dbb
            Jn = _jet(spec, bn, bbn, jet_kw)
            if math.hypot(abs(Jn.wz), abs(Jn.wzb)) <= (1 - 1e-4 * alpha) * fnorm:
                break
            alpha *= 0.5
        step = alpha * math.hypot(abs(db), abs(dbb))
        b, bb, J = bn, bbn, Jn
        fnorm = math.hypot(abs(J.wz), abs(J.wzb))
        if abs(b - bb) < 1e-8 * (1.0 + abs(b)):
            raise CollapseError("beta and betabar merged")
        if step <= 1e-15 * (1.0 + abs(b)):
            return b, bb, J, it
    return b, bb, J, -1


def _estimate_order(spec, b, bb, jet_kw, thr, max_order=8):
    nodes = jet_kw.get("nodes")
    for n in range(3, max_order + 2):
        A = pure_derivative(spec, b, bb, n, "z", nodes)
        if abs(A) > thr * max(_abs_scale(spec, b, bb, n, nodes), 1e-300):
            return n - 1, (A, pure_derivative(spec, b, bb, n, "zb", nodes))
    raise DegenerateHessianError("all pure derivatives up to order %d vanish" % (max_order + 1))


def find_critical(
    spec,
    guess: complex,
    guess_bar: complex | None = None,
    *,
    tol: float = 1e-10,
    max_iter: int = 60,
    mode: str = "auto",
    degeneracy: float = DEGENERACY,
    allow_degenerate: bool = False,
    **jet_kw,
) -> CriticalPoint:
    """Newton solve of W_z = W_zb = 0 starting from ``guess`` (Im guess != 0).

    ``mode`` is "real" (betabar = conj(beta)), "complex" (independent
    betabar), or "auto" (real whenever the spec has a real gradient).
    A vanishing W_bb raises DegenerateHessianError unless ``allow_degenerate``,
    in which case the order of the point is estimated from higher derivatives.
    """
    guess = complex(guess)
    if guess.imag == 0:
        raise ValueError("guess must be off the real axis")
    if mode == "auto":
        mode = "real" if has_real_gradient(spec) else "complex"
    if mode == "real":
        if guess.imag < 0:
            guess = guess.conjugate()
        b, bb, J, it = _newton_real(spec, guess, tol, max_iter, jet_kw)
    elif mode == "complex":
        gb = guess.conjugate() if guess_bar is None else complex(guess_bar)
        b, bb, J, it = _newton_complex(spec, guess, gb, tol, max_iter, jet_kw)
    else:
        raise ValueError(f"unknown mode {mode!r}")

    res = math.hypot(abs(J.wz), abs(J.wzb))
    gscale = max(_abs_scale(spec, b, bb, 1, jet_kw.get("nodes")), 1e-300)
    if it < 0 or res > tol * max(1.0, gscale):
        raise ConvergenceError(f"Newton did not converge (|grad W| = {res:.3g})")
    if mode == "complex" and b.imag < 0 and bb.imag > 0:
        b, bb = bb, b
        J = _jet(spec, b, bb, jet_kw)

    hscale = _abs_scale(spec, b, bb, 2, jet_kw.get("nodes"))
    order, leading = 1, (J.wzz, J.wzbzb)
    if abs(J.wzz) < degeneracy * hscale or abs(J.wzbzb) < degeneracy * hscale:
        cp_deg = CriticalPoint(b, bb, J.wzz, J.wzbzb, J.wzzb, 0, it, res, mode, (), spec)
        if not allow_degenerate:
            err = DegenerateHessianError(f"|W_bb| = {abs(J.wzz):.3g} below threshold at {b}")
            err.point = cp_deg
            raise err
        order, leading = _estimate_order(spec, b, bb, jet_kw, degeneracy)
    return CriticalPoint(b, bb, J.wzz, J.wzbzb, J.wzzb, order, it, res, mode, leading, spec)


def scan_critical(spec, box=(-2.0, 2.0, 0.1, 3.0), n: int = 6, guess: complex | None = None, **kw):
    """Critical points reached from an n x n grid of seeds, nearest to ``guess`` first.

    Roots with Im beta > 0 come first; duplicates (within 1e-8) are merged.
    """
    x0, x1, y0, y1 = box
    found: list[CriticalPoint] = []
    for x in np.linspace(x0, x1, n):
        for y in np.linspace(y0, y1, n):
            try:
                cp = find_critical(spec, complex(x, y), **kw)
            except (ConvergenceError, DegenerateHessianError):
                continue
            if all(abs(cp.beta - f.beta) > 1e-8 * (1 + abs(cp.beta)) for f in found):
                found.append(cp)
    ref = complex(guess) if guess is not None else complex(0.5 * (x0 + x1), 0.5 * (y0 + y1))
    found.sort(key=lambda c: (c.beta.imag <= 0, abs(c.beta - ref)))
    return found


# --- local geometry at a critical point ---------------------------------------


def clinants(cp: CriticalPoint) -> np.ndarray:
    """Values of dzb/dz along the level curves through cp.

    Order 1: the two roots +-(-W_bb / W_b'b')^(1/2). Order N: the N+1 roots of
    c^(N+1) = -A/B with A, B the leading pure derivatives.
    """
    if cp.order < 1 or not cp.leading:
        raise DegenerateHessianError("critical point has no usable Hessian data")
    A, B = cp.leading
    if B == 0:
        raise DegenerateHessianError("W_b'b' vanishes")
    n = cp.order + 1
    r = (-A / B) ** (1.0 / n)
    return r * np.exp(2j * np.pi * np.arange(n) / n)


def tangent_angles(cp: CriticalPoint) -> np.ndarray:
    """Tangent directions (radians, mod pi) of the arcs; dzb/dz = exp(-2i theta)."""
    return np.mod(-np.angle(clinants(cp)) / 2, np.pi)


def vary_critical(cp: CriticalPoint, variation, **jet_kw):
    """First-order shift (dbeta, dbetabar) of cp when ``variation`` is added to W.

    ``variation`` is a spec for the change of densities; None means no change.
    """
    if cp.order != 1:
        raise DegenerateHessianError("variation formula needs a non-degenerate point")
    if variation is None:
        return 0j, 0j
    J = eval_jet(variation, cp.beta, cp.betabar, **jet_kw)
    return -J.wz / cp.wbb, -J.wzb / cp.wbbb


# --- exactness of the potential one-form -----------------------------------------


def _solve_at(spec, values: dict, guess, **kw):
    s = spec
    for lab, v in values.items():
        s = with_coefficient(s, lab, v)
    return find_critical(s, guess, **kw)


def exactness_check(spec, labels, cp: CriticalPoint, h: float = 1e-3, **kw) -> ResidualReport:
    """Max |d_l W_k(beta) - d_k W_l(beta)| over pairs, by central differences.

    W_k is the basis function of coefficient k evaluated at the tracked
    critical point beta(p); the asymmetry should shrink like h^2.
    """
    labels = [FlowLabel.parse(l) if isinstance(l, str) else l for l in labels]
    base = {lab: get_coefficient(spec, lab) for lab in labels}
    bases = {lab: basis_spec(spec, lab) for lab in labels}
    if len(labels) < 2:
        return ResidualReport("exactness", 0.0, 0.0, (len(labels),), h)
    jet_kw = {k: v for k, v in kw.items() if k in ("nodes", "method")}

    # D[k][l] = d/dp_l of W_k at beta(p)
    D = {}
    for l in labels:
        pts = []
        for sgn in (1, -1):
            vals = dict(base)
            vals[l] = base[l] + sgn * h
            c = _solve_at(spec, vals, cp.beta, **kw)
            pts.append(c)
        for k in labels:
            wp = epd.eval_value(bases[k], pts[0].beta, pts[0].betabar, **jet_kw)
            wm = epd.eval_value(bases[k], pts[1].beta, pts[1].betabar, **jet_kw)
            D[k, l] = (wp - wm) / (2 * h)
    asym = [D[k, l] - D[l, k] for i, k in enumerate(labels) for l in labels[i + 1:]]
    return ResidualReport.from_values("exactness", asym, (len(labels),), h,
                                      labels=[str(l) for l in labels])


def potential_loop(spec, labels, cp: CriticalPoint, radius: float = 0.05, n: int = 64, **kw):
    """Integrate dF = sum_k W_k dp_k around a circle in the (p1, p2) plane.

    Returns (closure, mismatch): |loop integral| and the change of the
    directly evaluated F = W(beta(p)) after one full turn (continuation must
    come back to the same root).
    """
    labels = [FlowLabel.parse(l) if isinstance(l, str) else l for l in labels]
    if len(labels) != 2:
        raise ValueError("need exactly two parameters")
    l1, l2 = labels
    c1, c2 = get_coefficient(spec, l1), get_coefficient(spec, l2)
    b1, b2 = basis_spec(spec, l1), basis_spec(spec, l2)
    jet_kw = {k: v for k, v in kw.items() if k in ("nodes", "method")}
    theta = 2 * np.pi * np.arange(n + 1) / n
    guess = cp.beta
    total = 0j
    F = []
    for j, th in enumerate(theta):
        vals = {l1: c1 + radius * math.cos(th), l2: c2 + radius * math.sin(th)}
        c = _solve_at(spec, vals, guess, **kw)
        guess = c.beta
        s = with_coefficient(with_coefficient(spec, l1, vals[l1]), l2, vals[l2])
        F.append(epd.eval_value(s, c.beta, c.betabar, **jet_kw))
        if j < n:
            w1 = epd.eval_value(b1, c.beta, c.betabar, **jet_kw)
            w2 = epd.eval_value(b2, c.beta, c.betabar, **jet_kw)
            # periodic trapezoid: spectrally accurate for smooth loops
            total += (w1 * -math.sin(th) + w2 * math.cos(th)) * radius * (2 * np.pi / n)
    return abs(total), abs(F[-1] - F[0])


# --- level curves -------------------------------------------------------------


@dataclass
class LevelCurve:
    points: np.ndarray
    level: float
    field: str
    double_point: bool = False


def _level_fn(spec, which: str, jet_kw):
    def G(p):
        p = complex(p)
        J = eval_jet(spec, p, p.conjugate(), **jet_kw)
        if which == "W":
            wz, wzb, val = J.wz, J.wzb, J.w
        else:
            wz, wzb = (p - p.conjugate()) * J.wz, -(p - p.conjugate()) * J.wzb
            val = None
        gx = (wz + wzb).real
        gy = (1j * (wz - wzb)).real
        return val, complex(gx, gy)

    if which == "W":
        return lambda p: (G(p)[0].real, G(p)[1])

    def Gd(p):
        return epd.dual_value(spec, complex(p), **jet_kw).real, G(p)[1]

    return Gd


def trace_level_curve(
    spec,
    seed: complex,
    steps: int = 20,
    h: float = 1e-2,
    field: str = "W",
    direction: int = 1,
    tol: float = 1e-12,
    double_tol: float = 1e-3,
    max_corrector: int = 30,
    **jet_kw,
) -> LevelCurve:
    """March along Re W = Re W(seed) (field "W") or Re W* = const (field "dual").

    Euler predictor along the tangent, Newton corrector along the gradient.
    Halts with ``double_point`` set when |grad| drops below double_tol times
    its value at the seed.
    """
    if field not in ("W", "dual"):
        raise ValueError("field must be 'W' or 'dual'")
    G = _level_fn(spec, field, jet_kw)
    g0, grad = G(seed)
    gnorm0 = abs(grad)
    if gnorm0 == 0:
        raise ValueError("seed is a critical point")
    pts = [complex(seed)]
    prev_t = None
    p = complex(seed)
    flag = False
    for _ in range(steps):
        t = 1j * grad / abs(grad)
        if prev_t is None:
            t *= direction
        elif (t * prev_t.conjugate()).real < 0:
            t = -t
        q = p + h * t
        for _ in range(max_corrector):
            val, gq = G(q)
            err = val - g0
            if abs(err) <= tol * max(1.0, abs(g0)):
                break
            q = q - err * gq / abs(gq) ** 2
        else:
            raise ConvergenceError("corrector failed to return to the level set")
        if q.imag <= 0:
            raise ConvergenceError("level curve left the upper half-plane")
        p, grad, prev_t = q, gq, t
        pts.append(p)
        if abs(grad) < double_tol * gnorm0:
            flag = True
            break
    return LevelCurve(np.array(pts), float(g0), field, flag)


def double_point_angle(spec, cp: CriticalPoint, radius: float = 1e-3, samples: int = 96, **jet_kw):
    """Angle between the level arcs crossing at a double point.

    The arcs are located as the zeros of Re W - Re W(beta) on a small circle
    around beta; opposite zeros are joined into chords. Returns (angle in
    [0, pi/2], chord directions mod pi).
    """
    w0 = eval_jet(spec, cp.beta, cp.betabar, **jet_kw).w.real

    def f(th):
        p = cp.beta + radius * np.exp(1j * th)
        return eval_jet(spec, p, p.conjugate(), **jet_kw).w.real - w0

    th = np.linspace(0, 2 * np.pi, samples + 1)
    v = np.array([f(t) for t in th])
    roots = [brentq(f, th[i], th[i + 1], xtol=1e-15) for i in range(samples) if v[i] * v[i + 1] < 0]
    if len(roots) != 4:
        raise ConvergenceError(f"expected 4 arc crossings, found {len(roots)}")
    roots = np.array(roots)
    dirs = []
    for r in roots[:2]:
        j = np.argmin(np.abs(np.angle(np.exp(1j * (roots - r - np.pi)))))
        chord = np.exp(1j * roots[j]) - np.exp(1j * r)
        dirs.append(np.mod(np.angle(chord), np.pi))
    d = abs(dirs[0] - dirs[1]) % np.pi
    return min(d, np.pi - d), np.array(dirs)
