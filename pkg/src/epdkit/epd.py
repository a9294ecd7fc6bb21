"""Evaluation of solutions of the elliptic EPD equation E(1/2,1/2).

The central object is :class:`Jet2`, the value of W with its first and second
derivatives in the independent variables z and zb. Derivatives are obtained by
differentiating the kernels under the integral sign, never by differencing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Callable, Sequence

import numpy as np

from . import complexfield as cf
from .errors import MobiusPoleError
from .spec import Composite, Delta, InversePower, Monomial, Sampled

TWO_PI_I = 2j * math.pi
DUAL_BASE = 1j

__all__ = [
    "Jet2",
    "eval_jet",
    "eval_value",
    "pure_derivative",
    "epd_residual",
    "closed_form_jet",
    "closed_form_std",
    "closed_form_inverse",
    "appell_jet",
    "appell_transform",
    "dual_jet",
    "dual_value",
    "dual_residual",
    "radon_value",
    "two_term_kk",
]


@dataclass(frozen=True)
class Jet2:
    w: complex
    wz: complex
    wzb: complex
    wzz: complex
    wzbzb: complex
    wzzb: complex

    def __add__(self, other: "Jet2") -> "Jet2":
        return Jet2(*(getattr(self, f.name) + getattr(other, f.name) for f in fields(self)))

    def scale(self, c: complex) -> "Jet2":
        return Jet2(*(c * getattr(self, f.name) for f in fields(self)))

    @property
    def grad_norm(self) -> float:
        return math.hypot(abs(self.wz), abs(self.wzb))

    @classmethod
    def zero(cls) -> "Jet2":
        return cls(0j, 0j, 0j, 0j, 0j, 0j)


# --- quadrature engine -------------------------------------------------------


def _quadrature(spec, z, zb, nodes=None):
    """Yield (lam, w_phi, w_psi, branch, log_c, norm) blocks for a non-composite spec.

    ``w_phi``/``w_psi`` already include density values and quadrature weights;
    ``norm`` is the factor applied to the summed result.
    """
    if isinstance(spec, Monomial):
        R = spec.radius or cf.default_outer_radius(z, zb)
        contour = cf.CircleAtInfinity(R, nodes or spec.nodes)
        if not contour.admits(z, zb):
            raise cf.SingularPointError("circle at infinity does not enclose z, zb")
        lam, w = cf.contour_nodes(contour)
        phi = sum(c * lam ** (k + 1) for k, c in enumerate(spec.x)) if spec.x else 0 * lam
        psi = sum(c * lam ** k for k, c in enumerate(spec.y)) if spec.y else 0 * lam
        yield lam, w * phi, w * psi, "outer", spec.log_scale, 1 / TWO_PI_I
    elif isinstance(spec, InversePower):
        r = spec.radius or cf.default_inner_radius(z, zb)
        contour = cf.CircleAtOrigin(r, nodes or spec.nodes)
        if not contour.admits(z, zb):
            raise cf.SingularPointError("circle at origin must exclude z, zb")
        lam, w = cf.contour_nodes(contour)
        phi = sum(c * lam ** -(k + 1) for k, c in enumerate(spec.x)) if spec.x else 0 * lam
        psi = sum(c * lam ** -(k + 1) for k, c in enumerate(spec.y)) if spec.y else 0 * lam
        yield lam, w * phi, w * psi, "inner", spec.log_scale, 1 / TWO_PI_I
    elif isinstance(spec, Delta):
        if spec.points_phi:
            wt, lam = np.array(spec.points_phi, dtype=float).T
            yield lam.astype(complex), wt.astype(complex), 0 * wt, "principal", 1.0, 1.0
        if spec.points_psi:
            wt, lam = np.array(spec.points_psi, dtype=float).T
            yield lam.astype(complex), 0 * wt, wt.astype(complex), "principal", spec.log_scale, 1.0
    elif isinstance(spec, Sampled):
        a, b = spec.support
        # cells no wider than the distance of z, zb to the real axis
        dist = max(min(abs(complex(z).imag), abs(complex(zb).imag)), 1e-3)
        cells = max(spec.cells, int(math.ceil((b - a) / dist)))
        contour = cf.RealInterval(a, b, spec.nodes, cells)
        lam, w = cf.contour_nodes(contour)
        phi = spec.phi(lam.real) if spec.phi is not None else np.zeros(lam.shape)
        psi = spec.psi(lam.real) if spec.psi is not None else np.zeros(lam.shape)
        yield lam, w * phi, w * psi, "principal", spec.log_scale, 1.0
    else:
        raise TypeError(f"not a solution spec: {spec!r}")


def _kernel_terms(lam, z, zb, branch, log_c):
    K, L = cf.branch_kernels(lam, z, zb, branch)
    if log_c != 1:
        L = L - np.log(complex(log_c))
    a = 1.0 / (lam - z)
    b = 1.0 / (lam - zb)
    d = 1.0 / (z - zb)
    return K, L, a, b, d


def _quad_jet(spec, z, zb, nodes=None, raw=False) -> Jet2:
    acc = np.zeros(6, dtype=complex)
    for lam, wphi, wpsi, branch, log_c, norm in _quadrature(spec, z, zb, nodes):
        K, L, a, b, d = _kernel_terms(lam, z, zb, branch, log_c)
        part = np.zeros(6, dtype=complex)
        if np.any(wphi):
            part += [
                np.sum(wphi * K),
                np.sum(wphi * K * a) / 2,
                np.sum(wphi * K * b) / 2,
                0.75 * np.sum(wphi * K * a * a),
                0.75 * np.sum(wphi * K * b * b),
                0.25 * np.sum(wphi * K * a * b),
            ]
        if np.any(wpsi):
            Lz, Lzb = d + a, b - d
            part += [
                np.sum(wpsi * K * L),
                np.sum(wpsi * K * (0.5 * a * L + Lz)),
                np.sum(wpsi * K * (0.5 * b * L + Lzb)),
                np.sum(wpsi * K * (0.75 * a * a * L + a * Lz + a * a - d * d)),
                np.sum(wpsi * K * (0.75 * b * b * L + b * Lzb + b * b - d * d)),
                np.sum(wpsi * K * (0.25 * a * b * L + 0.5 * a * Lzb + 0.5 * b * Lz + d * d)),
            ]
        acc += part if raw else part * norm
    return Jet2(*acc)


# --- closed forms from the residue expansions --------------------------------


def closed_form_std(z, zb, k: int, log_family: bool = False, log_c: complex = 1.0) -> Jet2:
    """Closed-form jets of the normalized monomial basis.

    Non-log: W_1, W_2, W_3 (k = 1..3). Log: W~_0, W~_1 (k = 0, 1).
    """
    s = z + zb
    if not log_family:
        if k == 1:
            return Jet2(s / 2, 0.5, 0.5, 0, 0, 0)
        if k == 2:
            return Jet2((3 * z * z + 2 * z * zb + 3 * zb * zb) / 8, (3 * z + zb) / 4,
                        (z + 3 * zb) / 4, 0.75, 0.75, 0.25)
        if k == 3:
            return Jet2(
                (5 * z**3 + 3 * z * z * zb + 3 * z * zb * zb + 5 * zb**3) / 16,
                3 * (5 * z * z + 2 * z * zb + zb * zb) / 16,
                3 * (z * z + 2 * z * zb + 5 * zb * zb) / 16,
                (30 * z + 6 * zb) / 16,
                (6 * z + 30 * zb) / 16,
                (6 * z + 6 * zb) / 16,
            )
        raise ValueError("closed forms exist for k = 1, 2, 3 only")
    d = 1 / (z - zb)
    ell = np.log(z - zb) - np.log(complex(log_c))
    if k == 0:
        return Jet2(ell, d, -d, -d * d, -d * d, d * d)
    if k == 1:
        return Jet2(
            (2 * s + s * ell) / 2,
            1 + ell / 2 + s * d / 2,
            1 + ell / 2 - s * d / 2,
            d - s * d * d / 2,
            -d - s * d * d / 2,
            s * d * d / 2,
        )
    raise ValueError("closed log forms exist for k = 0, 1 only")


def closed_form_inverse(z, zb, k: int, log_family: bool = False, log_c: complex = 1.0) -> complex:
    """Closed-form values of the normalized inverse-power basis (no derivatives).

    Non-log k = 1, 2, 3; log k = 1, 2.
    """
    rho = np.sqrt(z * zb)
    p, q = 1 / z, 1 / zb
    if not log_family:
        if k == 1:
            return -1 / rho
        if k == 2:
            return -(p + q) / (2 * rho)
        if k == 3:
            return -(3 * p * p + 2 * p * q + 3 * q * q) / (8 * rho)
        raise ValueError("closed forms exist for k = 1, 2, 3 only")
    ell = np.log((z - zb) / (z * zb)) - np.log(complex(log_c))
    if k == 1:
        return -ell / rho
    if k == 2:
        return -(2 * (p + q) + (p + q) * ell) / (2 * rho)
    raise ValueError("closed log forms exist for k = 1, 2 only")


def closed_form_jet(spec: Monomial, z, zb) -> Jet2 | None:
    """Jet of a Monomial spec from closed forms, or None if out of range."""
    if len(spec.x) > 3 or len(spec.y) > 2:
        return None
    jet = Jet2.zero()
    for k, c in enumerate(spec.x, start=1):
        if c:
            jet = jet + closed_form_std(z, zb, k).scale(c)
    for k, c in enumerate(spec.y):
        if c:
            jet = jet + closed_form_std(z, zb, k, True, spec.log_scale).scale(c)
    return jet


def eval_jet(spec, z, zb, method: str = "auto", nodes: int | None = None, raw: bool = False) -> Jet2:
    """W and its derivatives through order two at (z, zb).

    Monomial and InversePower values are divided by 2 pi i unless ``raw``.
    ``method`` is "auto" (closed forms where available), "quadrature" or "closed".
    """
    z, zb = complex(z), complex(zb)
    cf.check_finite(z, zb)
    if abs(z - zb) <= cf.SINGULAR_RTOL * max(1.0, abs(z)):
        raise cf.CoincidentPointError("eval_jet needs z != zb")
    if isinstance(spec, Composite):
        jet = Jet2.zero()
        for part in spec.parts:
            jet = jet + eval_jet(part, z, zb, method, nodes, raw)
        return jet
    if isinstance(spec, Monomial) and method in ("auto", "closed"):
        jet = closed_form_jet(spec, z, zb)
        if jet is not None:
            return jet.scale(TWO_PI_I) if raw else jet
        if method == "closed":
            raise ValueError("no closed form for this spec")
    elif method == "closed":
        raise ValueError("closed forms exist only for Monomial specs")
    return _quad_jet(spec, z, zb, nodes, raw)


def eval_value(spec, z, zb, **kw) -> complex:
    return eval_jet(spec, z, zb, **kw).w


def _rising(x: float, n: int) -> float:
    out = 1.0
    for j in range(n):
        out *= x + j
    return out


def pure_derivative(spec, z, zb, n: int, var: str = "z", nodes: int | None = None) -> complex:
    """n-th pure derivative d^n W / dz^n (var="z") or d^n W / dzb^n (var="zb")."""
    if n < 0:
        raise ValueError("n must be non-negative")
    z, zb = complex(z), complex(zb)
    if isinstance(spec, Composite):
        return sum(pure_derivative(p, z, zb, n, var, nodes) for p in spec.parts)
    total = 0j
    for lam, wphi, wpsi, branch, log_c, norm in _quadrature(spec, z, zb, nodes):
        K, L, a, b, d = _kernel_terms(lam, z, zb, branch, log_c)
        e = a if var == "z" else b

        def dL(m):
            if m == 0:
                return L
            f = math.factorial(m - 1)
            if var == "z":
                return f * ((-1) ** (m - 1) * d**m + a**m)
            return f * (-(d**m) + b**m)

        dK = [_rising(0.5, j) * e**j * K for j in range(n + 1)]
        part = np.sum(wphi * dK[n])
        if np.any(wpsi):
            acc = sum(math.comb(n, j) * dK[j] * dL(n - j) for j in range(n + 1))
            part = part + np.sum(wpsi * acc)
        total += part * norm
    return complex(total)


def epd_residual(jet: Jet2, z, zb, k: float = 0.5) -> complex:
    """(z - zb) W_zzb - k (W_z - W_zb); zero iff the jet solves E(k,k)."""
    return (z - zb) * jet.wzzb - k * (jet.wz - jet.wzb)


# --- Appell transformation ---------------------------------------------------


def appell_jet(jet_fn: Callable[[complex, complex], Jet2], z, zb, a, b, c, d) -> Jet2:
    """Jet of W'(z,zb) = ((cz+d)(czb+d))^(-1/2) W((az+b)/(cz+d), (azb+b)/(czb+d))."""
    if not math.isclose(a * d - b * c, 1.0, rel_tol=0, abs_tol=1e-12):
        raise ValueError("Appell parameters need ad - bc = 1")
    ez, ezb = c * z + d, c * zb + d
    if abs(ez) < 1e-14 or abs(ezb) < 1e-14:
        raise MobiusPoleError("cz + d vanishes")
    P = 1 / np.sqrt(ez * ezb)
    Pz, Pzb = -0.5 * c * P / ez, -0.5 * c * P / ezb
    Pzz, Pzbzb = 0.75 * c * c * P / ez**2, 0.75 * c * c * P / ezb**2
    Pzzb = 0.25 * c * c * P / (ez * ezb)
    m1, m1b = 1 / ez**2, 1 / ezb**2
    m2, m2b = -2 * c / ez**3, -2 * c / ezb**3
    J = jet_fn((a * z + b) / ez, (a * zb + b) / ezb)
    return Jet2(
        P * J.w,
        Pz * J.w + P * J.wz * m1,
        Pzb * J.w + P * J.wzb * m1b,
        Pzz * J.w + 2 * Pz * J.wz * m1 + P * (J.wzz * m1 * m1 + J.wz * m2),
        Pzbzb * J.w + 2 * Pzb * J.wzb * m1b + P * (J.wzbzb * m1b * m1b + J.wzb * m2b),
        Pzzb * J.w + Pz * J.wzb * m1b + Pzb * J.wz * m1 + P * J.wzzb * m1 * m1b,
    )


def appell_transform(spec, z, zb, a, b, c, d, **kw) -> complex:
    return appell_jet(lambda u, v: eval_jet(spec, u, v, **kw), z, zb, a, b, c, d).w


# --- the dual function W* ----------------------------------------------------


def dual_jet(jet: Jet2, z, zb, value: complex = complex("nan")) -> Jet2:
    """Derivatives of W* from those of W (W*_z = (z-zb) W_z, W*_zb = -(z-zb) W_zb)."""
    dz = z - zb
    return Jet2(
        value,
        dz * jet.wz,
        -dz * jet.wzb,
        jet.wz + dz * jet.wzz,
        jet.wzb - dz * jet.wzbzb,
        -jet.wz + dz * jet.wzzb,
    )


def dual_value(spec, path: Sequence[complex] | complex, nodes_per_segment: int = 24, **kw) -> complex:
    """W*(z) by integrating (z - zb)(W_z dz - W_zb dzb) along a polyline, zb = conj(z).

    ``path`` is either the end point (straight segment from the base point i)
    or a polyline; the base point is prepended when the polyline starts elsewhere.
    The constant is fixed by W*(i) = 0.
    """
    pts = [complex(path)] if np.isscalar(path) else [complex(p) for p in path]
    if pts[0] != DUAL_BASE:
        pts.insert(0, DUAL_BASE)
    x, w = np.polynomial.legendre.leggauss(nodes_per_segment)
    s, w = (x + 1) / 2, w / 2
    total = 0j
    for p0, p1 in zip(pts[:-1], pts[1:]):
        delta = p1 - p0
        for si, wi in zip(s, w):
            zz = p0 + si * delta
            J = eval_jet(spec, zz, zz.conjugate(), **kw)
            total += wi * (zz - zz.conjugate()) * (J.wz * delta - J.wzb * delta.conjugate())
    return total


def dual_residual(spec, z, zb, **kw) -> complex:
    """E(-1/2,-1/2) residual of W* assembled from the jet of W."""
    J = dual_jet(eval_jet(spec, z, zb, **kw), z, zb)
    return epd_residual(J, z, zb, k=-0.5)


# --- alternative representations --------------------------------------------


def radon_value(phi: Callable, psi: Callable | None, z, zb) -> complex:
    """The segment (Radon-type) representation of a solution.

    W = 2i int_0^{pi/2} phi(lam(a)) da
        + 2i int_0^{pi/2} psi(lam(a)) log((zb - z) sin^2(2a) / 4) da,
    lam(a) = cos^2(a) z + sin^2(a) zb. The log endpoint singularities are
    integrated with algebraic-log weights.
    """
    from scipy.integrate import quad

    def lam_of(al):
        return math.cos(al) ** 2 * z + math.sin(al) ** 2 * zb

    def cquad(f, **kw):
        re = quad(lambda t: complex(f(t)).real, 0, math.pi / 2, limit=200, epsabs=1e-13, epsrel=1e-12, **kw)[0]
        im = quad(lambda t: complex(f(t)).imag, 0, math.pi / 2, limit=200, epsabs=1e-13, epsrel=1e-12, **kw)[0]
        return complex(re, im)

    total = 2j * cquad(lambda t: phi(lam_of(t)))
    if psi is not None:
        h = math.pi / 2

        def smooth(t):
            # log(sin 2t) - log t - log(pi/2 - t), bounded on [0, pi/2]
            return math.log(math.sin(2 * t) / (t * (h - t)))

        const = np.log((zb - z) / 4)
        total += 2j * cquad(lambda t: psi(lam_of(t)) * (const + 2 * smooth(t)))
        total += 4j * cquad(lambda t: psi(lam_of(t)), weight="alg-loga", wvar=(0, 0))
        total += 4j * cquad(lambda t: psi(lam_of(t)), weight="alg-logb", wvar=(0, 0))
    return total


def two_term_kk(z, zb, k: float, lam: Sequence[float], phi_w: Sequence[float], psi_w: Sequence[float]) -> complex:
    """Generic-k solution of E(k,k) built from real point densities.

    W = sum phi_j ((lam_j - z)(lam_j - zb))^(-k)
        + (z - zb)^(1 - 2k) sum psi_j ((lam_j - z)(lam_j - zb))^(k - 1)
    """
    lam = np.asarray(lam, dtype=complex)
    prod = (lam - z) * (lam - zb)
    first = np.sum(np.asarray(phi_w) * prod ** (-k))
    second = (z - zb) ** (1 - 2 * k) * np.sum(np.asarray(psi_w) * prod ** (k - 1))
    return complex(first + second)
