import math

import numpy as np
import pytest

from epdkit import epd
from epdkit.errors import CoincidentPointError, MobiusPoleError
from epdkit.spec import Composite, Delta, InversePower, Monomial, Sampled, gaussian_density

LN2I = math.log(2) + 0.5j * math.pi


def test_first_monomial_value():
    assert epd.eval_value(Monomial(x=[1]), 1 + 1j, 1 - 1j) == pytest.approx(1.0, abs=1e-14)


def test_second_monomial_value():
    assert epd.eval_value(Monomial(x=[0, 1]), 1j, -1j) == pytest.approx(-0.5, abs=1e-14)


def test_log_value():
    assert epd.eval_value(Monomial(y=[1]), 1j, -1j) == pytest.approx(LN2I, abs=1e-14)


@pytest.mark.parametrize("spec", [Monomial(x=[0.3, -1, 0.5], y=[0.7, 0.2]),
                                  Monomial(x=[0, 0, 0, 1.5], y=[0, 0, 1])])
def test_quadrature_matches_closed_or_residual(spec):
    z = 0.4 + 0.9j
    J = epd.eval_jet(spec, z, z.conjugate(), method="quadrature")
    assert abs(epd.epd_residual(J, z, z.conjugate())) < 1e-12 * max(1, J.grad_norm)
    if len(spec.x) <= 3:
        C = epd.eval_jet(spec, z, z.conjugate(), method="closed")
        for a, b in zip((J.w, J.wz, J.wzb, J.wzz, J.wzbzb, J.wzzb), (C.w, C.wz, C.wzb, C.wzz, C.wzbzb, C.wzzb)):
            assert a == pytest.approx(b, abs=1e-11)


def test_raw_scaling():
    z = 0.1 + 1.2j
    a = epd.eval_value(Monomial(x=[1, 2]), z, z.conjugate())
    b = epd.eval_value(Monomial(x=[1, 2]), z, z.conjugate(), raw=True)
    assert b == pytest.approx(2j * math.pi * a, rel=1e-14)


def test_residual_of_constants_and_log():
    z, zb = 0.3 + 1j, 0.3 - 1j
    one = epd.Jet2(1, 0, 0, 0, 0, 0)
    d = 1 / (z - zb)
    log = epd.Jet2(np.log(z - zb), d, -d, -d * d, -d * d, d * d)
    assert epd.epd_residual(one, z, zb) == 0
    assert abs(epd.epd_residual(log, z, zb)) < 1e-15


def test_residual_of_z():
    assert epd.epd_residual(epd.Jet2(1j, 1, 0, 0, 0, 0), 1j, -1j) == -0.5


def test_coincident_points_rejected():
    with pytest.raises(CoincidentPointError):
        epd.eval_jet(Monomial(x=[1]), 1 + 1j, 1 + 1j)


@pytest.mark.parametrize("spec", [
    InversePower(x=[1, -0.5], y=[0.3]),
    Delta(points_phi=[(1.0, -0.5), (0.4, 1.0)], points_psi=[(0.7, 0.2)]),
    Sampled(gaussian_density([[1, 0, 0.5]]), gaussian_density([[0.5, 0.3, 0.4]]), (-3, 3)),
    Composite((Monomial(x=[1], y=[1]), Delta(points_phi=[(1.0, 0.0)]))),
])
def test_other_variants_solve_epd(spec):
    for z in (0.2 + 0.8j, -1.1 + 1.7j):
        J = epd.eval_jet(spec, z, z.conjugate())
        assert abs(epd.epd_residual(J, z, z.conjugate())) < 1e-11 * J.grad_norm


def test_generic_k_residual_is_not_zero_for_log():
    z, zb = 1j, -1j
    d = 1 / (z - zb)
    J = epd.Jet2(np.log(z - zb), d, -d, -d * d, -d * d, d * d)
    assert abs(epd.epd_residual(J, z, zb, k=0.3)) > 0.1


def test_inverse_closed_forms():
    z = 0.7 + 1.3j
    for k in (1, 2, 3):
        s = InversePower(x=[0] * (k - 1) + [1])
        assert epd.eval_value(s, z, z.conjugate()) == pytest.approx(epd.closed_form_inverse(z, z.conjugate(), k), rel=1e-11)
    for k in (1, 2):
        s = InversePower(y=[0] * (k - 1) + [1])
        assert epd.eval_value(s, z, z.conjugate()) == pytest.approx(
            epd.closed_form_inverse(z, z.conjugate(), k, True), rel=1e-11)


def test_appell_identity():
    s = Monomial(x=[0.3, 1], y=[0.5])
    z = 0.4 + 0.6j
    assert epd.appell_transform(s, z, z.conjugate(), 1, 0, 0, 1) == pytest.approx(epd.eval_value(s, z, z.conjugate()), abs=1e-15)


def test_appell_constant():
    z = 0.4 + 0.6j
    one = lambda u, v: epd.Jet2(1, 0, 0, 0, 0, 0)  # noqa: E731
    J = epd.appell_jet(one, z, z.conjugate(), 0, -1, 1, 0)
    assert J.w == pytest.approx(1 / np.sqrt(z * z.conjugate()), rel=1e-15)


def test_appell_maps_first_monomial_to_inverse_family():
    z = 0.4 + 0.6j
    a = epd.appell_transform(Monomial(x=[1]), z, z.conjugate(), 0, -1, 1, 0)
    b = epd.eval_value(InversePower(x=[0, 1]), z, z.conjugate())
    assert a == pytest.approx(b, rel=1e-12)


def test_appell_preserves_epd():
    s = Monomial(x=[0.3, 1], y=[0.5])
    z = 0.4 + 0.6j
    J = epd.appell_jet(lambda u, v: epd.eval_jet(s, u, v), z, z.conjugate(), 2, 1, 3, 2)
    assert abs(epd.epd_residual(J, z, z.conjugate())) < 1e-12 * J.grad_norm


def test_appell_checks():
    with pytest.raises(ValueError):
        epd.appell_transform(Monomial(x=[1]), 1j, -1j, 1, 1, 1, 1)
    with pytest.raises(MobiusPoleError):
        epd.appell_transform(Monomial(x=[1]), -1.0, 1j, 1, 0, 1, 1)


def test_dual_of_first_monomial():
    z = 0.5 + 1.5j
    val = epd.dual_value(Monomial(x=[1]), z)
    expect = ((z - z.conjugate()) ** 2 - (2j) ** 2) / 4
    assert val == pytest.approx(expect, abs=1e-13)


def test_dual_of_log():
    z = -0.5 + 0.5j
    val = epd.dual_value(Monomial(y=[1]), [1 + 1j, z])
    assert val == pytest.approx(z + z.conjugate(), abs=1e-13)


def test_dual_of_constant():
    assert epd.dual_value(Monomial(), 2 + 3j) == 0


def test_dual_path_independence():
    s = Monomial(x=[0.3, 1, 0.2], y=[0.5])
    z = 1.0 + 2.0j
    a = epd.dual_value(s, z)
    b = epd.dual_value(s, [0.1 + 1j, -1 + 1.5j, z])
    assert a == pytest.approx(b, abs=1e-12)


@pytest.mark.parametrize("spec", [Monomial(x=[1]), Monomial(y=[1]), Monomial(), Monomial(x=[0.2, 1, 0.1], y=[0.3, 1])])
def test_dual_residual(spec):
    z = 0.3 + 0.8j
    assert abs(epd.dual_residual(spec, z, z.conjugate())) < 1e-13


def test_radon_phi_is_half_closed_contour():
    z = 0.4 + 1.1j
    r = epd.radon_value(lambda l: l, None, z, z.conjugate())
    closed = epd.eval_value(Monomial(x=[1]), z, z.conjugate(), raw=True)
    assert r == pytest.approx(closed / 2, abs=1e-12)


def test_radon_unit_psi():
    z = 0.4 + 1.1j
    zb = z.conjugate()
    r = epd.radon_value(lambda l: 0 * l, lambda l: 1 + 0 * l, z, zb)
    assert r == pytest.approx(1j * math.pi * np.log((zb - z) / 16), abs=1e-11)


def test_two_term_solves_generic_k():
    lam, pw, sw = [0.3, -0.7], [1.0, 0.4], [0.2, 0.9]
    k = 0.3
    z = 0.2 + 0.9j
    h = 1e-4
    f = lambda a, b: epd.two_term_kk(a, b, k, lam, pw, sw)  # noqa: E731
    zb = z.conjugate()
    wz = (f(z + h, zb) - f(z - h, zb)) / (2 * h)
    wzb = (f(z, zb + h) - f(z, zb - h)) / (2 * h)
    wzzb = (f(z + h, zb + h) - f(z + h, zb - h) - f(z - h, zb + h) + f(z - h, zb - h)) / (4 * h * h)
    assert abs((z - zb) * wzzb - k * (wz - wzb)) < 1e-6


def test_poisson_trick_log_limit():
    # at k = 1/2 + eps the weights phi0 + eps phi1, psi0 + eps psi1 with
    # phi0 = -psi0 cancel at eps = 0; the O(eps) term is a log solution
    lam, phi0, psi0, phi1, psi1 = 0.7, -0.8, 0.8, 0.3, 0.5
    z = 0.1 + 0.9j
    target = epd.eval_value(Delta(points_phi=[(phi1 + psi1, lam)], points_psi=[(-2 * psi0, lam)]), z, z.conjugate())
    errs = []
    for e in (1e-2, 5e-3, 2.5e-3):
        w = epd.two_term_kk(z, z.conjugate(), 0.5 + e, [lam], [phi0 + e * phi1], [psi0 + e * psi1])
        errs.append(abs(w / e - target))
    assert errs[0] < 0.1
    assert 1.8 < errs[0] / errs[1] < 2.2
    assert 1.8 < errs[1] / errs[2] < 2.2


def test_pure_derivative_matches_jet():
    s = Monomial(x=[0.3, 1, 0.2], y=[0.5, 0.1])
    z = 0.3 + 0.8j
    J = epd.eval_jet(s, z, z.conjugate())
    assert epd.pure_derivative(s, z, z.conjugate(), 1) == pytest.approx(J.wz, abs=1e-12)
    assert epd.pure_derivative(s, z, z.conjugate(), 2, "zb") == pytest.approx(J.wzbzb, abs=1e-12)
    # third derivative vs finite differences of the second
    h = 1e-4
    d3 = (epd.eval_jet(s, z + h, z.conjugate()).wzz - epd.eval_jet(s, z - h, z.conjugate()).wzz) / (2 * h)
    assert epd.pure_derivative(s, z, z.conjugate(), 3) == pytest.approx(d3, abs=1e-7)
