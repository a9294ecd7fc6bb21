import numpy as np
import pytest

from epdkit import critical as cr
from epdkit.epd import eval_jet
from epdkit.errors import ConvergenceError
from epdkit.spec import Delta, Monomial


def test_closed_form_root():
    cp = cr.find_critical(Monomial(x=[1, 1], y=[1]), 0.3 + 0.5j)
    assert abs(cp.beta - (-0.5 + 1j)) < 1e-12
    assert cp.order == 1
    assert abs(cp.betabar - cp.beta.conjugate()) < 1e-15


def test_symmetric_root():
    cp = cr.find_critical(Monomial(x=[0, 1], y=[1]), 0.2 + 2j)
    assert abs(cp.beta - 1j) < 1e-12


def test_no_root():
    with pytest.raises(ConvergenceError):
        cr.find_critical(Monomial(x=[1]), 1j)


def test_complex_mode_agrees():
    s = Monomial(x=[0.4, 1, 0.2], y=[1])
    a = cr.find_critical(s, 1j, mode="real")
    b = cr.find_critical(s, 1j, mode="complex")
    assert abs(a.beta - b.beta) < 1e-11
    assert abs(b.betabar - a.beta.conjugate()) < 1e-11


def test_guess_on_axis():
    with pytest.raises(ValueError):
        cr.find_critical(Monomial(x=[0, 1], y=[1]), 0.5)


def test_clinants_unit_hessian():
    cp = cr.CriticalPoint(1j, -1j, 1, 1, 0, 1, 0, 0.0, "real", (1, 1), None)
    c = cr.clinants(cp)
    assert np.allclose(sorted(c, key=lambda v: v.imag), [-1j, 1j])


def test_clinants_rotated_hessian():
    cp = cr.CriticalPoint(1j, -1j, 1j, -1j, 0, 1, 0, 0.0, "real", (1j, -1j), None)
    assert np.allclose(sorted(cr.clinants(cp), key=lambda v: v.real), [-1, 1])


def test_clinants_have_unit_modulus_on_real_slice():
    cp = cr.find_critical(Monomial(x=[0.4, 1, 0.2], y=[1]), 1j)
    assert np.allclose(np.abs(cr.clinants(cp)), 1, atol=1e-12)


def test_vary_zero():
    cp = cr.find_critical(Monomial(x=[1, 1], y=[1]), 1j)
    assert cr.vary_critical(cp, None) == (0, 0)


def test_vary_predictions():
    s = Monomial(x=[1, 1], y=[1])
    cp = cr.find_critical(s, 1j)
    e = 1e-3
    db, _ = cr.vary_critical(cp, Monomial(x=[e]))
    assert abs(db - (-e / 2)) < 1e-14
    db, _ = cr.vary_critical(cp, Monomial(y=[e]))
    assert abs(db - 1j * e / 2) < 1e-14


def test_vary_second_order_agreement():
    s = Monomial(x=[0.4, 1, 0.2], y=[1])
    cp = cr.find_critical(s, 1j)
    errs = []
    for e in (1e-2, 5e-3, 2.5e-3):
        db, _ = cr.vary_critical(cp, Monomial(y=[e, e]))
        moved = cr.find_critical(Monomial(x=[0.4, 1, 0.2], y=[1 + e, e]), cp.beta)
        errs.append(abs(moved.beta - cp.beta - db))
    assert 3.5 < errs[0] / errs[1] < 4.5 and 3.5 < errs[1] / errs[2] < 4.5


def test_exactness_single_parameter():
    s = Monomial(x=[0, 1], y=[1])
    cp = cr.find_critical(s, 1j)
    assert cr.exactness_check(s, ["monomial-x:1"], cp).max == 0


def test_exactness_second_order():
    s = Monomial(x=[0.4, 1, 0.2], y=[1])
    cp = cr.find_critical(s, 1j)
    labs = ["monomial-x:1", "monomial-x:2", "monomial-y:0"]
    r1 = cr.exactness_check(s, labs, cp, h=2e-2).max
    r2 = cr.exactness_check(s, labs, cp, h=1e-2).max
    assert 1.7 < np.log2(r1 / r2) < 2.3


def test_potential_loop_closes():
    s = Monomial(x=[0.4, 1, 0.2], y=[1])
    cp = cr.find_critical(s, 1j)
    closure, mismatch = cr.potential_loop(s, ["monomial-x:1", "monomial-y:0"], cp, radius=0.05, n=48)
    assert closure < 1e-10 and mismatch < 1e-12


def test_scan_finds_root():
    roots = cr.scan_critical(Monomial(x=[1, 1], y=[1]), (-2, 2, 0.2, 2.5), n=4)
    assert roots and abs(roots[0].beta - (-0.5 + 1j)) < 1e-10


def test_delta_spec_root():
    s = Delta(points_phi=[(-0.5, 0.0), (1.0, 1.0), (1.0, -1.0)])
    cp = cr.find_critical(s, 0.8j)
    J = eval_jet(s, cp.beta, cp.betabar)
    assert abs(J.wz) < 1e-10 and abs(cp.beta.real) < 1e-12


def test_level_curve_stays_on_level():
    s = Monomial(x=[0.4, 1, 0.2], y=[1])
    curve = cr.trace_level_curve(s, 0.5 + 1.5j, steps=15, h=0.02)
    vals = [eval_jet(s, p, p.conjugate()).w.real for p in curve.points]
    assert np.ptp(vals) < 1e-11
    assert np.all(np.abs(np.diff(curve.points)) < 0.021)


def test_dual_level_curve():
    s = Monomial(x=[0.4, 1, 0.2], y=[1])
    curve = cr.trace_level_curve(s, 0.5 + 1.5j, steps=5, h=0.02, field="dual")
    from epdkit.epd import dual_value
    vals = [dual_value(s, p).real for p in curve.points]
    assert np.ptp(vals) < 1e-10


def test_level_curve_reaches_double_point():
    from scipy.optimize import brentq
    s = Monomial(x=[0.4, 1, 0.2], y=[1])
    cp = cr.find_critical(s, 1j)
    w0 = eval_jet(s, cp.beta, cp.betabar).w.real
    th = cr.tangent_angles(cp)[0]

    def f(a):
        p = cp.beta + 0.1 * np.exp(1j * a)
        return eval_jet(s, p, p.conjugate()).w.real - w0

    a = brentq(f, th - 0.3, th + 0.3, xtol=1e-15)
    seed = cp.beta + 0.1 * np.exp(1j * a)
    flags = [cr.trace_level_curve(s, seed, steps=30, h=0.005, direction=d, double_tol=0.05).double_point
             for d in (1, -1)]
    assert any(flags)


def test_double_point_angle():
    s = Monomial(x=[0.4, 1, 0.2], y=[1])
    cp = cr.find_critical(s, 1j)
    ang, dirs = cr.double_point_angle(s, cp)
    assert abs(ang - np.pi / 2) < 1e-4
    ref = np.sort(cr.tangent_angles(cp))
    assert np.allclose(np.sort(dirs), ref, atol=1e-3)
