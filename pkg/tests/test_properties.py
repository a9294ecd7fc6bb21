import numpy as np
from hypothesis import assume, given
from hypothesis import strategies as st

from epdkit import complexfield as cf
from epdkit import critical as cr
from epdkit import epd, hamiltonian as hm, hydro
from epdkit.spec import Delta, InversePower, Monomial, Sampled, gaussian_density

coef = st.floats(-2, 2, allow_nan=False)
pos = st.floats(0.2, 5)
re = st.floats(-2, 2)
im = st.floats(0.2, 2)
uhp = st.builds(complex, re, im)


@given(st.builds(complex, re, st.floats(-2, 2)), uhp)
def test_kernel_squared(lam, z):
    zb = z.conjugate()
    assume(abs(lam - z) > 1e-3 and abs(lam - zb) > 1e-3)
    K = cf.kernel_pow(lam, z, zb)
    assert abs(K * K * (lam - z) * (lam - zb) - 1) < 1e-12


@given(re, uhp)
def test_kernel_conjugate_symmetry(lam, z):
    zb = z.conjugate()
    for f in (cf.kernel_pow, cf.kernel_log):
        a, b = f(lam, z, zb), f(lam, zb, z)
        if f is cf.kernel_pow:
            assert abs(np.conj(a) - b) < 1e-14 * abs(a)
        else:
            # the principal log of a conjugate only differs on the cut
            assert abs(np.conj(a) - b) < 1e-13 * max(1, abs(a))


@given(st.lists(coef, min_size=1, max_size=5), st.lists(coef, min_size=1, max_size=5), st.floats(0.5, 4))
def test_integrate_linear_and_refinement_stable(a, b, R):
    c = cf.CircleAtInfinity(R, 64)

    def poly(cs):
        return lambda l: sum(v * l ** (k - 2) for k, v in enumerate(cs))

    fa, fb = poly(a), poly(b)
    ia, ib = cf.integrate(fa, c), cf.integrate(fb, c)
    iab = cf.integrate(lambda l: 2 * fa(l) - fb(l), c)
    assert abs(iab - (2 * ia - ib)) < 1e-12 * (1 + abs(ia) + abs(ib))
    # only the 1/lam term has a residue
    assert abs(ia - 2j * np.pi * (a[1] if len(a) > 1 else 0)) < 1e-10
    fine = cf.integrate(fa, cf.CircleAtInfinity(R, 512))
    assert abs(fine - ia) < 1e-10


specs = st.one_of(
    st.builds(Monomial, st.lists(coef, max_size=5), st.lists(coef, max_size=3)),
    st.builds(InversePower, st.lists(coef, max_size=3), st.lists(coef, max_size=2)),
    st.builds(lambda w, n: Delta(points_phi=[(w, n)], points_psi=[(w / 2, n + 0.5)]), coef, re),
)


@given(specs, uhp)
def test_epd_residual_vanishes(spec, z):
    J = epd.eval_jet(spec, z, z.conjugate())
    assert abs(epd.epd_residual(J, z, z.conjugate())) <= 1e-9 * max(J.grad_norm, 1e-12)


@given(st.lists(coef, max_size=4), st.lists(coef, max_size=3), uhp)
def test_real_valued_jets(x, y, z):
    s = Monomial(x, y, log_scale=2j)
    J = epd.eval_jet(s, z, z.conjugate())
    scale = 1 + abs(J.w) + J.grad_norm
    assert abs(J.w.imag) < 1e-12 * scale
    assert abs(J.wzb - np.conj(J.wz)) < 1e-12 * scale
    assert abs(J.wzbzb - np.conj(J.wzz)) < 1e-11 * (scale + abs(J.wzz))
    assert abs(J.wzzb.imag) < 1e-11 * (scale + abs(J.wzzb))


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.3, 3), uhp)
def test_appell_preserves_epd(a, b, c, z):
    d = (1 + b * c) / a if abs(a) > 0.2 else None
    assume(d is not None)
    s = Monomial(x=[0.3, 1, -0.2], y=[0.5])
    zb = z.conjugate()
    assume(abs(c * z + d) > 0.1)
    J = epd.appell_jet(lambda u, v: epd.eval_jet(s, u, v), z, zb, a, b, c, d)
    assert abs(epd.epd_residual(J, z, zb)) < 1e-9 * max(J.grad_norm, 1e-12)


@given(uhp, uhp)
def test_dual_path_independent(z, mid):
    s = Monomial(x=[0.3, 1, -0.2], y=[0.5, 0.1])
    a = epd.dual_value(s, z)
    b = epd.dual_value(s, [mid, z])
    assert abs(a - b) < 1e-10 * (1 + abs(a))


@given(re, pos, pos, st.floats(-0.3, 0.3))
def test_critical_point_properties(x1, x2, y0, x3):
    s = Monomial(x=[x1, x2, x3], y=[y0])
    b0 = -x1 / (2 * x2) + 1j * np.sqrt(y0 / x2)
    try:
        cp = cr.find_critical(s, b0)
    except Exception:
        assume(False)
    assert abs(cp.betabar - np.conj(cp.beta)) < 1e-14 * abs(cp.beta)
    assert abs(cp.wbmix) < 1e-9 * (1 + abs(cp.wbb))
    if cp.order == 1:
        assert np.allclose(np.abs(cr.clinants(cp)), 1, atol=1e-10)


@given(st.floats(0.2, 2), st.floats(0.5, 3))
def test_velocity_cocycle(x2, y0):
    s = Monomial(x=[0.1, x2, 0.2], y=[y0])
    cp = cr.find_critical(s, 1j * np.sqrt(y0 / x2))
    labs = ["monomial-x:1", "monomial-x:2", "monomial-y:0"]
    v = lambda k, l: hydro.velocity(s, cp, k, l)  # noqa: E731
    assert abs(v(labs[0], labs[0]) - 1) < 1e-15
    assert abs(v(labs[1], labs[0]) * v(labs[0], labs[2]) - v(labs[1], labs[2])) < 1e-12 * abs(v(labs[1], labs[2]))


@given(st.integers(0, 10_000), st.sampled_from(["J0", "J1", "J1eps"]))
def test_operators_skew_and_resonant(seed, op):
    s = hm.random_state(32, 3, seed=seed)
    eps = 0.1 if op == "J1eps" else None
    assert hm.skew_check(op, s, trials=2, seed=seed, eps=eps).max < 1e-10
    if op != "J1eps":
        fr, fu = hm.apply(op, hm.grad(hm.CasimirU, s), s)
        assert max(abs(fr).max(), abs(fu).max()) < 1e-13


@given(st.floats(0.5, 3), st.floats(-1, 1), st.floats(0.2, 1), uhp)
def test_real_densities_give_real_w(amp, c, w, z):
    dens = Sampled(gaussian_density([[amp, c, w]]), gaussian_density([[amp / 2, -c, w]]), (-4, 4), 2j)
    J = epd.eval_jet(dens, z, z.conjugate())
    assert abs(J.w.imag) < 1e-12 * (1 + abs(J.w))
    assert abs(J.wzb - np.conj(J.wz)) < 1e-12 * (1 + J.grad_norm)
