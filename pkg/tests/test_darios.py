import numpy as np
import pytest

from epdkit import darios as dr
from epdkit.errors import DomainError, NoRootError
from epdkit.spec import gaussian_density

# strong densities put the root deep in the upper half-plane
PHI = gaussian_density([[2000, 0, 0.35], [-1000, 0, 0.7]])
PSI = gaussian_density([[300, 0.1, 0.4]])
SUPPORT = (-5.0, 5.0)
SEED = 0.0524 + 3.3695j


def test_beta_map():
    assert dr.beta_map(1.0, 0.0) == 1j
    assert dr.state_from_beta(-0.5 + 1j) == (1.0, 0.5)
    with pytest.raises(DomainError):
        dr.beta_map(-1.0, 0.0)


def test_constant_history_zero_residual():
    K = np.full((3, 4), 1.3)
    tau = np.full((3, 4), 0.2)
    assert dr.flow_residual(K, tau, np.arange(4) * 0.1, np.arange(3) * 0.1).max == 0


def _history(flow, h, n=5):
    xs = h * (np.arange(n) - n // 2)
    return xs, xs.copy(), *dr.solve_hodograph_darios(PHI, PSI, SUPPORT, xs, xs.copy(), flow, seed=SEED)


@pytest.mark.parametrize("flow", list(dr.FLOW_TIMES))
def test_flow_order(flow):
    r = []
    for h in (0.02, 0.01):
        xs, ts, K, tau, ok = _history(flow, h)
        assert ok.all()
        r.append(dr.flow_residual(K, tau, xs, ts, flow).max)
    assert abs(np.log2(r[0] / r[1]) - 2) < 0.3


def test_corrupted_history():
    xs, ts, K, tau, ok = _history("DaRios", 0.02)
    clean = dr.flow_residual(K, tau, xs, ts).max
    bad = dr.flow_residual(K + 1e-3 * np.random.default_rng(1).standard_normal(K.shape), tau, xs, ts).max
    assert bad > 100 * clean


def test_zero_density_has_no_root():
    xs = np.linspace(-0.1, 0.1, 3)
    with pytest.raises(NoRootError):
        dr.solve_hodograph_darios(None, None, (-1, 1), xs, xs + 1, "DaRios")


def test_initial_map_agrees_with_gradient():
    from epdkit.epd import eval_jet
    tau0, K0 = 0.3, 1.2
    I1, I2 = dr.initial_data_map(PHI, PSI, tau0, K0, SUPPORT)
    b = dr.beta_map(K0, tau0)
    # W_b at x = t = 0 equals (I1 + i I2)/2
    wb = eval_jet(dr.darios_spec(PHI, PSI, SUPPORT), b, b.conjugate()).wz
    assert abs(wb - (I1 + 1j * I2) / 2) < 1e-9 * abs(wb)


def test_even_density_gives_zero_first_integral():
    phi = gaussian_density([[1.0, -0.3, 0.5]])
    I1, _ = dr.initial_data_map(phi, None, 0.3, 0.8, (-4, 4))
    assert abs(I1) < 1e-14


def test_spike_density_has_no_profile():
    phi = gaussian_density([[1.0, 0.0, 1e-3]])
    with pytest.raises(NoRootError):
        dr.initial_profile(phi, None, [0.0], (0.0, 1.0), (-0.1, 0.1))


def test_initial_slice_matches_profile():
    xs = 0.02 * (np.arange(5) - 2)
    K, tau, ok = dr.solve_hodograph_darios(PHI, PSI, SUPPORT, xs, np.array([0.0, 0.02, 0.04]), seed=SEED)
    K0, tau0 = dr.initial_profile(PHI, PSI, xs, (-SEED.real, SEED.imag), SUPPORT)
    np.testing.assert_allclose(K[0], K0, atol=1e-8)
    np.testing.assert_allclose(tau[0], tau0, atol=1e-8)


def test_history_io(tmp_path):
    dens = tmp_path / "d.csv"
    lam = np.linspace(-1, 1, 21)
    np.savetxt(dens, np.c_[lam, np.cos(lam), 0 * lam], delimiter=",", header="lam,phi,psi", comments="")
    phi, psi, sup = dr.read_densities(dens)
    assert sup == (-1.0, 1.0) and phi(0.5) == pytest.approx(np.cos(0.5), abs=1e-4)
    dr.write_history(tmp_path / "h.csv", [0.0], [0.0, 1.0], np.ones((1, 2)), np.zeros((1, 2)))
    assert (tmp_path / "h.csv").read_text().splitlines()[0] == "t,x,K,tau"
