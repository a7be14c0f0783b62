import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fragile_bandits import DomainError, bar_gamma, gamma, gamma_constants, log_phi, phi, phi_derivative, phi_derivative_bounds

betas = st.floats(1e-3, 200)
xs = st.floats(-1, 1)


def test_phi_values():
    assert phi(3.0, 0.0) == 0.5
    assert phi(1, 1) == pytest.approx(math.e / (1 + math.e), abs=1e-15)
    assert phi(1, 1) == pytest.approx(0.731059, abs=1e-6)


def test_phi_far_tail_stays_inside_open_interval():
    v = phi(1000, -1)
    assert 0 < v < 1e-300
    assert not math.isnan(v)
    assert log_phi(1000, -1) == pytest.approx(-1000.0)
    assert phi(1000, 1) < 1


@given(betas, xs)
def test_phi_symmetry(beta, x):
    assert phi(beta, x) + phi(beta, -x) == pytest.approx(1.0, abs=1e-12)


@given(betas, xs, xs)
def test_phi_monotone(beta, a, b):
    lo, hi = min(a, b), max(a, b)
    assert phi(beta, lo) <= phi(beta, hi)


def test_derivative_bounds_beta2():
    L1, L2 = phi_derivative_bounds(2.0)
    assert L1 == pytest.approx(2 * math.e**2 / (1 + math.e**2) ** 2, rel=1e-14)
    assert L1 == pytest.approx(0.209987, abs=1e-6)
    assert L2 == 2.0


def test_derivative_bounds_small_beta_ratio():
    L1, L2 = phi_derivative_bounds(1e-6)
    assert L1 / L2 == pytest.approx(0.25, abs=1e-4)


@given(betas)
def test_derivative_bounds_bracket_slope_at_zero(beta):
    L1, L2 = phi_derivative_bounds(beta)
    assert L1 <= phi_derivative(beta, 0.0) * (1 + 1e-12) <= L2 * (1 + 1e-12)
    grid = np.linspace(-1, 1, 201)
    d = phi_derivative(beta, grid)
    assert np.all(d >= L1 * (1 - 1e-9)) and np.all(d <= L2)


@given(st.floats(1e-3, 500), st.floats(1e-3, 1))
def test_slope_at_lambda_below_quarter_over_lambda(beta, lam):
    z = beta * lam
    assert beta * math.exp(-z) / (1 + math.exp(-z)) ** 2 <= 1 / (4 * lam) * (1 + 1e-12)


def test_gamma_values():
    assert gamma(2.0, 0.5, 0.0) == 0
    assert gamma(2, 0.5, 0.5) == pytest.approx(0.231059, abs=1e-6)
    assert gamma(3, 0.4, 1.4) == pytest.approx(phi(3, 0.4) - phi(3, -1), abs=1e-15)


def test_gamma_domain():
    with pytest.raises(DomainError):
        gamma(2, 0.5, -0.1)
    with pytest.raises(DomainError):
        gamma(2, 0.5, 1.6)
    with pytest.raises(DomainError):
        bar_gamma(2, 0.5, 1.6)


def _grid_oracle(beta, lam, step=1e-5):
    z = np.arange(step, 1 + lam + step / 2, step)
    g = 1 / (1 + np.exp(-beta * lam)) - 1 / (1 + np.exp(-beta * (lam - z)))
    k = np.argmax(g / z)
    return z[k], g[k] / z[k]


def test_constants_match_grid_oracle():
    c = gamma_constants(2.0, 0.5)
    z_grid, slope = _grid_oracle(2.0, 0.5)
    assert c.z_star == pytest.approx(z_grid, abs=2e-5)
    assert c.w_mid == (0.5 + c.z_star) / 2
    # frozen from the 1e-5 grid oracle
    assert c.z_star == pytest.approx(0.74405, abs=1e-4)
    assert c.w_mid == pytest.approx(0.62203, abs=1e-4)
    assert c.xi == pytest.approx(0.060712, abs=1e-5)
    assert c.slope >= slope - 1e-12


def test_xi_at_lambda_one():
    assert gamma_constants(2.0, 1.0).xi > 0.1


def test_bar_gamma_endpoint():
    c = gamma_constants(2.0, 0.5)
    expected = gamma(2, 0.5, c.z_star) / c.z_star * 1.5
    assert bar_gamma(2.0, 0.5, 1.5) == pytest.approx(expected, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.5, 30), st.floats(0.05, 1.0))
def test_constants_properties(beta, lam):
    c = gamma_constants(beta, lam)
    assert 0 < c.z_star <= 1 + lam
    assert 0 < c.chi <= 1
    zeta = np.linspace(0, 1 + lam, 801)
    g, bg = gamma(beta, lam, zeta), bar_gamma(beta, lam, zeta, c)
    assert np.all(bg - g >= -1e-12)
    below = zeta <= c.z_star
    assert np.array_equal(bg[below], g[below])
    # argmax certificate
    assert np.all(g[1:] / zeta[1:] <= c.slope + 1e-12)
    # bar_gamma(z)/z non-decreasing overall, constant beyond z_star
    r = bg[1:] / zeta[1:]
    assert np.all(np.diff(r) >= -1e-12)
    assert np.ptp(r[zeta[1:] >= c.z_star]) < 1e-12


@pytest.mark.parametrize("beta", [2.0, 5.0, 10.0])
def test_chi_xi_ordering(beta):
    for lam in np.round(np.arange(1, 21) * 0.05, 2):
        c = gamma_constants(beta, lam)
        assert c.chi > c.xi > 0.1 * lam, (beta, lam, c)
