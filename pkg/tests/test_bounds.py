import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fragile_bandits import DomainError, general_info_bound, lipschitz_info_bound, info_ratio_regret_bound, theorem_bounds, beta_free_regret_bound, margin_regret_bound
from fragile_bandits.bounds import logistic_slope_at


def test_beta_free_value():
    expected = 80 * math.sqrt(1000 * math.log(3 + 3 * math.sqrt(2000) / 4))
    assert beta_free_regret_bound(2, 1000) == pytest.approx(expected, rel=1e-15)
    assert 4790 < beta_free_regret_bound(2, 1000) < 4810


def test_margin_bound_finite_for_matched_sphere():
    for d in (2, 3, 5):
        assert math.isfinite(margin_regret_bound(d, 2000, 1.0, d + 1))
        assert math.isfinite(beta_free_regret_bound(d, 2000))


@given(st.integers(1, 20), st.integers(1, 10**6), st.floats(0.01, 1.0), st.integers(1, 50))
def test_info_ratio_bound_with_general_ratio_reproduces_margin_bound(d, T, lam, eta):
    gbar = general_info_bound(lam, eta, d)
    via_info_ratio = info_ratio_regret_bound(d, T, gbar, slope=1 / (4 * lam))
    assert via_info_ratio == pytest.approx(margin_regret_bound(d, T, lam, eta), rel=1e-9)


def test_info_ratio_bound_slope_from_beta_delta():
    s = logistic_slope_at(3.0, 0.4)
    assert s == pytest.approx(3 * math.exp(1.2) / (1 + math.exp(1.2)) ** 2, rel=1e-14)
    assert info_ratio_regret_bound(2, 100, 5.0, 3.0, 0.4) == pytest.approx(info_ratio_regret_bound(2, 100, 5.0, slope=s))


def test_info_bounds():
    assert general_info_bound(0.5, 3, 4) == pytest.approx(1600)
    b = lipschitz_info_bound(1, 2.0)
    assert b == pytest.approx((1 + math.e**2) ** 4 / math.e**4)
    assert b < 100
    assert lipschitz_info_bound(3, 1000.0) == math.inf


def test_domain_errors():
    with pytest.raises(DomainError):
        beta_free_regret_bound(0, 10)
    with pytest.raises(DomainError):
        margin_regret_bound(2, 10, 1.5, 2)
    with pytest.raises(DomainError):
        theorem_bounds(2, 10, 0.5, 2, 1.0, 0.0, 3.0)
    out = theorem_bounds(2, 10, 0.5, 2, 1.0, 0.5, 3.0)
    assert set(out) == {"beta_free", "margin", "info_ratio"}
