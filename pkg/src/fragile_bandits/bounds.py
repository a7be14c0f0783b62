"""Closed-form regret and information-ratio bounds."""

from __future__ import annotations

import math

from .errors import DomainError


def _positive(**kw):
    for name, v in kw.items():
        if not v > 0:
            raise DomainError(f"{name} must be positive, got {v}")


def beta_free_regret_bound(d, T):
    """``40 d sqrt(T log(3 + 3 sqrt(2T) / (2d)))``, for identical action and parameter sets on the sphere."""
    _positive(d=d, T=T)
    return 40 * d * math.sqrt(T * math.log(3 + 3 * math.sqrt(2 * T) / (2 * d)))


def margin_regret_bound(d, T, lam, eta):
    """``20/lam sqrt(2 d max(eta, d) T log(3 + 3 sqrt(2T) / (2 d lam)))``."""
    _positive(d=d, T=T, lam=lam, eta=eta)
    if lam > 1:
        raise DomainError(f"lambda must lie in (0, 1], got {lam}")
    m = max(eta, d)
    return 20 / lam * math.sqrt(2 * d * m * T * math.log(3 + 3 * math.sqrt(2 * T) / (2 * d * lam)))


def logistic_slope_at(beta, delta):
    """``beta e^(beta delta) / (1 + e^(beta delta))^2``, the link slope at ``delta``."""
    z = beta * delta
    e = math.exp(-abs(z))
    return beta * e / (1 + e) ** 2


def info_ratio_regret_bound(d, T, gamma_bar, beta=None, delta=None, slope=None):
    """Regret bound from a uniform information-ratio bound ``gamma_bar``.

    ``sqrt(8 d gamma_bar T log(3 + 6 sqrt(2T) / d * slope))`` where ``slope``
    defaults to the link slope at ``delta``.
    """
    _positive(d=d, T=T, gamma_bar=gamma_bar)
    if slope is None:
        _positive(beta=beta, delta=delta)
        slope = logistic_slope_at(beta, delta)
    return math.sqrt(8 * d * gamma_bar * T * math.log(3 + 6 * math.sqrt(2 * T) / d * slope))


def general_info_bound(lam, eta, d):
    """``100 lam^-2 max(eta, d)``."""
    _positive(lam=lam, eta=eta, d=d)
    return 100 / lam**2 * max(eta, d)


def lipschitz_info_bound(d, beta):
    """``d ((1 + e^beta)^2 / e^beta)^2``, the ratio of squared link-slope bounds times ``d``."""
    _positive(d=d, beta=beta)
    try:
        r = math.exp(beta) + 2 + math.exp(-beta)
        return d * r * r
    except OverflowError:
        return math.inf


def theorem_bounds(d, T, lam, eta, beta, delta, gamma_bar):
    """All three regret bounds at horizon ``T`` as a dict."""
    _positive(d=d, T=T, lam=lam, eta=eta, beta=beta, delta=delta, gamma_bar=gamma_bar)
    return {
        "beta_free": beta_free_regret_bound(d, T),
        "margin": margin_regret_bound(d, T, lam, eta),
        "info_ratio": info_ratio_regret_bound(d, T, gamma_bar, beta, delta),
    }
