"""Logistic link, its derivative bounds, and the gap functions built on it.

``gamma(beta, lam, zeta) = phi(lam) - phi(lam - zeta)`` is the drop in success
probability when the log-odds fall ``zeta`` below ``lam``.  ``bar_gamma``
replaces it beyond its best chord slope by the linear extension, which makes
``bar_gamma(zeta) / zeta`` non-decreasing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize
from scipy.special import expit

from .errors import ConvergenceError, DomainError

_TINY = np.nextafter(0.0, 1.0)
_BELOW_ONE = np.nextafter(1.0, 0.0)
_DOMAIN_TOL = 1e-12


def phi(beta, x):
    """Logistic link ``exp(beta x) / (1 + exp(beta x))``.

    Values are rounded into the open interval (0, 1): where the exact value is
    closer to 0 or 1 than float64 can resolve, the nearest representable
    interior number is returned. Use :func:`log_phi` for tail accuracy.
    """
    out = np.clip(expit(beta * np.asarray(x, dtype=float)), _TINY, _BELOW_ONE)
    return out if out.ndim else float(out)


def log_phi(beta, x):
    """``log phi(beta, x)``, accurate for any finite ``beta * x``."""
    out = -np.logaddexp(0.0, -beta * np.asarray(x, dtype=float))
    return out if out.ndim else float(out)


def phi_derivative(beta, x):
    z = beta * np.asarray(x, dtype=float)
    out = beta * expit(z) * expit(-z)
    return out if out.ndim else float(out)


def phi_derivative_bounds(beta):
    """``(L1, L2)`` with ``L1 <= phi'(x) <= L2`` on ``[-1, 1]``.

    ``L1 = beta e^beta / (1 + e^beta)^2`` (attained at the endpoints) and
    ``L2 = beta``, the crude upper bound; the true maximum is ``beta / 4``.
    """
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}")
    return float(beta * expit(beta) * expit(-beta)), float(beta)


def _check_zeta(lam, zeta):
    z = np.asarray(zeta, dtype=float)
    if np.any(z < -_DOMAIN_TOL) or np.any(z > 1 + lam + _DOMAIN_TOL) or np.any(np.isnan(z)):
        raise DomainError(f"zeta must lie in [0, {1 + lam}]")
    return z


def gamma(beta, lam, zeta):
    z = _check_zeta(lam, zeta)
    out = expit(beta * lam) - expit(beta * (lam - z))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class GammaConstants:
    beta: float
    lam: float
    z_star: float
    w_mid: float
    chi: float
    xi: float

    @property
    def slope(self) -> float:
        """Best chord slope ``gamma(z_star) / z_star``."""
        return gamma(self.beta, self.lam, self.z_star) / self.z_star


def _chord_slope(beta, lam, zeta):
    zeta = np.asarray(zeta, dtype=float)
    return (expit(beta * lam) - expit(beta * (lam - zeta))) / zeta


def gamma_constants(beta, lam, grid_step=1e-3, tol=1e-10) -> GammaConstants:
    """Maximizer of the chord slope ``gamma(zeta)/zeta`` and the derived constants.

    ``z_star`` comes from a grid scan refined by golden-section search.
    ``chi`` is the smallest ratio ``gamma / bar_gamma`` on ``[z_star, 1 + lam]``
    and ``xi = gamma(w_mid) - gamma(lam)`` with ``w_mid = (lam + z_star) / 2``;
    both depend on ``(beta, lam)`` only.
    """
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}")
    if not 0 < lam <= 1:
        raise DomainError(f"lambda must lie in (0, 1], got {lam}")
    hi = 1.0 + lam
    grid = np.linspace(0.0, hi, int(np.ceil(hi / grid_step)) + 1)[1:]
    slopes = _chord_slope(beta, lam, grid)
    k = int(np.argmax(slopes))
    if k == len(grid) - 1:
        z_star = hi
    elif k == 0:
        raise ConvergenceError(f"chord slope peaks at the left grid edge for beta={beta}, lambda={lam}")
    else:
        res = optimize.minimize_scalar(
            lambda z: -_chord_slope(beta, lam, z),
            bracket=(grid[k - 1], grid[k], grid[k + 1]),
            method="golden",
            tol=tol,
        )
        if not res.success or not grid[k - 1] <= res.x <= grid[k + 1]:
            raise ConvergenceError(f"golden-section search left its bracket: {res}")
        z_star = float(res.x)

    slope = _chord_slope(beta, lam, z_star)
    tail = np.linspace(z_star, hi, 2001)
    ratio = _chord_slope(beta, lam, tail) / slope
    chi = float(min(1.0, ratio.min()))
    w_mid = (lam + z_star) / 2
    xi = float(gamma(beta, lam, w_mid) - gamma(beta, lam, lam))
    return GammaConstants(float(beta), float(lam), z_star, w_mid, chi, xi)


def bar_gamma(beta, lam, zeta, constants: GammaConstants | None = None):
    """``gamma`` up to ``z_star``, its chord ``slope * zeta`` beyond."""
    z = _check_zeta(lam, zeta)
    c = constants or gamma_constants(beta, lam)
    out = np.where(z <= c.z_star, expit(beta * lam) - expit(beta * (lam - z)), c.slope * z)
    return out if out.ndim else float(out)
