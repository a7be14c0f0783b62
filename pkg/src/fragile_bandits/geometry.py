"""Finite logistic bandit instances and their geometric statistics.

An :class:`Instance` holds an action set, a parameter set (both inside the unit
ball), the slope ``beta`` of the logistic link, a prior over parameters and the
map sending each parameter to its unique optimal action.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from .errors import AmbiguousOptimum, NonBijective
from .link import log_phi, phi

TIE_TOL = 1e-9
NORM_TOL = 1e-9
PRIOR_TOL = 1e-12


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Instance:
    """A finite logistic bandit ``(actions, parameters, beta, prior)``.

    ``actions`` has shape ``(K, d)`` and ``parameters`` shape ``(N, d)``.
    Usually ``K == N``; extra actions that are optimal for no parameter are
    allowed so that supersets of an action set can be represented.
    ``optimal_map[i]`` is the index of the action maximizing
    ``actions @ parameters[i]``.

    Construction only checks shapes; use :func:`validate_instance` for the
    structural invariants, or :meth:`create` to derive the optimal map.
    """

    actions: np.ndarray
    parameters: np.ndarray
    beta: float
    prior: np.ndarray
    optimal_map: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        actions = np.atleast_2d(np.asarray(self.actions, dtype=float))
        params = np.atleast_2d(np.asarray(self.parameters, dtype=float))
        if actions.shape[1] != params.shape[1]:
            raise ValueError(
                f"actions have dimension {actions.shape[1]}, "
                f"parameters have dimension {params.shape[1]}"
            )
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        object.__setattr__(self, "actions", _frozen(actions))
        object.__setattr__(self, "parameters", _frozen(params))
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "prior", _frozen(np.ravel(self.prior)))
        object.__setattr__(self, "optimal_map", _frozen(np.ravel(self.optimal_map), int))

    @classmethod
    def create(cls, actions, parameters, beta=1.0, prior=None, optimal_map=None, meta=None):
        """Build an instance, deriving the optimal map when it is not given."""
        params = np.atleast_2d(np.asarray(parameters, dtype=float))
        n = params.shape[0]
        if prior is None or (isinstance(prior, str) and prior == "uniform"):
            prior = np.full(n, 1.0 / n)
        if optimal_map is None:
            optimal_map = derive_optimal_map(actions, params)
        return cls(actions, params, beta, prior, optimal_map, dict(meta or {}))

    @property
    def d(self) -> int:
        return self.parameters.shape[1]

    @property
    def n_params(self) -> int:
        return self.parameters.shape[0]

    @property
    def n_actions(self) -> int:
        return self.actions.shape[0]

    def with_beta(self, beta, **meta):
        return replace(self, beta=beta, meta={**self.meta, **meta})

    @cached_property
    def log_odds(self) -> np.ndarray:
        """``log_odds[k, i] = actions[k] @ parameters[i]``."""
        return _frozen(self.actions @ self.parameters.T)

    @cached_property
    def optimal_log_odds(self) -> np.ndarray:
        """``C[i, j] = a(theta_i) @ theta_j``, optimal action of ``i`` against ``j``."""
        return _frozen(self.log_odds[self.optimal_map])

    @cached_property
    def mean_reward(self) -> np.ndarray:
        """Success probabilities ``phi(actions[k] @ parameters[i])``, shape (K, N)."""
        return _frozen(phi(self.beta, self.log_odds))

    @cached_property
    def log_likelihood(self) -> tuple[np.ndarray, np.ndarray]:
        """Log success and log failure probabilities, each of shape (K, N)."""
        x = self.log_odds
        return _frozen(log_phi(self.beta, x)), _frozen(log_phi(self.beta, -x))


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str


def validate_instance(inst: Instance) -> list[Violation]:
    """Return every structural violation of ``inst``; empty when well formed."""
    out = []
    for name, vecs in (("actions", inst.actions), ("parameters", inst.parameters)):
        if not np.all(np.isfinite(vecs)):
            out.append(Violation("nonfinite", f"{name} contain non-finite coordinates"))
            continue
        norms = np.linalg.norm(vecs, axis=1)
        for k in np.flatnonzero(norms > 1 + NORM_TOL):
            out.append(Violation("norm", f"{name}[{k}] has norm {norms[k]:.12g} > 1"))

    n, K = inst.n_params, inst.n_actions
    prior = inst.prior
    if prior.shape != (n,):
        out.append(Violation("prior", f"prior has shape {prior.shape}, expected ({n},)"))
    elif np.any(prior < 0) or not np.all(np.isfinite(prior)):
        out.append(Violation("prior", "prior has negative or non-finite entries"))
    elif abs(prior.sum() - 1.0) > PRIOR_TOL:
        out.append(Violation("prior", f"prior sums to {prior.sum():.17g}"))
    if K < n:
        out.append(Violation("shape", f"{K} actions for {n} parameters"))

    omap = inst.optimal_map
    if omap.shape != (n,):
        out.append(Violation("optimal_map", f"optimal_map has shape {omap.shape}, expected ({n},)"))
        return out
    if np.any((omap < 0) | (omap >= K)):
        out.append(Violation("optimal_map", "optimal_map indexes outside the action set"))
        return out
    if len(np.unique(omap)) != n:
        out.append(Violation("non_bijective", f"optimal_map {omap.tolist()} is not injective"))
    if out and any(v.kind == "nonfinite" for v in out):
        return out

    L = inst.log_odds
    for i in range(n):
        col = L[:, i]
        mapped = col[omap[i]]
        best = col.max()
        if mapped < best - TIE_TOL:
            out.append(Violation(
                "not_optimal",
                f"action {omap[i]} has log-odds {mapped:.12g} for parameter {i}, "
                f"but {int(col.argmax())} reaches {best:.12g}",
            ))
            continue
        rivals = np.delete(col, omap[i])
        if rivals.size and rivals.max() > mapped - TIE_TOL:
            out.append(Violation(
                "ambiguous_optimum",
                f"parameter {i}: optimum {mapped:.12g} within {TIE_TOL} of a rival",
            ))
    return out


def derive_optimal_map(actions, parameters) -> np.ndarray:
    """Index of the log-odds maximizing action for every parameter.

    Raises AmbiguousOptimum when the best two actions are within ``TIE_TOL``
    and NonBijective when two parameters share an optimal action.
    """
    actions = np.atleast_2d(np.asarray(actions, dtype=float))
    parameters = np.atleast_2d(np.asarray(parameters, dtype=float))
    L = actions @ parameters.T
    best = L.argmax(axis=0)
    if L.shape[0] > 1:
        top2 = np.sort(L, axis=0)[-2:]
        gap = top2[1] - top2[0]
        tied = np.flatnonzero(gap < TIE_TOL)
        if tied.size:
            raise AmbiguousOptimum(
                f"parameters {tied.tolist()} have optimal-action gap below {TIE_TOL}"
            )
    values, counts = np.unique(best, return_counts=True)
    if np.any(counts > 1):
        shared = values[counts > 1].tolist()
        raise NonBijective(f"actions {shared} are optimal for more than one parameter")
    return best


def lambda_of(inst: Instance) -> float:
    """Worst-case optimal log-odds ``min_i a(theta_i) @ theta_i``. May be negative."""
    return float(np.diag(inst.optimal_log_odds).min())


def delta_of(inst: Instance) -> float:
    """``min_i |a(theta_i) @ theta_i|``; zero makes the delta-dependent regret bound vacuous."""
    return float(np.abs(np.diag(inst.optimal_log_odds)).min())
