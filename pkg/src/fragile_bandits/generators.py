"""Instance families: matched sphere sets, the cone pair, packings and hard instances."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AmbiguousOptimum, DomainError, GenerationFailed, Infeasible, NonBijective, TargetUnreached
from .geometry import Instance, derive_optimal_map
from .link import phi


def _unit_rows(rng, n, d):
    v = rng.standard_normal((n, d))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def gen_sphere_matched(d: int, N: int, seed=0, beta: float = 1.0, max_tries: int = 100) -> Instance:
    """``N`` uniform points on the unit sphere used as both actions and parameters."""
    if N < 1 or d < 1:
        raise ValueError("need N >= 1 and d >= 1")
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        X = _unit_rows(rng, N, d)
        try:
            omap = derive_optimal_map(X, X)
        except (AmbiguousOptimum, NonBijective):
            continue
        meta = {"generator": "sphere", "config": {"d": d, "N": N, "beta": beta}, "seed": seed}
        return Instance(X, X, beta, np.full(N, 1.0 / N), omap, meta)
    raise GenerationFailed(f"no tie-free sample of {N} points in S^{d - 1} after {max_tries} tries")


def cone_gamma_interval(N: int, h: float) -> tuple[float, float]:
    """Open interval of admissible ``gamma_factor`` values for the cone pair."""
    s = math.sin(2 * math.pi / N)
    c = math.cos(2 * math.pi / N)
    return c * c / (1 - s * s * h * h), 1.0


def _cone_sets(N, h, gamma_factor):
    if N < 3:
        raise DomainError("the cone construction needs N >= 3")
    if not 0 < h < 1:
        raise DomainError(f"h must lie in (0, 1), got {h}")
    lo, hi = cone_gamma_interval(N, h)
    if gamma_factor is None:
        gamma_factor = (lo + hi) / 2
    if not lo < gamma_factor < hi:
        raise DomainError(f"gamma_factor {gamma_factor} outside ({lo}, {hi})")
    r = math.sqrt(1 - gamma_factor * h * h)
    ang = 2 * math.pi / N * np.arange(1, N + 1)
    X = np.column_stack([r * np.cos(ang), r * np.sin(ang), np.full(N, math.sqrt(1 - r * r))])
    Y = np.column_stack([h * np.cos(ang), h * np.sin(ang), np.full(N, -math.sqrt(1 - h * h))])
    return X, Y, gamma_factor, r


def gen_cone_iota0(N: int, h: float = 0.6, gamma_factor: float | None = None, beta: float = 1.0) -> Instance:
    """Two stacked circles in R^3 whose cross log-odds are all negative.

    Actions ``x_i`` sit on a circle of radius ``r`` above the origin and
    parameters ``y_i`` on a circle of radius ``h`` below it, at the same
    angles. ``gamma_factor`` (default: midpoint of its admissible interval)
    sets ``r = sqrt(1 - gamma_factor h^2)``; pushing it to 1 drives the optimal
    log-odds to 0 while every parameter stays in one clique.
    """
    X, Y, gf, r = _cone_sets(N, h, gamma_factor)
    meta = {"generator": "cone_iota0", "config": {"N": N, "h": h, "gamma_factor": gf, "r": r, "beta": beta}}
    return Instance(X, Y, beta, np.full(N, 1.0 / N), np.arange(N), meta)


@dataclass(frozen=True)
class PackingConfig:
    d: int
    epsilon: float
    target_count: int
    max_attempts: int = 100_000

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.target_count < 1 or self.d < 1:
            raise ValueError("need target_count >= 1 and d >= 1")


@dataclass(frozen=True)
class Packing:
    vectors: np.ndarray
    target_reached: bool

    @property
    def max_inner(self) -> float:
        G = self.vectors @ self.vectors.T
        np.fill_diagonal(G, -np.inf)
        return float(G.max()) if len(G) > 1 else -math.inf


def gen_packing(config: PackingConfig, seed=0, batch: int = 4096) -> Packing:
    """Greedy rejection sampling of unit vectors with pairwise inner product < epsilon.

    Candidates are drawn uniformly on the sphere and kept when they clear every
    vector kept so far, until ``target_count`` vectors are kept or
    ``max_attempts`` candidates were drawn.
    """
    rng = np.random.default_rng(seed)
    kept = np.empty((0, config.d))
    drawn = 0
    while len(kept) < config.target_count and drawn < config.max_attempts:
        m = min(batch, config.max_attempts - drawn)
        cand = _unit_rows(rng, m, config.d)
        drawn += m
        ok = (cand @ kept.T < config.epsilon).all(axis=1) if len(kept) else np.ones(m, bool)
        for k in np.flatnonzero(ok):
            v = cand[k]
            if len(kept) == 0 or np.all(kept @ v < config.epsilon):
                kept = np.vstack([kept, v])
                if len(kept) == config.target_count:
                    break
    pack = Packing(kept, len(kept) == config.target_count)
    assert pack.max_inner < config.epsilon
    return pack


def exp_family_angles(iota: float):
    """``(u, epsilon)`` for the lifted packing: ``u = v = arccos(-iota)/2``, ``epsilon = (1-iota)/(1+iota)``."""
    return 0.5 * math.acos(-iota), (1 - iota) / (1 + iota)


def gen_exponential_family(
    d: int,
    iota: float,
    seed=0,
    target_count: int = 64,
    max_attempts: int = 100_000,
    beta: float = 1.0,
    allow_partial: bool = False,
) -> Instance:
    """Lift a packing in S^{d-2} into a pair with optimal log-odds ``iota`` and negative cross log-odds.

    ``x_i = (cos u, sin u z_i)`` and ``y_i = (-cos u, sin u z_i)``. Raises
    TargetUnreached when fewer than ``target_count`` packing vectors were
    found, unless ``allow_partial``.
    """
    if not 0 < iota < 1:
        raise DomainError(f"iota must lie in (0, 1), got {iota}")
    if d < 3:
        raise DomainError("the lifted construction needs d >= 3")
    u, eps = exp_family_angles(iota)
    pack = gen_packing(PackingConfig(d - 1, eps, target_count, max_attempts), seed)
    if not pack.target_reached and not allow_partial:
        raise TargetUnreached(
            f"packing in S^{d - 2} with epsilon={eps:.6g} stopped at {len(pack.vectors)} "
            f"of {target_count} vectors after {max_attempts} attempts",
            pack.vectors,
        )
    Z = pack.vectors
    n = len(Z)
    X = np.column_stack([np.full(n, math.cos(u)), math.sin(u) * Z])
    Y = np.column_stack([np.full(n, -math.cos(u)), math.sin(u) * Z])
    meta = {
        "generator": "exp_family",
        "config": {"d": d, "iota": iota, "target_count": target_count, "max_attempts": max_attempts,
                   "epsilon": eps, "u": u, "beta": beta, "achieved": n},
        "seed": seed,
    }
    return Instance(X, Y, beta, np.full(n, 1.0 / n), np.arange(n), meta)


def hard_margins(inst: Instance):
    """``(lam, m)``: smallest optimal log-odds and largest non-optimal log-odds."""
    L = inst.log_odds
    omap = inst.optimal_map
    lam = float(L[omap, np.arange(inst.n_params)].min())
    mask = np.ones_like(L, dtype=bool)
    mask[omap, np.arange(inst.n_params)] = False
    m = float(L[mask].max()) if mask.any() else -math.inf
    return lam, m


def _hard_feasible(beta, lam, m, N):
    return phi(beta, lam) >= 1 - 1 / N and phi(beta, m) <= 1 / N


def calibrate_hard_beta(inst: Instance, N: int | None = None, tol: float = 1e-6) -> Instance:
    """Copy of ``inst`` with the smallest slope making optimal actions near-certain successes.

    Finds by bisection the least ``beta`` with ``phi(lam) >= 1 - 1/N`` and
    ``phi(m) <= 1/N``, where ``lam`` is the smallest optimal log-odds and
    ``m`` the largest log-odds of any non-optimal pair.
    """
    N = inst.n_actions if N is None else N
    lam, m = hard_margins(inst)
    if lam <= 0 or m >= 0:
        raise Infeasible(f"need positive optimal and negative cross log-odds, got lam={lam}, m={m}")
    lo, hi = 0.0, 1.0
    while not _hard_feasible(hi, lam, m, N):
        lo, hi = hi, 2 * hi
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if _hard_feasible(mid, lam, m, N):
            hi = mid
        else:
            lo = mid
    return inst.with_beta(hi, calibration={"N": N, "lambda": lam, "max_cross": m, "tol": tol})


def gen_hard_instance(lam: float, d: int, N: int, seed=0, iota: float | None = None, max_attempts: int = 200_000) -> Instance:
    """Lifted packing with optimal log-odds ``iota`` (default ``lam``) and calibrated slope."""
    iota = lam if iota is None else iota
    if iota < lam:
        raise DomainError(f"iota={iota} is below the required optimal log-odds lambda={lam}")
    base = gen_exponential_family(d, iota, seed, N, max_attempts)
    inst = calibrate_hard_beta(base, N)
    meta = {**inst.meta, "generator": "hard",
            "config": {**base.meta["config"], "lambda": lam, "N": N}}
    return Instance(inst.actions, inst.parameters, inst.beta, inst.prior, inst.optimal_map, meta)


def gen_nonmonotone_pair(N: int, h: float = 0.6, gamma_factor: float | None = None, beta: float = 1.0):
    """``(easy, hard)`` sharing the cone parameters; easy adds the parameters themselves as actions."""
    X, Y, gf, r = _cone_sets(N, h, gamma_factor)
    cfg = {"N": N, "h": h, "gamma_factor": gf, "r": r, "beta": beta}
    prior = np.full(N, 1.0 / N)
    easy = Instance(np.vstack([X, Y]), Y, beta, prior, np.arange(N, 2 * N),
                    {"generator": "nonmonotone_pair", "role": "easy", "config": cfg})
    hard = Instance(X, Y, beta, prior, np.arange(N),
                    {"generator": "nonmonotone_pair", "role": "hard", "config": cfg})
    return easy, hard
