"""Exact posterior inference, policies, regret simulation and information ratios.

Posteriors are categorical over parameter indices and kept as normalized log
weights.  Simulation is vectorized over replications: each row of the batch is
an independent episode driven by its own random stream (see :mod:`.rng`), so a
batch of many runs reproduces single-episode runs bit for bit.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .bounds import general_info_bound, lipschitz_info_bound
from .errors import DegeneratePosterior, PreconditionFailed
from .geometry import Instance, lambda_of
from .link import gamma, gamma_constants, phi
from .rng import episode_uniforms

POLICIES = ("thompson", "uniform_random", "greedy_map")
THREADS_ENV = "FRAGILE_BANDITS_THREADS"


# --- posterior ---------------------------------------------------------------


def _normalize(lw):
    return lw - logsumexp(lw, axis=-1, keepdims=True)


@dataclass(frozen=True, eq=False)
class PosteriorState:
    log_weights: np.ndarray

    def __post_init__(self):
        with np.errstate(divide="ignore"):
            lw = _normalize(np.asarray(self.log_weights, dtype=float))
        if np.any(np.isnan(lw)):
            raise ValueError("log weights contain NaN")
        lw.setflags(write=False)
        object.__setattr__(self, "log_weights", lw)

    @classmethod
    def from_probs(cls, probs):
        with np.errstate(divide="ignore"):
            return cls(np.log(np.asarray(probs, dtype=float)))

    @classmethod
    def from_prior(cls, inst: Instance):
        return cls.from_probs(inst.prior)

    @property
    def probs(self) -> np.ndarray:
        return np.exp(self.log_weights)


def posterior_update(state: PosteriorState, inst: Instance, action: int, reward: int) -> PosteriorState:
    if reward not in (0, 1):
        raise ValueError(f"reward must be 0 or 1, got {reward}")
    log1, log0 = inst.log_likelihood
    loglik = log1[action] if reward else log0[action]
    return PosteriorState(state.log_weights + loglik)


# --- policies ----------------------------------------------------------------


@dataclass(frozen=True)
class Policy:
    kind: str = "thompson"
    seed: int = 0

    def __post_init__(self):
        if self.kind not in POLICIES:
            raise ValueError(f"unknown policy {self.kind!r}; expected one of {POLICIES}")


def _as_policy(policy) -> Policy:
    return policy if isinstance(policy, Policy) else Policy(policy)


def _inverse_cdf(weights, u):
    """Row-wise categorical draw: smallest index whose cumulative weight exceeds ``u``."""
    cdf = np.cumsum(weights, axis=-1)
    idx = np.sum(cdf <= u[:, None] * cdf[:, -1:], axis=-1)
    return np.minimum(idx, weights.shape[-1] - 1)


def _choose(kind: str, lw: np.ndarray, u: np.ndarray, inst: Instance) -> np.ndarray:
    if kind == "thompson":
        w = np.exp(lw - lw.max(axis=1, keepdims=True))
        return inst.optimal_map[_inverse_cdf(w, u)]
    if kind == "uniform_random":
        K = inst.n_actions
        return np.minimum((u * K).astype(int), K - 1)
    return inst.optimal_map[np.argmax(lw, axis=1)]


def select_action(policy, state: PosteriorState, inst: Instance, rng: np.random.Generator) -> int:
    """One action from ``policy`` given the posterior; consumes one uniform from ``rng``."""
    policy = _as_policy(policy)
    u = np.array([rng.random()])
    return int(_choose(policy.kind, state.log_weights[None, :], u, inst)[0])


# --- information ratio -------------------------------------------------------


def _excess(u, delta, q, log_m, log_q):
    """``q (u - log1p(u))`` with ``u = delta / q``, accurate for small and huge ``u``."""
    with np.errstate(all="ignore"):
        series = q * u * u * (1 / 2 - u * (1 / 3 - u * (1 / 4 - u * (1 / 5 - u * (1 / 6 - u / 7)))))
        direct = delta - q * (log_m - log_q)
    return np.where(np.abs(u) < 1e-3, series, direct)


def info_ratio_terms(probs, inst: Instance) -> dict:
    """Exact information-ratio ingredients for a batch of posteriors.

    ``probs`` has shape ``(R, N)``. Returns arrays of shape ``(R,)``:
    ``numerator`` (one-step expected regret of Thompson sampling),
    ``mutual_info`` (nats, between the optimal action and the observed
    action-reward pair), ``variance_lower_bound`` (twice the expected
    conditional variance of the played action's mean reward) and ``gamma_t``.
    """
    p = np.atleast_2d(np.asarray(probs, dtype=float))
    omap = inst.optimal_map
    x = inst.optimal_log_odds                       # x[i, j] = a(theta_i) @ theta_j
    Phi = phi(inst.beta, x)
    Phic = phi(inst.beta, -x)
    log1, log0 = inst.log_likelihood
    logPhi, logPhic = log1[omap], log0[omap]

    with np.errstate(divide="ignore"):
        logp = np.log(p)
    # explicit row-wise sums rather than BLAS, so a row's result does not
    # depend on how many other rows share the batch
    m = (p[:, None, :] * Phi[None]).sum(axis=2)     # m[r, i] = E_j Phi[i, j]
    mc = (p[:, None, :] * Phic[None]).sum(axis=2)
    log_m = logsumexp(logp[:, None, :] + logPhi[None], axis=2)
    log_mc = logsumexp(logp[:, None, :] + logPhic[None], axis=2)

    # delta = m_i - Phi[i, j], taken from the side of 1/2 where it is accurate
    low = Phi[None] <= 0.5
    delta = np.where(low, m[:, :, None] - Phi[None], Phic[None] - mc[:, :, None])
    with np.errstate(all="ignore"):
        kl = _excess(delta / Phi[None], delta, Phi[None], log_m[:, :, None], logPhi[None])
        kl = kl + _excess(-delta / Phic[None], -delta, Phic[None], log_mc[:, :, None], logPhic[None])
    support = (p[:, :, None] > 0) & (p[:, None, :] > 0)
    kl = np.where(support, np.maximum(kl, 0.0), 0.0)
    delta = np.where(support, delta, 0.0)

    pp = p[:, :, None] * p[:, None, :]
    mutual_info = (pp * kl).reshape(len(p), -1).sum(axis=1)
    vlb = 2 * (pp * delta**2).reshape(len(p), -1).sum(axis=1)

    diag = np.diag(Phi)
    diag_c = np.diag(Phic)
    # gap[i, j] = Phi[j, j] - Phi[i, j]
    gap = np.where(Phi > 0.5, Phic - diag_c[None, :], diag[None, :] - Phi)
    numerator = (pp * gap[None]).reshape(len(p), -1).sum(axis=1)

    with np.errstate(divide="ignore", invalid="ignore"):
        gamma_t = np.where(numerator == 0, 0.0, numerator**2 / mutual_info)
    degenerate = (mutual_info < 1e-15) & (numerator > 1e-8)
    return {
        "numerator": numerator,
        "mutual_info": mutual_info,
        "variance_lower_bound": vlb,
        "gamma_t": gamma_t,
        "degenerate": degenerate,
    }


@dataclass(frozen=True)
class InfoRatioRecord:
    numerator: float
    mutual_info: float
    gamma_t: float
    variance_lower_bound: float


def info_ratio_exact(posterior: PosteriorState, inst: Instance) -> InfoRatioRecord:
    terms = info_ratio_terms(posterior.probs[None, :], inst)
    if terms["degenerate"][0]:
        raise DegeneratePosterior(
            f"mutual information {terms['mutual_info'][0]:.3g} vanishes "
            f"while the one-step regret is {terms['numerator'][0]:.3g}"
        )
    return InfoRatioRecord(
        float(terms["numerator"][0]),
        float(terms["mutual_info"][0]),
        float(terms["gamma_t"][0]),
        float(terms["variance_lower_bound"][0]),
    )


@dataclass(frozen=True)
class PrimitiveBoundCheck:
    lhs: float
    rhs: float
    holds: bool
    degenerate: bool = False


def primitive_bound_check(posterior: PosteriorState, inst: Instance, tol=1e-10) -> PrimitiveBoundCheck:
    """Information ratio against ``numerator^2 / (2 E[Var[phi(X @ Y_hat) | X]])``."""
    t = info_ratio_terms(posterior.probs[None, :], inst)
    num, vlb, g = t["numerator"][0], t["variance_lower_bound"][0], t["gamma_t"][0]
    if vlb == 0:
        return PrimitiveBoundCheck(float(g), float("nan"), num == 0, True)
    rhs = num**2 / vlb
    return PrimitiveBoundCheck(float(g), float(rhs), bool(g <= rhs + tol))


@dataclass(frozen=True)
class InfoRatioBounds:
    gamma_t: float
    bound_small_beta: float
    bound_general: float
    general_applicable: bool
    small_beta_regime: bool
    holds_small_beta: bool
    holds_general: bool
    small_beta_below_100d: bool | None


def info_ratio_bound_check(posterior: PosteriorState, inst: Instance, eta: int, tol=1e-8) -> InfoRatioBounds:
    """Compare the exact information ratio with the Lipschitz and fragility bounds.

    The Lipschitz bound ``d ((1+e^beta)^2/e^beta)^2`` holds for every beta;
    below ``beta = 2`` it is also checked to sit under ``100 d``.  The
    fragility bound needs positive worst-case optimal log-odds.
    """
    g = info_ratio_exact(posterior, inst).gamma_t
    d = inst.d
    small = lipschitz_info_bound(d, inst.beta)
    lam = lambda_of(inst)
    applicable = lam > 0
    general = general_info_bound(min(lam, 1.0), eta, d) if applicable else float("inf")
    regime = inst.beta <= 2
    return InfoRatioBounds(
        gamma_t=g,
        bound_small_beta=small,
        bound_general=general,
        general_applicable=applicable,
        small_beta_regime=regime,
        holds_small_beta=g <= small + tol,
        holds_general=(g <= general + tol) if applicable else True,
        small_beta_below_100d=(small < 100 * d) if regime else None,
    )


@dataclass(frozen=True)
class NuPartition:
    sigma: np.ndarray
    nu: np.ndarray
    in_D: np.ndarray
    prob: np.ndarray
    threshold: float


def nu_partition(posterior: PosteriorState, inst: Instance) -> NuPartition:
    """Per optimal action: its own log-odds, expected shortfall and the split at ``gamma(w_mid)``.

    ``nu[i] = phi(sigma_i) - E_j phi(a_i @ theta_j)`` is the expected drop in
    success probability of action ``a_i`` when the true parameter is redrawn
    from the posterior rather than fixed at the one ``a_i`` is optimal for.
    """
    lam = lambda_of(inst)
    if lam <= 0:
        raise PreconditionFailed(f"worst-case optimal log-odds {lam} must be positive")
    lam = min(lam, 1.0)
    p = posterior.probs
    x = inst.optimal_log_odds
    Phi = phi(inst.beta, x)
    sigma = np.diag(x).copy()
    nu = np.diag(Phi) - Phi @ p
    c = gamma_constants(inst.beta, lam)
    threshold = gamma(inst.beta, lam, c.w_mid)
    return NuPartition(sigma, nu, nu <= threshold, p, float(threshold))


# --- simulation --------------------------------------------------------------


@dataclass
class SimulationResult:
    """Batch of episodes; arrays have one row per run and one column per step."""

    actions: np.ndarray
    rewards: np.ndarray
    inst_regret: np.ndarray
    realized_regret: np.ndarray
    theta_star: np.ndarray
    run_ids: np.ndarray
    base_seed: int
    info_t: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    info: dict = field(default_factory=dict)

    @property
    def cum_regret(self) -> np.ndarray:
        return np.cumsum(self.inst_regret, axis=1)

    @property
    def runs(self) -> int:
        return self.actions.shape[0]

    @property
    def horizon(self) -> int:
        return self.actions.shape[1]


@dataclass
class Trajectory:
    theta_star_index: int
    seed: int
    run_index: int
    actions: np.ndarray
    rewards: np.ndarray
    inst_regret: np.ndarray
    realized_regret: np.ndarray
    info_ratio: list = field(default_factory=list)

    @property
    def cum_regret(self) -> np.ndarray:
        return np.cumsum(self.inst_regret)


def _simulate_chunk(inst, kind, horizon, run_ids, base_seed, info_every):
    R = len(run_ids)
    draws = [episode_uniforms(base_seed, r, horizon) for r in run_ids]
    u0 = np.array([d[0] for d in draws])
    U = np.stack([d[1] for d in draws]) if R else np.zeros((0, horizon, 3))

    with np.errstate(divide="ignore"):
        log_prior = np.log(inst.prior)
    theta_star = _inverse_cdf(np.tile(inst.prior, (R, 1)), u0)
    lw = np.tile(_normalize(log_prior), (R, 1))
    log1, log0 = inst.log_likelihood
    Phi = inst.mean_reward
    opt = Phi[inst.optimal_map[theta_star], theta_star]

    actions = np.empty((R, horizon), dtype=np.int64)
    rewards = np.empty((R, horizon), dtype=np.int8)
    inst_regret = np.empty((R, horizon))
    realized = np.empty((R, horizon), dtype=np.int8)
    snaps = []
    for t in range(horizon):
        if info_every and (t + 1) % info_every == 0:
            snaps.append(info_ratio_terms(np.exp(lw), inst))
        a = _choose(kind, lw, U[:, t, 0], inst)
        q = Phi[a, theta_star]
        r = U[:, t, 1] < q
        actions[:, t] = a
        rewards[:, t] = r
        inst_regret[:, t] = opt - q
        realized[:, t] = (U[:, t, 2] < opt).astype(np.int8) - r
        lw = _normalize(lw + np.where(r[:, None], log1[a], log0[a]))
    info = {}
    if snaps:
        for key in snaps[0]:
            info[key] = np.stack([s[key] for s in snaps], axis=1)
    return actions, rewards, inst_regret, realized, theta_star, info


def resolve_threads(threads=None) -> int:
    if threads is None:
        threads = int(os.environ.get(THREADS_ENV, "1") or 1)
    return max(1, int(threads))


def simulate(
    inst: Instance,
    policy,
    horizon: int,
    runs: int,
    base_seed: int,
    info_ratio_every: int = 0,
    threads: int | None = None,
    run_offset: int = 0,
) -> SimulationResult:
    """Run ``runs`` independent episodes of length ``horizon``.

    Run ``r`` uses the random stream ``(base_seed, run_offset + r)``. With
    ``info_ratio_every = k > 0`` the exact information-ratio terms are
    recorded before acting at steps ``k, 2k, ...``.
    """
    if horizon < 1 or runs < 1:
        raise ValueError("horizon and runs must be at least 1")
    if info_ratio_every < 0:
        raise ValueError("info_ratio_every must be non-negative")
    kind = _as_policy(policy).kind
    run_ids = np.arange(run_offset, run_offset + runs)
    n_threads = min(resolve_threads(threads), runs)
    chunks = np.array_split(run_ids, n_threads)
    args = (inst, kind, horizon)
    if n_threads == 1:
        parts = [_simulate_chunk(*args, run_ids, base_seed, info_ratio_every)]
    else:
        with ThreadPoolExecutor(n_threads) as pool:
            parts = list(pool.map(lambda c: _simulate_chunk(*args, c, base_seed, info_ratio_every), chunks))
    cat = [np.concatenate([p[k] for p in parts]) for k in range(5)]
    info = {}
    if info_ratio_every:
        info = {key: np.concatenate([p[5][key] for p in parts]) for key in parts[0][5]}
    info_t = np.arange(info_ratio_every, horizon + 1, info_ratio_every) if info_ratio_every else np.zeros(0, int)
    return SimulationResult(*cat, run_ids=run_ids, base_seed=int(base_seed), info_t=info_t, info=info)


def run_episode(inst: Instance, policy, horizon: int, seed: int, run_index: int = 0, info_ratio_every: int = 0) -> Trajectory:
    res = simulate(inst, policy, horizon, 1, seed, info_ratio_every, threads=1, run_offset=run_index)
    records = [
        (int(t), InfoRatioRecord(*(float(res.info[k][0, s]) for k in ("numerator", "mutual_info", "gamma_t", "variance_lower_bound"))))
        for s, t in enumerate(res.info_t)
    ]
    return Trajectory(
        theta_star_index=int(res.theta_star[0]),
        seed=int(seed),
        run_index=int(run_index),
        actions=res.actions[0],
        rewards=res.rewards[0],
        inst_regret=res.inst_regret[0],
        realized_regret=res.realized_regret[0],
        info_ratio=records,
    )


def regret_summary(res: SimulationResult):
    """Mean cumulative regret and its standard error at every step."""
    cum = res.cum_regret
    mean = cum.mean(axis=0)
    if res.runs > 1:
        stderr = cum.std(axis=0, ddof=1) / np.sqrt(res.runs)
    else:
        stderr = np.zeros_like(mean)
    return mean, stderr


def bayes_regret_estimate(inst: Instance, policy, horizon: int, runs: int, base_seed: int, threads: int | None = None):
    """Monte-Carlo Bayesian regret ``(mean, stderr)`` for ``t = 1..horizon``.

    Uses the expected per-step gap ``phi(a* @ theta*) - phi(a_t @ theta*)``,
    which has the same expectation as the realized-reward regret.
    """
    return regret_summary(simulate(inst, policy, horizon, runs, base_seed, threads=threads))
