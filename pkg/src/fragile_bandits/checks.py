"""Numerical oracles for the supporting lemmas and the early linear-regret floor.

Lemma checks enumerate finite supports exactly; only the regret floor is
Monte Carlo.  The ``run_*`` suites sweep seeded random cases and dump every
counterexample as a JSON file that reproduces it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

import numpy as np

from .engine import PosteriorState, primitive_bound_check, regret_summary, simulate
from .errors import AmbiguousOptimum, NonBijective, PreconditionFailed
from .fragility import fragility_dimension, turan_adversarial_search, turan_lower_bound_check
from .geometry import Instance, derive_optimal_map
from .link import bar_gamma, gamma_constants


# --- lemma on marginals ------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DiscreteJoint:
    """Finitely supported joint law of ``(U, V)``; atom ``k`` is ``(u[k], v[k])`` with mass ``probs[k]``."""

    u: np.ndarray
    v: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        u = np.atleast_2d(np.asarray(self.u, dtype=float))
        v = np.atleast_2d(np.asarray(self.v, dtype=float))
        p = np.asarray(self.probs, dtype=float)
        if u.shape != v.shape or p.shape != (u.shape[0],):
            raise ValueError("u, v must be (n, d) and probs (n,)")
        if np.any(p < 0) or abs(p.sum() - 1) > 1e-12:
            raise ValueError("probs must be non-negative and sum to 1")
        if np.any(np.linalg.norm(u, axis=1) > 1 + 1e-12) or np.any(np.linalg.norm(v, axis=1) > 1 + 1e-12):
            raise ValueError("atoms must lie in the unit ball")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "probs", p)

    @classmethod
    def from_atoms(cls, atoms):
        """From a list of ``(u, v, prob)`` triples."""
        u, v, p = zip(*atoms)
        return cls(np.array(u), np.array(v), np.array(p))

    @property
    def d(self) -> int:
        return self.u.shape[1]


@dataclass(frozen=True)
class InequalityCheck:
    lhs: float
    rhs: float
    holds: bool


def lemma_marginals_check(joint: DiscreteJoint, tol: float = 1e-10) -> InequalityCheck:
    """``E|U @ V|^2 <= d E[(R @ S)^2]`` with ``R, S`` independent copies of the marginals."""
    p = joint.probs
    lhs = float(p @ np.abs(np.einsum("kd,kd->k", joint.u, joint.v))) ** 2
    G = joint.u @ joint.v.T
    rhs = joint.d * float(p @ (G * G) @ p)
    return InequalityCheck(lhs, rhs, lhs <= rhs + tol)


# --- lemma on ratio-monotone functions ----------------------------------------


def lemma_gbb_check(f, support, probs, tol: float = 1e-10) -> InequalityCheck:
    """``E[f(U)]^2 / E[U]^2 <= Var[f(U)] / Var[U]`` for ``f(0) = 0`` and ``f(z)/z`` non-decreasing.

    ``U`` is non-negative with the given finite law.  With ``Fraction``
    support and probabilities the comparison is exact and ``tol`` is ignored.
    A constant ``U`` makes both ratios 0/0; the claim is then reported as
    holding with NaN sides.
    """
    xs = list(support)
    ps = list(probs)
    exact = all(isinstance(x, (int, Fraction)) for x in xs + ps)
    if any(x < 0 for x in xs) or any(q < 0 for q in ps):
        raise ValueError("support and probs must be non-negative")
    fs = [f(x) for x in xs]
    f0 = f(Fraction(0) if exact else 0.0)
    if f0 != 0 and not (not exact and abs(f0) <= 1e-15):
        raise PreconditionFailed(f"f(0) = {f0} is not zero")

    pos = sorted((x, fx / x) for x, fx in zip(xs, fs) if x > 0)
    for (x0, r0), (x1, r1) in zip(pos, pos[1:]):
        slack = 0 if exact else 1e-12 * max(1.0, abs(r0))
        if r1 < r0 - slack:
            raise PreconditionFailed(f"f(z)/z decreases between z={x0} and z={x1}")

    if len({x for x, q in zip(xs, ps) if q > 0}) < 2:
        return InequalityCheck(float("nan"), float("nan"), True)
    if not exact:
        total = sum(ps)
        ps = [q / total for q in ps]
    mean_u = sum(q * x for q, x in zip(ps, xs))
    mean_f = sum(q * fx for q, fx in zip(ps, fs))
    var_u = sum(q * (x - mean_u) ** 2 for q, x in zip(ps, xs))
    var_f = sum(q * (fx - mean_f) ** 2 for q, fx in zip(ps, fs))
    if var_u == 0 or mean_u == 0:
        return InequalityCheck(float("nan"), float("nan"), True)
    lhs = mean_f**2 / mean_u**2
    rhs = var_f / var_u
    holds = lhs <= rhs if exact else lhs <= rhs + tol
    return InequalityCheck(lhs if exact else float(lhs), rhs if exact else float(rhs), bool(holds))


# --- pairwise negative sets --------------------------------------------------


def simplex_vertices(d: int) -> np.ndarray:
    """``d + 1`` unit vectors in R^d with pairwise inner product ``-1/d``."""
    if d < 1:
        raise ValueError("d must be at least 1")
    E = np.eye(d + 1) - 1.0 / (d + 1)
    # orthonormal basis of the sum-zero hyperplane
    Q, _ = np.linalg.qr(E[:, :d])
    V = E @ Q
    return V / np.linalg.norm(V, axis=1, keepdims=True)


def _max_off_diagonal(X):
    G = X @ X.transpose(0, 2, 1)
    k = X.shape[1]
    G[:, np.arange(k), np.arange(k)] = -np.inf
    return G.reshape(len(X), -1).max(axis=1)


def _repel(X, steps=300, lr=0.1, sharpness=30.0, check_every=25):
    """Projected gradient descent on a soft maximum of pairwise inner products.

    Returns True as soon as some configuration in the batch is pairwise negative.
    """
    k = X.shape[1]
    off = ~np.eye(k, dtype=bool)
    for step in range(steps):
        if step % check_every == 0 and np.any(_max_off_diagonal(X) < -1e-12):
            return True
        G = X @ X.transpose(0, 2, 1)
        w = np.where(off, np.exp(sharpness * (G - 1)), 0.0)
        w /= w.sum(axis=(1, 2), keepdims=True)
        X = X - lr * (w @ X)
        X /= np.linalg.norm(X, axis=2, keepdims=True)
    return bool(np.any(_max_off_diagonal(X) < -1e-12))


def pairwise_negative_capacity(d: int, attempts: int = 10_000, seed=0, batch: int = 4096) -> int:
    """Largest number of unit vectors with pairwise negative inner products that the search finds.

    For each size ``k = 2, 3, ...`` the search spends up to ``attempts``
    random restarts, each followed by repulsion descent, and stops at the
    first size it cannot realise.  A correct answer never exceeds ``d + 1``.
    """
    if d < 1:
        raise ValueError("d must be at least 1")
    rng = np.random.default_rng(seed)
    found = 1
    for k in range(2, d + 4):
        hit = False
        done = 0
        while done < attempts and not hit:
            b = min(batch, attempts - done)
            X = rng.standard_normal((b, k, d))
            X /= np.linalg.norm(X, axis=2, keepdims=True)
            hit = _repel(X)
            done += b
        if not hit:
            break
        found = k
    return found


# --- early linear regret -----------------------------------------------------


def hard_premises(inst: Instance, tol: float = 1e-12) -> list[str]:
    """Violations of: optimal success >= 1 - 1/N and every other action's success <= 1/N."""
    N = inst.n_params
    Phi = inst.mean_reward
    idx = np.arange(N)
    problems = []
    opt = Phi[inst.optimal_map, idx]
    if np.any(opt < 1 - 1 / N - tol):
        problems.append(f"optimal success {opt.min():.6g} below 1 - 1/N = {1 - 1 / N:.6g}")
    off = Phi.copy()
    off[inst.optimal_map, idx] = -np.inf
    if off.size and off.max() > 1 / N + tol:
        problems.append(f"off-optimal success {off.max():.6g} above 1/N = {1 / N:.6g}")
    return problems


def no_sublinear_verify(inst: Instance, policies, t_max: int, runs: int, seed=0, threads=None) -> list[dict]:
    """Monte-Carlo check that Bayesian regret is at least ``t/4`` for ``t <= t_max``.

    A row holds when ``mean >= t/4 - 3 stderr``; ``t = 0`` is omitted.
    """
    problems = hard_premises(inst)
    if problems:
        raise PreconditionFailed("; ".join(problems))
    N = inst.n_params
    if t_max > N / 2 - 1:
        raise PreconditionFailed(f"t_max={t_max} exceeds N/2 - 1 = {N / 2 - 1}")
    rows = []
    for policy in policies:
        mean, se = regret_summary(simulate(inst, policy, t_max, runs, seed, threads=threads))
        for t in range(1, t_max + 1):
            m, s = float(mean[t - 1]), float(se[t - 1])
            rows.append({"policy": policy, "t": t, "mean_regret": m, "stderr": s,
                         "floor": t / 4, "holds": m >= t / 4 - 3 * s})
    return rows


# --- randomized suites -------------------------------------------------------


@dataclass
class SuiteReport:
    suite: str
    cases: int = 0
    failures: int = 0
    artifacts: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return {"suite": self.suite, "cases": self.cases, "failures": self.failures,
                "artifacts": list(self.artifacts), **({"details": self.details} if self.details else {})}


def _to_jsonable(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, dict):
        return {k: _to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_to_jsonable(v) for v in x]
    return x


def _dump(report: SuiteReport, out_dir, name, payload):
    report.failures += 1
    if out_dir is None:
        return
    path = Path(out_dir) / "counterexamples" / f"{report.suite}_{name}.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_to_jsonable(payload), indent=2, sort_keys=True))
    report.artifacts.append(str(path))


def case_rng(seed, suite: str, case: int) -> np.random.Generator:
    """Independent stream for one sweep case."""
    tag = sum(ord(c) << (8 * i) for i, c in enumerate(suite[:8]))
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(tag, case)))


def _unit(rng, n, d):
    X = rng.standard_normal((n, d))
    return X / np.linalg.norm(X, axis=1, keepdims=True)


def random_valid_instance(rng, n_max=12, d_max=5, matched=None, beta=None) -> Instance:
    """Random instance on the sphere with a tie-free bijective optimal map.

    With ``matched`` true the actions equal the parameters; otherwise extra
    actions may be added.  Resamples until the map is well defined.
    """
    while True:
        d = int(rng.integers(2, d_max + 1))
        N = int(rng.integers(2, n_max + 1))
        Y = _unit(rng, N, d)
        same = rng.random() < 0.5 if matched is None else matched
        X = Y if same else np.vstack([Y + 0.3 * _unit(rng, N, d), _unit(rng, int(rng.integers(0, 4)), d)])
        X = X / np.linalg.norm(X, axis=1, keepdims=True)
        b = float(rng.choice([0.5, 1.0, 2.0, 5.0, 20.0])) if beta is None else beta
        try:
            omap = derive_optimal_map(X, Y)
        except (AmbiguousOptimum, NonBijective):
            continue
        prior = rng.dirichlet(np.ones(N))
        return Instance(X, Y, b, prior, omap, {"generator": "random_valid"})


def _random_posterior(rng, n):
    p = rng.dirichlet(np.full(n, float(rng.choice([0.1, 0.5, 1.0, 5.0]))))
    if rng.random() < 0.3:
        p[rng.random(n) < 0.3] = 0.0
        if p.sum() == 0:
            p[int(rng.integers(n))] = 1.0
    return p / p.sum()


def _instance_payload(inst):
    return {"actions": inst.actions, "parameters": inst.parameters, "beta": inst.beta,
            "prior": inst.prior, "optimal_map": inst.optimal_map}


def run_marginals_suite(cases=10_000, seed=0, out_dir=None) -> SuiteReport:
    rep = SuiteReport("marginals")
    for c in range(cases):
        rng = case_rng(seed, rep.suite, c)
        d = int(rng.integers(1, 6))
        n = int(rng.integers(1, 9))
        u = _unit(rng, n, d) * rng.random((n, 1)) ** (1 / d)
        v = _unit(rng, n, d) * rng.random((n, 1)) ** (1 / d)
        if rng.random() < 0.2:
            v = u.copy()
        p = rng.dirichlet(np.ones(n))
        p /= p.sum()
        joint = DiscreteJoint(u, v, p)
        res = lemma_marginals_check(joint)
        rep.cases += 1
        if not res.holds:
            _dump(rep, out_dir, str(c), {"seed": seed, "case": c, "u": u, "v": v, "probs": p,
                                         "lhs": res.lhs, "rhs": res.rhs})
    return rep


@lru_cache(maxsize=None)
def _constants(beta, lam):
    return gamma_constants(beta, lam)


def run_gbb_suite(cases=10_000, seed=0, out_dir=None) -> SuiteReport:
    """Ratio-monotone test functions: powers, exact rationals and the linearised gap."""
    rep = SuiteReport("gbb")
    lams = np.round(np.arange(1, 21) * 0.05, 2)
    for c in range(cases):
        rng = case_rng(seed, rep.suite, c)
        n = int(rng.integers(1, 9))
        probs = rng.dirichlet(np.ones(n))
        kind = c % 3
        if kind == 0:
            beta, lam = float(rng.choice([2.0, 5.0, 10.0])), float(rng.choice(lams))
            const = _constants(beta, lam)
            xs = rng.random(n) * (1 + lam)
            f = lambda z, beta=beta, lam=lam, const=const: float(bar_gamma(beta, lam, z, const))  # noqa: E731
            desc = {"f": "bar_gamma", "beta": beta, "lambda": lam}
        elif kind == 1:
            a = float(rng.uniform(1.0, 4.0))
            xs = rng.random(n) * 2
            f = lambda z, a=a: z**a  # noqa: E731
            desc = {"f": "power", "exponent": a}
        else:
            a = int(rng.integers(1, 4))
            xs = [Fraction(int(k), 7) for k in rng.integers(0, 15, n)]
            w = [int(k) for k in rng.integers(1, 10, n)]
            probs = [Fraction(k, sum(w)) for k in w]
            f = lambda z, a=a: z**a  # noqa: E731
            desc = {"f": "power", "exponent": a, "exact": True}
        res = lemma_gbb_check(f, xs, probs)
        rep.cases += 1
        if not res.holds:
            _dump(rep, out_dir, str(c), {"seed": seed, "case": c, **desc, "support": list(xs),
                                         "probs": list(probs), "lhs": res.lhs, "rhs": res.rhs})
    return rep


def run_capacity_suite(dims=range(1, 9), attempts=2000, seed=0, out_dir=None) -> SuiteReport:
    rep = SuiteReport("capacity")
    found = {}
    for d in dims:
        k = pairwise_negative_capacity(d, attempts, seed)
        S = simplex_vertices(d)
        G = S @ S.T
        np.fill_diagonal(G, -np.inf)
        simplex_ok = len(S) == d + 1 and G.max() < 0
        found[d] = k
        rep.cases += 1
        if k > d + 1 or not simplex_ok:
            _dump(rep, out_dir, f"d{d}", {"seed": seed, "d": d, "found": k, "simplex_ok": simplex_ok})
    rep.details["found"] = found
    return rep


def run_info_primitive_suite(cases=1000, seed=0, out_dir=None) -> SuiteReport:
    rep = SuiteReport("info_primitive")
    for c in range(cases):
        rng = case_rng(seed, rep.suite, c)
        inst = random_valid_instance(rng)
        p = _random_posterior(rng, inst.n_params)
        res = primitive_bound_check(PosteriorState.from_probs(p), inst)
        rep.cases += 1
        if not res.holds:
            _dump(rep, out_dir, str(c), {"seed": seed, "case": c, **_instance_payload(inst),
                                         "posterior": p, "lhs": res.lhs, "rhs": res.rhs})
    return rep


def run_turan_suite(cases=10_000, seed=0, out_dir=None, adversarial_every=500) -> SuiteReport:
    """Turan-type bound on random instances with positive optimal log-odds.

    Matched instances are checked against ``1/eta`` as well as ``1/(2 eta)``;
    every ``adversarial_every``-th case also runs the clique-supported search.
    """
    rep = SuiteReport("turan")
    worst = math.inf
    for c in range(cases):
        rng = case_rng(seed, rep.suite, c)
        while True:
            inst = random_valid_instance(rng)
            if np.all(np.diag(inst.optimal_log_odds) > 0):
                break
        eta = fragility_dimension(inst).size
        matched = inst.n_actions == inst.n_params and np.array_equal(inst.actions, inst.parameters)
        p = _random_posterior(rng, inst.n_params)
        checks = [turan_lower_bound_check(inst, p, eta, 0.5)]
        if matched:
            checks.append(turan_lower_bound_check(inst, p, eta, 1.0))
        if adversarial_every and c % adversarial_every == 0:
            prob, q = turan_adversarial_search(inst, iterations=2000, seed=c)
            checks.append(turan_lower_bound_check(inst, q, eta, 1.0 if matched else 0.5))
        rep.cases += 1
        worst = min(worst, min(ch.prob * eta for ch in checks))
        if not all(ch.holds for ch in checks):
            bad = [ch for ch in checks if not ch.holds][0]
            _dump(rep, out_dir, str(c), {"seed": seed, "case": c, **_instance_payload(inst), "eta": eta,
                                         "dist": p, "prob": bad.prob, "bound": bad.bound})
    rep.details["min_prob_times_eta"] = worst
    return rep


def run_lower_bound_suite(seed=0, out_dir=None, runs=5000, lam=0.5, d=10, N=20, t_max=None,
                          policies=("thompson", "greedy_map", "uniform_random"), threads=None) -> SuiteReport:
    from .generators import gen_hard_instance

    rep = SuiteReport("lower_bound")
    inst = gen_hard_instance(lam, d, N, seed)
    t_max = N // 2 - 1 if t_max is None else t_max
    rows = no_sublinear_verify(inst, policies, t_max, runs, seed, threads)
    rep.cases = len(rows)
    rep.details = {"lambda": lam, "d": d, "N": N, "beta": inst.beta, "rows": rows}
    for row in rows:
        if not row["holds"]:
            _dump(rep, out_dir, f"{row['policy']}_t{row['t']}", {"seed": seed, **row, "lambda": lam, "d": d, "N": N})
    return rep


SUITES = {
    "lemmas": ("marginals", "gbb", "capacity"),
    "info": ("info_primitive",),
    "turan": ("turan",),
    "lower_bound": ("lower_bound",),
}
_RUNNERS = {
    "marginals": run_marginals_suite,
    "gbb": run_gbb_suite,
    "capacity": run_capacity_suite,
    "info_primitive": run_info_primitive_suite,
    "turan": run_turan_suite,
    "lower_bound": run_lower_bound_suite,
}


def run_suites(names=("lemmas",), seed=0, out_dir=None, **overrides) -> list[SuiteReport]:
    """Run the named suite groups (``lemmas``, ``info``, ``turan``, ``lower_bound`` or ``all``)."""
    if "all" in names:
        names = tuple(SUITES)
    reports = []
    for name in names:
        if name not in SUITES:
            raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)} or 'all'")
        for sub in SUITES[name]:
            kw = {k: v for k, v in overrides.items() if k in _RUNNERS[sub].__code__.co_varnames}
            reports.append(_RUNNERS[sub](seed=seed, out_dir=out_dir, **kw))
    return reports
