"""Fragility dimension as a maximum clique, and the Turan-type inequality.

Parameters ``i`` and ``j`` are joined when each one's optimal action has
negative log-odds under the other.  The fragility dimension is the clique
number of that graph.  Cliques are searched with bitset branch and bound
(greedy colouring bounds, Tomita-style), which is exact up to ``EXACT_CAP``
vertices by default.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import PreconditionFailed, SizeCapExceeded
from .geometry import Instance

NEG_TOL = 1e-12
EXACT_CAP = 64
GREEDY_RESTARTS = 200


def negative(x):
    """Strict negativity with values in ``(-NEG_TOL, 0)`` counted as non-negative."""
    return np.asarray(x) < -NEG_TOL


@dataclass(frozen=True, eq=False)
class FragilityGraph:
    adjacency: np.ndarray

    def __post_init__(self):
        adj = np.array(self.adjacency, dtype=bool)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValueError("adjacency must be square")
        if np.any(adj != adj.T) or np.any(np.diag(adj)):
            raise ValueError("adjacency must be symmetric without self-loops")
        adj.setflags(write=False)
        object.__setattr__(self, "adjacency", adj)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def edges(self) -> list[tuple[int, int]]:
        i, j = np.nonzero(np.triu(self.adjacency))
        return list(zip(i.tolist(), j.tolist()))

    @cached_property
    def neighbours(self) -> tuple[int, ...]:
        """Neighbourhoods as int bitsets."""
        return tuple(
            sum(1 << int(j) for j in np.flatnonzero(row)) for row in self.adjacency
        )

    def is_clique(self, vertices) -> bool:
        v = list(vertices)
        sub = self.adjacency[np.ix_(v, v)]
        return bool(np.all(sub | np.eye(len(v), dtype=bool)))


@dataclass(frozen=True)
class CliqueResult:
    size: int
    witness: tuple[int, ...]
    exact: bool
    notes: tuple[str, ...] = field(default=())


def build_fragility_graph(inst: Instance) -> FragilityGraph:
    neg = negative(inst.optimal_log_odds)
    adj = neg & neg.T
    np.fill_diagonal(adj, False)
    return FragilityGraph(adj)


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _colour_sort(P: int, nbrs):
    """Greedy colouring of ``P``; vertices returned in non-decreasing colour."""
    order, colours = [], []
    colour = 0
    uncoloured = P
    while uncoloured:
        colour += 1
        Q = uncoloured
        while Q:
            low = Q & -Q
            v = low.bit_length() - 1
            Q &= ~nbrs[v] & ~low
            uncoloured &= ~low
            order.append(v)
            colours.append(colour)
    return order, colours


def max_clique_exact(g: FragilityGraph, cap: int = EXACT_CAP) -> CliqueResult:
    """Maximum clique by branch and bound with colouring upper bounds."""
    if g.n > cap:
        raise SizeCapExceeded(f"graph has {g.n} vertices, exact solver cap is {cap}")
    if g.n == 0:
        return CliqueResult(0, (), True)
    nbrs = g.neighbours
    best = [0]  # any single vertex is a clique

    def expand(R, P):
        order, colours = _colour_sort(P, nbrs)
        for v, c in zip(reversed(order), reversed(colours)):
            if len(R) + c <= len(best):
                return
            R.append(v)
            newP = P & nbrs[v]
            if newP:
                expand(R, newP)
            elif len(R) > len(best):
                best[:] = R
            R.pop()
            P &= ~(1 << v)

    expand([], (1 << g.n) - 1)
    return CliqueResult(len(best), tuple(sorted(best)), True)


def max_clique_greedy(g: FragilityGraph, restarts: int = GREEDY_RESTARTS, seed=0) -> CliqueResult:
    """Randomized greedy lower bound on the clique number."""
    if g.n == 0:
        return CliqueResult(0, (), False)
    rng = np.random.default_rng(seed)
    nbrs = g.neighbours
    degree = g.adjacency.sum(axis=1)
    best: list[int] = []
    for r in range(max(1, restarts)):
        start = int(np.argmax(degree)) if r == 0 else int(rng.integers(g.n))
        clique = [start]
        cand = nbrs[start]
        while cand:
            pool = list(_bits(cand))
            # prefer candidates with many neighbours inside the candidate set
            inner = np.array([bin(nbrs[v] & cand).count("1") for v in pool], dtype=float)
            score = inner + rng.random(len(pool)) * (r > 0)
            v = pool[int(np.argmax(score))]
            clique.append(v)
            cand &= nbrs[v]
        if len(clique) > len(best):
            best = clique
    return CliqueResult(len(best), tuple(sorted(best)), False)


def maximal_cliques(g: FragilityGraph, limit: int = 100_000):
    """Yield maximal cliques (Bron-Kerbosch with pivoting), at most ``limit``."""
    nbrs = g.neighbours
    count = 0
    stack = [((), (1 << g.n) - 1, 0)]
    while stack:
        R, P, X = stack.pop()
        if not P and not X:
            yield R
            count += 1
            if count >= limit:
                return
            continue
        pivot = max(_bits(P | X), key=lambda u: bin(P & nbrs[u]).count("1"))
        for v in _bits(P & ~nbrs[pivot]):
            bit = 1 << v
            stack.append((R + (v,), P & nbrs[v], X & nbrs[v]))
            P &= ~bit
            X |= bit


def fragility_dimension(
    inst: Instance,
    cap: int = EXACT_CAP,
    allow_greedy: bool = True,
    restarts: int = GREEDY_RESTARTS,
    seed=0,
) -> CliqueResult:
    g = build_fragility_graph(inst)
    if g.n <= cap:
        return max_clique_exact(g, cap)
    if not allow_greedy:
        raise SizeCapExceeded(f"{g.n} parameters exceed the exact cap {cap} and greedy is disabled")
    msg = f"{g.n} parameters exceed the exact cap {cap}; greedy lower bound reported"
    warnings.warn(msg, RuntimeWarning, stacklevel=2)
    res = max_clique_greedy(g, restarts, seed)
    return CliqueResult(res.size, res.witness, False, (msg,))


# --- Turan-type inequality -------------------------------------------------


@dataclass(frozen=True)
class TuranCheck:
    prob: float
    bound: float
    holds: bool


def _require_positive_optimum(inst: Instance):
    diag = np.diag(inst.optimal_log_odds)
    if np.any(diag <= 0):
        bad = np.flatnonzero(diag <= 0).tolist()
        raise PreconditionFailed(f"parameters {bad} have non-positive optimal log-odds")


def _as_dist(inst: Instance, dist):
    p = np.asarray(dist, dtype=float)
    if p.shape != (inst.n_params,) or np.any(p < 0) or abs(p.sum() - 1) > 1e-9:
        raise ValueError("dist must be a probability vector over parameter indices")
    return p


def nonnegative_pairs(inst: Instance) -> np.ndarray:
    """``S[i, j] = 1`` when the optimal action of ``i`` has log-odds >= 0 under ``j``."""
    return (~negative(inst.optimal_log_odds)).astype(float)


def turan_lower_bound_check(inst: Instance, dist, eta: int | None = None, strength: float = 0.5) -> TuranCheck:
    """Exact ``P(U_hat @ V >= 0)`` for ``V ~ dist`` and ``U_hat`` an iid optimal action.

    The bound is ``strength / eta``: ``0.5`` for the general inequality and
    ``1.0`` for the identical-sets case.
    """
    _require_positive_optimum(inst)
    p = _as_dist(inst, dist)
    if eta is None:
        eta = fragility_dimension(inst).size
    prob = float(p @ nonnegative_pairs(inst) @ p)
    bound = strength / eta
    return TuranCheck(prob, bound, prob >= bound - 1e-12)


def turan_adversarial_search(inst: Instance, iterations: int = 10_000, seed=0, clique_limit: int = 100_000):
    """Search for the distribution minimizing ``P(U_hat @ V >= 0)``.

    Candidates are uniform distributions on every maximal clique of the
    fragility graph, Dirichlet draws, and the Dirichlet draws after repeatedly
    moving the mass of a non-adjacent pair onto the endpoint with more
    neighbour mass, which never lowers the edge mass and ends on a clique.
    Returns ``(worst_prob, worst_dist)``.
    """
    _require_positive_optimum(inst)
    n = inst.n_params
    S = nonnegative_pairs(inst)
    g = build_fragility_graph(inst)
    rng = np.random.default_rng(seed)

    cands = []
    for clique in maximal_cliques(g, clique_limit):
        p = np.zeros(n)
        p[list(clique)] = 1.0 / len(clique)
        cands.append(p)
    if iterations > 0:
        alpha = rng.choice([0.2, 0.5, 1.0, 3.0], size=iterations)[:, None]
        draws = rng.gamma(alpha, size=(iterations, n))
        draws /= draws.sum(axis=1, keepdims=True)
        cands.extend(draws)
        n_moved = min(iterations, 500)
        cands.extend(_move_mass_to_clique(q, g.adjacency) for q in draws[:n_moved])
    P = np.array(cands)
    probs = np.einsum("ri,ij,rj->r", P, S, P)
    k = int(np.argmin(probs))
    return float(probs[k]), P[k]


def _move_mass_to_clique(p, adj):
    p = p.copy()
    while True:
        support = np.flatnonzero(p > 0)
        sub = adj[np.ix_(support, support)] | np.eye(len(support), dtype=bool)
        missing = np.argwhere(~sub)
        if missing.size == 0:
            return p
        a, b = support[missing[0]]
        if adj[a] @ p >= adj[b] @ p:
            p[a] += p[b]
            p[b] = 0.0
        else:
            p[b] += p[a]
            p[a] = 0.0


def corollary_restriction_check(inst: Instance, dist, subset, eta: int | None = None) -> TuranCheck:
    """The Turan bound restricted to the event ``{U_hat in f*(S), V in S}``.

    ``prob`` is ``E[1(U_hat @ V >= 0) 1(U_hat in f*(S)) 1(V in S)]`` and
    ``bound`` is ``P(U_hat in f*(S), V in S) / (2 eta)``.
    """
    _require_positive_optimum(inst)
    p = _as_dist(inst, dist)
    if eta is None:
        eta = fragility_dimension(inst).size
    mask = np.zeros(inst.n_params)
    mask[list(subset)] = 1.0
    q = p * mask
    prob = float(q @ nonnegative_pairs(inst) @ q)
    bound = float(q.sum() ** 2 / (2 * eta))
    return TuranCheck(prob, bound, prob >= bound - 1e-12)
