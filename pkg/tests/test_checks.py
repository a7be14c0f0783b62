import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fragile_bandits import (
    DiscreteJoint,
    PreconditionFailed,
    bar_gamma,
    gamma_constants,
    gen_hard_instance,
    lemma_gbb_check,
    lemma_marginals_check,
    no_sublinear_verify,
    pairwise_negative_capacity,
    simplex_vertices,
)
from fragile_bandits.checks import hard_premises, run_gbb_suite, run_suites


def test_marginals_point_mass():
    e = np.array([[0.0, 1.0, 0.0]])
    res = lemma_marginals_check(DiscreteJoint(e, e, [1.0]))
    assert res.lhs == pytest.approx(1.0) and res.rhs == pytest.approx(3.0) and res.holds


def test_marginals_independent_joint():
    rng = np.random.default_rng(0)
    U = rng.standard_normal((3, 4)) / 3
    V = rng.standard_normal((2, 4)) / 3
    pu, pv = np.array([0.2, 0.5, 0.3]), np.array([0.6, 0.4])
    u = np.repeat(U, 2, axis=0)
    v = np.tile(V, (3, 1))
    joint = DiscreteJoint(u, v, np.outer(pu, pv).ravel())
    res = lemma_marginals_check(joint)
    G = U @ V.T
    assert res.lhs == pytest.approx((pu @ np.abs(G) @ pv) ** 2)
    assert res.lhs <= pu @ G**2 @ pv <= res.rhs


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 5), st.integers(1, 8))
def test_marginals_random(seed, d, n):
    rng = np.random.default_rng(seed)
    u = rng.standard_normal((n, d))
    u /= np.maximum(1, np.linalg.norm(u, axis=1, keepdims=True))
    v = rng.standard_normal((n, d))
    v /= np.maximum(1, np.linalg.norm(v, axis=1, keepdims=True))
    assert lemma_marginals_check(DiscreteJoint(u, v, rng.dirichlet(np.ones(n)))).holds


def test_joint_validation():
    with pytest.raises(ValueError):
        DiscreteJoint([[2.0, 0.0]], [[1.0, 0.0]], [1.0])
    with pytest.raises(ValueError):
        DiscreteJoint([[1.0, 0.0]], [[1.0, 0.0]], [0.9])
    j = DiscreteJoint.from_atoms([([1.0, 0.0], [0.0, 1.0], 0.5), ([0.0, 1.0], [0.0, 1.0], 0.5)])
    assert j.d == 2


def test_gbb_identity_equality():
    xs = [Fraction(1), Fraction(2), Fraction(5)]
    ps = [Fraction(1, 3)] * 3
    res = lemma_gbb_check(lambda z: z, xs, ps)
    assert res.lhs == res.rhs == 1 and res.holds


def test_gbb_square_exact():
    xs = [Fraction(1), Fraction(2), Fraction(3)]
    ps = [Fraction(1, 3)] * 3
    res = lemma_gbb_check(lambda z: z * z, xs, ps)
    # E[U^2] = 14/3, E[U] = 2, Var[U] = 2/3, Var[U^2] = 98/9 - 196/9 ... computed by hand
    assert res.lhs == Fraction(14, 3) ** 2 / 4
    ex2, ex4 = Fraction(14, 3), Fraction(1 + 16 + 81, 3)
    assert res.rhs == (ex4 - ex2**2) / Fraction(2, 3)
    assert isinstance(res.lhs, Fraction) and res.holds


def test_gbb_rejects_decreasing_ratio():
    with pytest.raises(PreconditionFailed):
        lemma_gbb_check(np.sqrt, [1.0, 4.0], [0.5, 0.5])
    with pytest.raises(PreconditionFailed):
        lemma_gbb_check(lambda z: z + 1, [1.0, 2.0], [0.5, 0.5])


def test_gbb_constant_u_is_vacuous():
    assert lemma_gbb_check(lambda z: z * z, [2.0], [1.0]).holds


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([2.0, 5.0, 10.0]), st.sampled_from([0.1, 0.5, 1.0]))
def test_gbb_on_linearised_gap(seed, beta, lam):
    rng = np.random.default_rng(seed)
    c = gamma_constants(beta, lam)
    n = int(rng.integers(2, 9))
    xs = rng.random(n) * (1 + lam)
    assert lemma_gbb_check(lambda z: float(bar_gamma(beta, lam, z, c)), xs, rng.dirichlet(np.ones(n))).holds


@pytest.mark.parametrize("d", range(1, 9))
def test_simplex(d):
    S = simplex_vertices(d)
    assert S.shape == (d + 1, d)
    G = S @ S.T
    assert np.allclose(np.diag(G), 1)
    assert np.allclose(G[~np.eye(d + 1, dtype=bool)], -1 / d)


def test_capacity_small_dims():
    assert pairwise_negative_capacity(1, 200, 0) == 2
    assert pairwise_negative_capacity(2, 500, 0) == 3


@pytest.mark.parametrize("d", range(1, 9))
def test_capacity_never_exceeds_d_plus_one(d):
    assert pairwise_negative_capacity(d, 300, seed=d) <= d + 1


def test_no_sublinear_rows():
    inst = gen_hard_instance(0.5, 10, 20, seed=0)
    rows = no_sublinear_verify(inst, ["uniform_random"], 3, 400, seed=1)
    assert [r["t"] for r in rows] == [1, 2, 3]
    N = 20
    Phi = inst.mean_reward
    per_step = np.mean([Phi[i, i] - Phi[:, i].mean() for i in range(N)])
    assert per_step > 0.25
    for r in rows:
        assert r["floor"] == r["t"] / 4 and r["holds"]
        assert abs(r["mean_regret"] - per_step * r["t"]) <= 4 * r["stderr"] + 1e-9


def test_no_sublinear_preconditions():
    inst = gen_hard_instance(0.5, 10, 20, seed=0)
    with pytest.raises(PreconditionFailed):
        no_sublinear_verify(inst, ["thompson"], 10, 10)
    weak = inst.with_beta(1.0)
    assert hard_premises(weak)
    with pytest.raises(PreconditionFailed):
        no_sublinear_verify(weak, ["thompson"], 3, 10)


def test_suite_dumps_counterexamples(tmp_path, monkeypatch):
    import fragile_bandits.checks as chk

    real = chk.lemma_gbb_check

    def broken(f, xs, ps, tol=1e-10):
        res = real(f, xs, ps, tol)
        return chk.InequalityCheck(res.lhs, res.rhs, False)

    monkeypatch.setattr(chk, "lemma_gbb_check", broken)
    rep = run_gbb_suite(cases=3, seed=5, out_dir=tmp_path)
    assert rep.failures == 3 and len(rep.artifacts) == 3
    payload = json.loads(open(rep.artifacts[0]).read())
    assert payload["seed"] == 5 and payload["case"] == 0


def test_lemma_suites_green():
    reports = run_suites(["lemmas"], seed=0, cases=300, attempts=200)
    assert all(r.failures == 0 for r in reports)
    with pytest.raises(KeyError):
        run_suites(["nope"])
