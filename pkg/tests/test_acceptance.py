"""Exit criteria for the package, one test per criterion.

Each test records a PASS/FAIL line that is printed in the terminal summary.
"""

import itertools
import math
import time

import numpy as np
import pytest

from fragile_bandits import (
    TargetUnreached,
    fragility_dimension,
    gamma_constants,
    gen_cone_iota0,
    gen_exponential_family,
    gen_hard_instance,
    gen_nonmonotone_pair,
    gen_sphere_matched,
    io,
    lipschitz_info_bound,
    no_sublinear_verify,
    simplex_vertices,
    simulate,
    beta_free_regret_bound,
)
from fragile_bandits.bounds import general_info_bound
from fragile_bandits.checks import (
    hard_premises,
    run_capacity_suite,
    run_gbb_suite,
    run_marginals_suite,
    run_info_primitive_suite,
    run_turan_suite,
)
from fragile_bandits.cli import main as cli

pytestmark = pytest.mark.acceptance

SPHERE_GRID = list(itertools.product((2, 3, 5), (8, 16, 32), (1.0, 5.0, 20.0)))
T, RUNS, EVERY = 2000, 200, 10


@pytest.fixture(scope="module")
def sphere_runs():
    """Thompson sampling on every matched-sphere configuration, with information ratios."""
    start = time.perf_counter()
    out = {}
    for k, (d, N, beta) in enumerate(SPHERE_GRID):
        inst = gen_sphere_matched(d, N, seed=100 + k, beta=beta)
        res = simulate(inst, "thompson", T, RUNS, base_seed=k, info_ratio_every=EVERY)
        out[(d, N, beta)] = (inst, res)
    return out, time.perf_counter() - start


def test_c1_regret_below_beta_free_bound(sphere_runs, acceptance):
    runs, elapsed = sphere_runs
    t = np.arange(1, T + 1)
    violations, worst = 0, 0.0
    for (d, N, beta), (inst, res) in runs.items():
        mean = res.cum_regret.mean(axis=0)
        bound = np.array([beta_free_regret_bound(d, s) for s in t])
        violations += int(np.sum(mean > bound))
        worst = max(worst, float((mean / bound).max()))
    large_beta_ok = all(
        np.all(res.cum_regret.mean(axis=0) <= np.array([beta_free_regret_bound(d, s) for s in t]))
        for (d, N, beta), (_, res) in runs.items() if beta >= 5
    )
    ok = violations == 0 and large_beta_ok and elapsed < 300
    acceptance("1 regret <= 40d sqrt(T log(...))", ok,
               f"{len(runs)} configs, {violations} violations, max mean/bound {worst:.3g}, {elapsed:.0f}s")
    assert violations == 0 and large_beta_ok
    assert elapsed < 300


def test_c2_information_ratio_bounds(sphere_runs, acceptance):
    runs, _ = sphere_runs
    tol = 1e-8
    bad_general = bad_small = degenerate = samples = 0
    small_below_100d = True
    worst = 0.0
    for (d, N, beta), (inst, res) in runs.items():
        g = res.info["gamma_t"]
        eta = fragility_dimension(inst).size
        general = general_info_bound(1.0, eta, d)
        samples += g.size
        degenerate += int(res.info["degenerate"].sum())
        bad_general += int(np.sum(g > general + tol))
        worst = max(worst, float(g.max() / general))
        if beta <= 2:
            small = lipschitz_info_bound(d, beta)
            small_below_100d &= small < 100 * d
            bad_small += int(np.sum(g > small + tol))
    ok = bad_general == 0 and bad_small == 0 and degenerate == 0 and small_below_100d
    acceptance("2 information-ratio bounds", ok,
               f"{samples} snapshots, violations general={bad_general} small-beta={bad_small}, "
               f"degenerate={degenerate}, max Gamma/bound {worst:.3g}")
    assert ok


def test_c3_primitive_inequality(acceptance):
    rep = run_info_primitive_suite(cases=1000, seed=0)
    acceptance("3 Gamma <= num^2 / (2 E Var)", rep.failures == 0, f"{rep.cases} posteriors, {rep.failures} failures")
    assert rep.failures == 0


def test_c4_turan_inequality(acceptance):
    start = time.perf_counter()
    rep = run_turan_suite(cases=10_000, seed=0, adversarial_every=100)
    elapsed = time.perf_counter() - start
    ok = rep.failures == 0 and elapsed < 120
    acceptance("4 Turan-type bound", ok,
               f"{rep.cases} pairs, {rep.failures} failures, min eta*P {rep.details['min_prob_times_eta']:.4g}, {elapsed:.0f}s")
    assert rep.failures == 0
    assert elapsed < 120


def _floor_rows(inst, runs=5000):
    return no_sublinear_verify(inst, ["thompson", "greedy_map", "uniform_random"], 9, runs, seed=0)


def test_c5_linear_regret_floor_d5(acceptance):
    """Hard instance with lambda = 0.5, d = 5, N = 20 (lifted packing construction)."""
    start = time.perf_counter()
    try:
        inst = gen_hard_instance(0.5, 5, 20, seed=0, iota=0.5, max_attempts=1_000_000)
    except TargetUnreached as err:
        got = len(err.vectors)
        msg = (f"cannot build the instance: the lift needs 20 unit vectors in R^4 with pairwise "
               f"inner product < 1/3, the sampler found {got} in 1e6 draws; see the decisions ledger")
        acceptance("5 regret >= t/4 (lambda=0.5, d=5, N=20)", False, msg)
        pytest.fail(msg)
    rows = _floor_rows(inst)
    ok = all(r["holds"] for r in rows) and time.perf_counter() - start < 180
    acceptance("5 regret >= t/4 (lambda=0.5, d=5, N=20)", ok, f"{len(rows)} rows")
    assert ok


def test_c5_linear_regret_floor_feasible_dimension(acceptance):
    """Same check at d = 10, the smallest dimension where the lift reaches N = 20 quickly."""
    start = time.perf_counter()
    inst = gen_hard_instance(0.5, 10, 20, seed=0)
    assert hard_premises(inst) == []
    rows = _floor_rows(inst)
    elapsed = time.perf_counter() - start
    worst = min(r["mean_regret"] - (r["t"] / 4 - 3 * r["stderr"]) for r in rows)
    ok = all(r["holds"] for r in rows) and elapsed < 180
    acceptance("5 regret >= t/4 (lambda=0.5, d=10, N=20, supplementary)", ok,
               f"beta={inst.beta:.4g}, {len(rows)} rows, min margin {worst:.3g}, {elapsed:.1f}s")
    assert ok


def test_c6_fragility_suite(acceptance):
    rng = np.random.default_rng(0)
    over = 0
    for k in range(1000):
        d = int(rng.integers(2, 6))
        N = int(rng.integers(2, 33))
        inst = gen_sphere_matched(d, N, seed=k)
        over += fragility_dimension(inst).size > d + 1
    cone_ok = all(fragility_dimension(gen_cone_iota0(N, 0.6)).size == N for N in range(3, 31))
    exp_ok = all(
        fragility_dimension(gen_exponential_family(d, iota, seed=s, target_count=n)).size == n
        for s, (d, iota, n) in enumerate([(6, 0.3, 20), (10, 0.5, 20), (8, 0.2, 30), (12, 0.6, 16)])
    )
    easy, hard = gen_nonmonotone_pair(12)
    e, h = fragility_dimension(easy).size, fragility_dimension(hard).size
    subset = np.array_equal(easy.actions[: hard.n_actions], hard.actions)
    ok = over == 0 and cone_ok and exp_ok and e <= 4 < h == 12 and subset
    acceptance("6 fragility suite", ok,
               f"sphere excess={over}/1000, cone eta=N {cone_ok}, exp eta=N {exp_ok}, pair {e} <= 4 < {h}")
    assert ok


def test_c7_lemma_oracles(acceptance):
    m = run_marginals_suite(cases=10_000, seed=0)
    g = run_gbb_suite(cases=10_000, seed=0)
    c = run_capacity_suite(range(1, 9), attempts=2000, seed=0)
    simplex_ok = all(
        len(S) == d + 1 and (S @ S.T)[~np.eye(d + 1, dtype=bool)].max() < 0
        for d in range(1, 9) for S in [simplex_vertices(d)]
    )
    ok = m.failures == g.failures == c.failures == 0 and simplex_ok
    acceptance("7 lemma oracles", ok,
               f"marginals {m.cases}/{m.failures}, gbb {g.cases}/{g.failures}, capacity found {c.details['found']}")
    assert ok


def test_c8_constants_ordering(tmp_path, acceptance):
    code = cli(["constants", "--betas", "2,5,10", "--lambdas", "0.05:1.0:0.05", "--out", str(tmp_path)])
    _, header, rows = io.read_csv(tmp_path / "constants.csv")
    bad = [(r[0], r[1]) for r in rows if not float(r[4]) > float(r[5]) > float(r[6])]
    for r in rows:
        c = gamma_constants(float(r[0]), float(r[1]))
        assert math.isclose(c.chi, float(r[4]), rel_tol=0, abs_tol=0)
    ok = code == 0 and len(rows) == 60 and not bad
    acceptance("8 chi > xi > 0.1 lambda", ok, f"{len(rows)} rows, failing {bad}")
    assert ok


def test_c9_reproducibility(tmp_path, acceptance):
    inst_dir = tmp_path / "inst"
    assert cli(["gen", "sphere", "--d", "3", "--n", "16", "--beta", "5", "--seed", "7", "--out", str(inst_dir)]) == 0
    inst = str(inst_dir / "instance.json")
    commands = {
        "simulate": (["simulate", inst, "--horizon", "500", "--runs", "50", "--info-every", "10", "--seed", "3"],
                     ["trajectory.csv", "regret.csv", "info_ratio.csv", "summary.json"], "summary.json"),
        "info-ratio": (["info-ratio", inst, "--horizon", "100", "--runs", "10", "--every", "5"],
                       ["info_ratio.csv", "info_ratio_summary.json"], "info_ratio.csv"),
        "check": (["check", "--suite", "lemmas,info", "--cases", "300", "--attempts", "200", "--seed", "11"],
                  ["check_report.json"], "check_report.json"),
        "constants": (["constants", "--betas", "2,5", "--lambdas", "0.1:1.0:0.1"], ["constants.csv"], "constants.csv"),
        "fragility": (["fragility", inst], ["fragility.json"], "fragility.json"),
    }
    mismatched = []
    for name, (argv, files, carrier) in commands.items():
        a, b = tmp_path / name / "a", tmp_path / name / "b"
        assert cli([*argv, "--out", str(a)]) == 0
        assert cli(["--from-config", str(a / carrier), "--out", str(b), "--threads", "3"]) == 0
        mismatched += [f"{name}/{f}" for f in files if (a / f).read_bytes() != (b / f).read_bytes()]
    acceptance("9 byte-identical reruns", not mismatched, f"{len(commands)} commands, mismatched {mismatched}")
    assert not mismatched
