"""Command-line entry point: ``fragile-bandits <command> ...``.

Exit codes: 0 success, 1 a checked assertion failed (or a generator gave
up), 2 usage or I/O error.  Every output embeds the resolved config, and
``--from-config FILE`` re-runs a command from the config stored in FILE.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import io
from .bounds import general_info_bound, lipschitz_info_bound, info_ratio_regret_bound, beta_free_regret_bound, margin_regret_bound
from .checks import SUITES, hard_premises, run_suites
from .engine import POLICIES, regret_summary, simulate
from .errors import FragileBanditsError
from .fragility import build_fragility_graph, fragility_dimension
from .generators import (
    gen_cone_iota0,
    gen_exponential_family,
    gen_hard_instance,
    gen_nonmonotone_pair,
    gen_sphere_matched,
)
from .geometry import delta_of, lambda_of, validate_instance
from .link import gamma_constants

FAMILIES = ("sphere", "cone_iota0", "exp_family", "hard", "nonmonotone_pair")
# keys that never change results and are left out of embedded configs
_VOLATILE = {"out", "threads", "svg", "func"}


class UsageError(Exception):
    pass


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in _VOLATILE}


def _out(args) -> Path:
    p = Path(args.out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _say(msg):
    print(msg, file=sys.stderr)


def _float_list(text):
    """``"2,5,10"`` or ``"0.05:1.0:0.05"`` (inclusive range)."""
    text = text.strip()
    if not text:
        return []
    if ":" in text:
        lo, hi, step = (float(x) for x in text.split(":"))
        n = int(np.floor((hi - lo) / step + 1e-9)) + 1
        return [round(lo + k * step, 12) for k in range(n)]
    return [float(x) for x in text.split(",")]


def _load(path):
    try:
        inst = io.load_instance(path)
    except (OSError, ValueError, KeyError) as e:
        raise UsageError(f"cannot read instance {path}: {e}") from e
    problems = validate_instance(inst)
    if problems:
        raise FragileBanditsError("invalid instance: " + "; ".join(f"{v.kind}: {v.detail}" for v in problems))
    return inst


# --- gen ---------------------------------------------------------------------


def cmd_gen(args) -> int:
    fam = args.family
    if fam == "sphere":
        insts = {"instance": gen_sphere_matched(args.d, args.n, args.seed, args.beta)}
    elif fam == "cone_iota0":
        insts = {"instance": gen_cone_iota0(args.n, args.h, args.gamma_factor, args.beta)}
    elif fam == "exp_family":
        insts = {"instance": gen_exponential_family(args.d, args.iota, args.seed, args.n, args.max_attempts, args.beta)}
    elif fam == "hard":
        inst = gen_hard_instance(args.lam, args.d, args.n, args.seed, args.iota, args.max_attempts)
        problems = hard_premises(inst)
        if problems:
            raise FragileBanditsError("calibrated instance fails its premises: " + "; ".join(problems))
        insts = {"instance": inst}
    else:
        easy, hard = gen_nonmonotone_pair(args.n, args.h, args.gamma_factor, args.beta)
        insts = {"easy": easy, "hard": hard}
    out = _out(args)
    cfg = _config(args)
    for name, inst in insts.items():
        stem = args.name if len(insts) == 1 else f"{args.name}_{name}"
        inst = inst.with_beta(inst.beta, cli_config=cfg)
        path = io.save_instance(inst, out / f"{stem}.json")
        print(path)
    return 0


# --- simulate ----------------------------------------------------------------


def _bound_columns(inst, T):
    """Per-t bound values; ``None`` where a bound does not apply to the instance."""
    d = inst.d
    ts = np.arange(1, T + 1)
    matched = inst.n_actions == inst.n_params and np.array_equal(inst.actions, inst.parameters)
    beta_free = np.array([beta_free_regret_bound(d, t) for t in ts]) if matched else None
    lam = lambda_of(inst)
    eta = fragility_dimension(inst).size
    margin = info_ratio = None
    if lam > 0:
        lam1 = min(lam, 1.0)
        margin = np.array([margin_regret_bound(d, t, lam1, eta) for t in ts])
        delta = delta_of(inst)
        if delta > 0:
            gbar = general_info_bound(lam1, eta, d)
            info_ratio = np.array([info_ratio_regret_bound(d, t, gbar, inst.beta, delta) for t in ts])
    return {"beta_free": beta_free, "margin": margin, "info_ratio": info_ratio}, {"lambda": lam, "eta": eta, "matched": matched}


def _svg_curve(path, mean, stderr, bounds, title):
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        _say("matplotlib is not installed; skipping SVG")
        return None
    t = np.arange(1, len(mean) + 1)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(t, mean, label="mean cumulative regret")
    ax.fill_between(t, mean - 2 * stderr, mean + 2 * stderr, alpha=0.3)
    for name, b in bounds.items():
        if b is not None:
            ax.plot(t, b, "--", label=name)
    ax.set_xlabel("t")
    ax.set_yscale("log")
    ax.set_title(title)
    ax.legend()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def cmd_simulate(args) -> int:
    inst = _load(args.instance)
    cfg = {**_config(args), "instance_sha256": io.file_digest(args.instance)}
    res = simulate(inst, args.policy, args.horizon, args.runs, args.seed, args.info_every, args.threads)
    out = _out(args)
    cum = res.cum_regret
    rows = (
        (int(res.run_ids[r]), t + 1, int(res.actions[r, t]), int(res.rewards[r, t]),
         res.inst_regret[r, t], cum[r, t])
        for r in range(res.runs) for t in range(res.horizon)
    )
    io.write_csv(out / "trajectory.csv", ["run_id", "t", "action", "reward", "inst_regret", "cum_regret"], rows, cfg)

    mean, se = regret_summary(res)
    bounds, facts = _bound_columns(inst, args.horizon)
    names = [k for k, v in bounds.items() if v is not None]
    io.write_csv(
        out / "regret.csv",
        ["t", "mean_cum_regret", "stderr", *names],
        ([t + 1, mean[t], se[t], *(bounds[k][t] for k in names)] for t in range(args.horizon)),
        cfg,
    )
    holds = {k: bool(np.all(mean <= bounds[k])) for k in names}
    summary = {
        "config": cfg,
        "final_mean_cum_regret": float(mean[-1]),
        "final_stderr": float(se[-1]),
        "final_bounds": {k: float(bounds[k][-1]) for k in names},
        "bounds_hold_every_t": holds,
        "violations": {k: int(np.sum(mean > bounds[k])) for k in names},
        "realized_minus_pseudo_final": float(res.realized_regret.sum(axis=1).mean() - mean[-1]),
        **facts,
    }
    if args.info_every:
        summary["info_ratio"] = _info_rows(inst, res, facts["eta"], out, cfg)
    io.write_json(out / "summary.json", summary)
    if args.svg:
        _svg_curve(out / "regret.svg", mean, se, {k: bounds[k] for k in names}, f"{args.policy}, {args.runs} runs")
    return 0


def _info_rows(inst, res, eta, out, cfg):
    lam = lambda_of(inst)
    general = general_info_bound(min(lam, 1.0), eta, inst.d) if lam > 0 else float("inf")
    small = lipschitz_info_bound(inst.d, inst.beta)
    g = res.info["gamma_t"]
    rows = (
        (int(res.run_ids[r]), int(t), res.info["numerator"][r, s], res.info["mutual_info"][r, s],
         g[r, s], general, small)
        for r in range(res.runs) for s, t in enumerate(res.info_t)
    )
    io.write_csv(out / "info_ratio.csv",
                 ["run_id", "t", "numerator", "mutual_info", "gamma_t", "bound_general", "bound_small_beta"], rows, cfg)
    return {
        "max_gamma_t": float(g.max()) if g.size else 0.0,
        "bound_general": general,
        "bound_small_beta": small,
        "violations_general": int(np.sum(g > general + 1e-8)),
        "violations_small_beta": int(np.sum(g > small + 1e-8)),
        "degenerate": int(np.sum(res.info["degenerate"])),
    }


def cmd_info_ratio(args) -> int:
    inst = _load(args.instance)
    cfg = {**_config(args), "instance_sha256": io.file_digest(args.instance)}
    res = simulate(inst, args.policy, args.horizon, args.runs, args.seed, args.every, args.threads)
    eta = fragility_dimension(inst).size
    summary = _info_rows(inst, res, eta, _out(args), cfg)
    io.write_json(_out(args) / "info_ratio_summary.json", {"config": cfg, "eta": eta, **summary})
    bad = summary["violations_general"] + summary["violations_small_beta"]
    return 1 if bad else 0


# --- fragility, constants, bounds --------------------------------------------


def cmd_fragility(args) -> int:
    inst = _load(args.instance)
    res = fragility_dimension(inst, cap=args.cap)
    g = build_fragility_graph(inst)
    report = {
        "config": {**_config(args), "instance_sha256": io.file_digest(args.instance)},
        "eta": res.size,
        "witness": list(res.witness),
        "exact": res.exact,
        "graph_edges": [list(e) for e in g.edges],
        "notes": list(res.notes),
    }
    ok = True
    if args.expect is not None:
        report["expected"] = args.expect
        ok = res.size == args.expect
    report["holds"] = ok
    io.write_json(_out(args) / "fragility.json", report)
    print(io.dumps({k: report[k] for k in ("eta", "exact", "holds")}), end="")
    return 0 if ok else 1


def cmd_constants(args) -> int:
    betas, lams = _float_list(args.betas), _float_list(args.lambdas)
    rows, ordered = [], []
    for b in betas:
        for lam in lams:
            c = gamma_constants(b, lam)
            rows.append((b, lam, c.z_star, c.w_mid, c.chi, c.xi, 0.1 * lam))
            ordered.append(c.chi > c.xi > 0.1 * lam)
    cfg = _config(args)
    out = _out(args)
    header = ["beta", "lambda", "z_star", "w_mid", "chi", "xi", "point_one_lambda"]
    if args.format == "json":
        io.write_json(out / "constants.json", {"config": cfg, "rows": [dict(zip(header, r)) for r in rows]})
    else:
        io.write_csv(out / "constants.csv", header, rows, cfg)
    failing = [(r[0], r[1]) for r, ok in zip(rows, ordered) if not ok]
    if failing:
        _say(f"ordering chi > xi > 0.1 lambda fails at (beta, lambda) = {failing}")
    if args.svg and rows:
        _svg_constants(out / "constants.svg", rows)
    return 0


def _svg_constants(path, rows):
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        _say("matplotlib is not installed; skipping SVG")
        return
    arr = np.array(rows)
    fig, ax = plt.subplots(figsize=(6, 4))
    for b in np.unique(arr[:, 0]):
        sel = arr[arr[:, 0] == b]
        ax.plot(sel[:, 1], sel[:, 4], label=f"chi, beta={b:g}")
        ax.plot(sel[:, 1], sel[:, 5], "--", label=f"xi, beta={b:g}")
    ax.plot(arr[:, 1], arr[:, 6], ":", color="k", label="0.1 lambda")
    ax.set_xlabel("lambda")
    ax.legend(fontsize="small")
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def cmd_bounds(args) -> int:
    d, T = args.d, args.horizon
    ts = [t for t in (1, 10, 100, 1000, 10_000, 100_000) if t < T] + [T]
    rows = []
    for t in ts:
        row = {"t": t, "beta_free": beta_free_regret_bound(d, t)}
        if args.lam is not None and args.eta is not None:
            row["margin"] = margin_regret_bound(d, t, args.lam, args.eta)
            if args.beta is not None and args.delta is not None:
                gbar = args.gamma_bar or general_info_bound(args.lam, args.eta, d)
                row["info_ratio"] = info_ratio_regret_bound(d, t, gbar, args.beta, args.delta)
        rows.append(row)
    extra = {}
    if args.lam is not None and args.eta is not None:
        extra["info_bound_general"] = general_info_bound(args.lam, args.eta, d)
    if args.beta is not None:
        extra["info_bound_small_beta"] = lipschitz_info_bound(d, args.beta)
    cfg = _config(args)
    out = _out(args)
    if args.format == "json":
        io.write_json(out / "bounds.json", {"config": cfg, "rows": rows, **extra})
    else:
        header = list(rows[-1])
        io.write_csv(out / "bounds.csv", header, ([r.get(k, "") for k in header] for r in rows), cfg)
    print(io.dumps({"rows": rows, **extra}), end="")
    return 0


# --- check -------------------------------------------------------------------


def cmd_check(args) -> int:
    names = tuple(s.strip() for s in args.suite.split(",") if s.strip())
    overrides = {}
    if args.cases is not None:
        overrides["cases"] = args.cases
    if args.runs is not None:
        overrides["runs"] = args.runs
    if args.attempts is not None:
        overrides["attempts"] = args.attempts
    out = _out(args)
    try:
        reports = run_suites(names, args.seed, out, **overrides)
    except KeyError as e:
        raise UsageError(str(e)) from e
    payload = {"config": _config(args), "reports": [r.to_dict() for r in reports]}
    io.write_json(out / "check_report.json", payload)
    for r in reports:
        status = "PASS" if r.failures == 0 else "FAIL"
        print(f"{status} {r.suite}: {r.cases} cases, {r.failures} failures")
    return 0 if all(r.failures == 0 for r in reports) else 1


# --- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--threads", type=int, default=None, help="worker threads (env FRAGILE_BANDITS_THREADS)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    p = argparse.ArgumentParser(
        prog="fragile-bandits",
        description=__doc__.splitlines()[0],
        epilog="fragile-bandits --from-config OUTPUT [--out DIR] [--threads N] re-runs a stored config",
    )
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="generate an instance file")
    g.add_argument("family", choices=FAMILIES)
    g.add_argument("--d", type=int, default=3)
    g.add_argument("--n", type=int, default=16)
    g.add_argument("--beta", type=float, default=1.0)
    g.add_argument("--h", type=float, default=0.6)
    g.add_argument("--gamma-factor", type=float, default=None)
    g.add_argument("--iota", type=float, default=None)
    g.add_argument("--lambda", dest="lam", type=float, default=0.5)
    g.add_argument("--max-attempts", type=int, default=200_000)
    g.add_argument("--name", default="instance")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("simulate", parents=[common], help="Monte-Carlo regret of a policy")
    s.add_argument("instance")
    s.add_argument("--policy", choices=POLICIES, default="thompson")
    s.add_argument("--horizon", "-T", type=int, default=1000)
    s.add_argument("--runs", type=int, default=100)
    s.add_argument("--info-every", type=int, default=0)
    s.add_argument("--svg", action="store_true")
    s.set_defaults(func=cmd_simulate)

    r = sub.add_parser("info-ratio", parents=[common], help="exact information ratios along trajectories")
    r.add_argument("instance")
    r.add_argument("--policy", choices=POLICIES, default="thompson")
    r.add_argument("--horizon", "-T", type=int, default=200)
    r.add_argument("--runs", type=int, default=20)
    r.add_argument("--every", type=int, default=10)
    r.set_defaults(func=cmd_info_ratio)

    f = sub.add_parser("fragility", parents=[common], help="fragility dimension of an instance")
    f.add_argument("instance")
    f.add_argument("--cap", type=int, default=64)
    f.add_argument("--expect", type=int, default=None, help="exit 1 unless eta equals this")
    f.set_defaults(func=cmd_fragility)

    c = sub.add_parser("constants", parents=[common], help="tabulate z*, w, chi, xi over a grid")
    c.add_argument("--betas", default="2")
    c.add_argument("--lambdas", default="0.05:1.0:0.05")
    c.add_argument("--svg", action="store_true")
    c.set_defaults(func=cmd_constants)

    b = sub.add_parser("bounds", parents=[common], help="evaluate the regret and information-ratio bounds")
    b.add_argument("--d", type=int, required=True)
    b.add_argument("--horizon", "-T", type=int, required=True)
    b.add_argument("--lambda", dest="lam", type=float, default=None)
    b.add_argument("--eta", type=int, default=None)
    b.add_argument("--beta", type=float, default=None)
    b.add_argument("--delta", type=float, default=None)
    b.add_argument("--gamma-bar", type=float, default=None)
    b.set_defaults(func=cmd_bounds)

    k = sub.add_parser("check", parents=[common], help="run the randomized verification suites")
    k.add_argument("--suite", default="lemmas", help=f"comma list of {sorted(SUITES)} or 'all'")
    k.add_argument("--cases", type=int, default=None)
    k.add_argument("--runs", type=int, default=None)
    k.add_argument("--attempts", type=int, default=None, help="restarts per size in the capacity search")
    k.set_defaults(func=cmd_check)
    return p


def _rerun_parser():
    p = argparse.ArgumentParser(prog="fragile-bandits --from-config")
    p.add_argument("--from-config", required=True, metavar="FILE")
    p.add_argument("--out", default=".")
    p.add_argument("--threads", type=int, default=None)
    return p


def _args_from_config(parser, rerun):
    """Namespace for the command stored in ``rerun.from_config``."""
    try:
        cfg = io.embedded_config(rerun.from_config)
    except (OSError, ValueError) as e:
        raise UsageError(f"cannot read config from {rerun.from_config}: {e}") from e
    command = cfg.get("command")
    if command is None:
        raise UsageError(f"{rerun.from_config} has no command in its config")
    stub = {"gen": [cfg.get("family", "")], "bounds": ["--d", "1", "-T", "1"]}
    stub = stub.get(command, [cfg["instance"]] if "instance" in cfg else [])
    args = parser.parse_args([command, *stub])
    for k, v in cfg.items():
        if k != "instance_sha256":
            setattr(args, k, v)
    if "instance_sha256" in cfg and io.file_digest(args.instance) != cfg["instance_sha256"]:
        raise UsageError(f"{args.instance} changed since the stored run")
    args.out, args.threads = rerun.out, rerun.threads
    return args


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    rerun = any(a == "--from-config" or a.startswith("--from-config=") for a in argv)
    try:
        args = (_rerun_parser() if rerun else parser).parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        if rerun:
            args = _args_from_config(parser, args)
        if getattr(args, "iota", 0) is None and args.command == "gen" and args.family == "exp_family":
            raise UsageError("exp_family needs --iota")
        return args.func(args)
    except UsageError as e:
        _say(f"error: {e}")
        return 2
    except OSError as e:
        _say(f"error: {e}")
        return 2
    except FragileBanditsError as e:
        _say(f"error: {type(e).__name__}: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
