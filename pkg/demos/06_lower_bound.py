"""Instances where no policy learns quickly: regret grows like t/4 early on.

Run: python demos/06_lower_bound.py
"""

from fragile_bandits import TargetUnreached, gen_hard_instance, no_sublinear_verify

try:
    gen_hard_instance(0.5, 5, 20, seed=0)
except TargetUnreached as err:
    print(f"d=5: the packing stops at {len(err.vectors)} of 20 vectors, so no hard instance")

inst = gen_hard_instance(0.5, 10, 20, seed=0)
cal = inst.meta["calibration"]
print(f"d=10, N=20: beta={inst.beta:.1f}, lambda={cal['lambda']:.3f}, max cross log-odds={cal['max_cross']:.3g}")

rows = no_sublinear_verify(inst, ["thompson", "greedy_map", "uniform_random"], t_max=9, runs=2000)
print("\npolicy            t  regret   floor t/4")
for r in rows:
    if r["t"] in (1, 5, 9):
        print(f"{r['policy']:15s} {r['t']:3d}  {r['mean_regret']:6.3f}   {r['floor']:6.3f}  {'ok' if r['holds'] else 'VIOLATED'}")
