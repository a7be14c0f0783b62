"""Fragility dimension and the lower bound it gives on optimal-action probabilities.

Run: python demos/03_fragility.py
"""

import numpy as np

from fragile_bandits import (
    build_fragility_graph,
    fragility_dimension,
    gen_cone_iota0,
    gen_sphere_matched,
    turan_lower_bound_check,
)

# Random matched instances never exceed d + 1: pairwise negative inner
# products fit at most d + 1 vectors.
for d in (2, 3, 5):
    sizes = [fragility_dimension(gen_sphere_matched(d, 24, seed=s)).size for s in range(20)]
    print(f"sphere d={d}, N=24: max eta over 20 draws = {max(sizes)} (cap {d + 1})")

cone = gen_cone_iota0(12)
res = fragility_dimension(cone)
g = build_fragility_graph(cone)
print(f"\ncone N=12: eta={res.size}, exact={res.exact}, edges={len(g.edges)}")

# Any distribution over parameters puts at least strength/eta on the event
# that a sampled parameter's optimal action succeeds under another draw.
rng = np.random.default_rng(0)
inst = gen_sphere_matched(3, 16, seed=3)
eta = fragility_dimension(inst).size
worst = min(turan_lower_bound_check(inst, rng.dirichlet(np.full(16, 0.3)), eta).prob for _ in range(500))
print(f"\nsphere d=3, N=16, eta={eta}: smallest probability over 500 priors = {worst:.4f}, bound 0.5/eta = {0.5 / eta:.4f}")
