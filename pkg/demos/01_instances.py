"""Build the instance families and look at their log-odds structure.

Run: python demos/01_instances.py
"""

import numpy as np

from fragile_bandits import (
    gen_cone_iota0,
    gen_exponential_family,
    gen_nonmonotone_pair,
    gen_sphere_matched,
    lambda_of,
)

np.set_printoptions(precision=3, suppress=True)

# Matched sphere: actions and parameters are the same unit vectors, so the
# optimal action for theta_i is x_i and its log-odds is exactly 1.
inst = gen_sphere_matched(d=3, N=6, seed=0, beta=5.0)
print("sphere, d=3, N=6")
print("  optimal map:", inst.optimal_map)
print("  smallest optimal log-odds:", lambda_of(inst))

# Cone: every cross log-odds is negative while the optimal ones are small.
cone = gen_cone_iota0(8, h=0.6)
L = cone.log_odds
off = L[~np.eye(8, dtype=bool)]
print("\ncone, N=8")
print("  optimal log-odds:", np.diag(L)[:3], "...")
print("  largest cross log-odds:", off.max())

# Lifted packing: optimal log-odds equal iota, cross log-odds below zero.
exp = gen_exponential_family(d=6, iota=0.3, seed=1, target_count=20)
L = exp.log_odds
print("\nexponential family, d=6, iota=0.3, N=20")
print("  optimal log-odds range:", np.diag(L).min(), np.diag(L).max())
print("  largest cross log-odds:", L[~np.eye(20, dtype=bool)].max())

# The easy member of the pair contains the hard member's actions plus the
# parameters themselves.
easy, hard = gen_nonmonotone_pair(10)
print("\nnonmonotone pair, N=10")
print("  easy actions:", easy.n_actions, " hard actions:", hard.n_actions)
print("  easy optimal map:", easy.optimal_map)
