"""Logistic link and the curvature constants that drive the small-slope analysis.

Run: python demos/02_link_constants.py
"""

import numpy as np

from fragile_bandits import gamma_constants, phi, phi_derivative, phi_derivative_bounds

beta, lam = 5.0, 0.5
z = np.linspace(-1, 1, 5)
print("phi(5, z) at z =", z)
print(" ", phi(beta, z))
print("phi'(5, z):", phi_derivative(beta, z))
print("derivative bounds on [-1, 1]:", phi_derivative_bounds(beta))

print("\n beta   lambda   z*        chi       xi        0.1*lambda")
for beta in (2.0, 5.0, 10.0):
    for lam in (0.1, 0.5, 1.0):
        c = gamma_constants(beta, lam)
        print(f"{beta:5.1f}  {lam:6.2f}  {c.z_star:8.5f}  {c.chi:8.5f}  {c.xi:8.5f}  {0.1 * lam:8.5f}")

# Large slopes with small margins break the ordering chi > xi > 0.1 lambda.
c = gamma_constants(50.0, 0.1)
print(f"\nbeta=50, lambda=0.1: chi={c.chi:.4g}, xi={c.xi:.4g}, 0.1*lambda={0.01:.4g}")
