"""Randomized checks of the supporting inequalities, as the check command runs them.

Run: python demos/07_lemma_checks.py
"""

from fractions import Fraction

from fragile_bandits import lemma_gbb_check, pairwise_negative_capacity, simplex_vertices
from fragile_bandits.checks import run_suites

# An exact instance of the weighted correlation inequality.
chk = lemma_gbb_check(lambda x: x * x, [Fraction(1), Fraction(2), Fraction(5)],
                      [Fraction(1, 2), Fraction(1, 3), Fraction(1, 6)])
print(f"f(x)=x^2: lhs={chk.lhs} rhs={chk.rhs} holds={chk.holds}")

for d in (2, 4, 6):
    S = simplex_vertices(d)
    print(f"d={d}: simplex gives {len(S)} vectors, random search finds {pairwise_negative_capacity(d, attempts=500)}")

reports = run_suites(["lemmas", "info", "turan"], seed=0, out_dir="/tmp/fragile_demo",
                     cases=500, attempts=200)
for rep in reports:
    print(f"{rep.suite:15s} cases={rep.cases:5d} failures={rep.failures}")
