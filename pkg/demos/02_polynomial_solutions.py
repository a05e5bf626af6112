"""
Accessory parameters that terminate the series
==============================================

When epsilon = -N (or one of a few related conditions holds) the expansion
can stop after N + 1 terms.  That happens only for N + 1 special values of
q, the roots of a degree N + 1 polynomial built from the recurrence.  A
terminated expansion is a finite sum of Gauss functions and solves the Heun
equation exactly.
"""

import numpy as np

from heunhyp import (build_finite_solution, detect_termination_cases, heun_residual,
                     make_params, q_roots, sum_expansion)

N = 3
p = make_params(2.0, 0.0, 1.1, 0.7, 0.9, -float(N))
cases = detect_termination_cases(p)
print("termination cases:", cases)
case = cases[0]

# %%
roots = q_roots(p, case)
print("polynomial in q (low to high):", np.round(roots.poly, 6))
for q, r in zip(roots.roots, roots.residuals):
    print(f"q = {complex(q):.10f}   |D(q)| = {r:.1e}")

# %%
# Pick each real root in turn, build the finite expansion and check that it
# satisfies the Heun equation using analytic derivatives of the 2F1 basis.
zs = (0.1, 0.25, 0.4)
for i, q in enumerate(roots.roots):
    if abs(complex(q).imag) > 1e-12:
        continue
    sol = build_finite_solution(p, case, i, roots=roots)
    e = sol.expansion
    worst = 0.0
    for z in zs:
        u, u1, u2 = (sum_expansion(sol.params, e, z, deriv=k).value for k in range(3))
        worst = max(worst, abs(heun_residual(sol.params, u, u1, u2, z)))
    print(f"root {i}: terms {e.truncation_index + 1}, worst residual {worst:.1e}")
