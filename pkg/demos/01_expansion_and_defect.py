"""
Summing a Heun solution as a series of Gauss functions
======================================================

We take the two-term parameter set (a = 1/2) used throughout the tests,
build the ascending expansion sum_n a_n 2F1(alpha, beta; gamma + eps + n; z),
and compare it with the local power series of the Heun solution at z = 0.

The comparison does not come out equal, and the reason is worth seeing.
"""

import numpy as np

from heunhyp import (build_expansion, eval_local, expansion_defect, frobenius_series,
                     make_params, sum_expansion)
from heunhyp.verify import solution_combination

# make_params(a, q, alpha, beta, gamma, epsilon); delta follows from the
# Fuchsian relation and is never passed in
p = make_params(0.5, 0.475, 0.5, 1.5, 1.2, 1.0)
print("parameters:", p)

e = build_expansion(p, "ascending", z=0.3)
print("first coefficients:", np.round(e.coefficients[:7], 8))
print("odd coefficients vanish:", not np.any(e.coefficients[1::2]))

# %%
# The coefficients fall off like 1/n**2, so partial sums approach the limit
# like 1/n.  sum_expansion extrapolates over doubling truncation points.
for z in (0.0, 0.1, 0.3):
    s = sum_expansion(p, e, z)
    print(f"S({z}) = {s.value:.15f}  est. error {s.abs_error_estimate:.1e}  "
          f"terms {s.terms_used}")

# %%
# Normalize to 1 at the origin and compare with the Frobenius series.
local = frobenius_series(p)
s0 = sum_expansion(p, e, 0.0).value
for z in (0.1, 0.3):
    ratio = sum_expansion(p, e, z).value / s0
    print(f"z={z}: expansion/S(0) = {ratio:.12f}   Frobenius = "
          f"{eval_local(local, z).value:.12f}")

# %%
# They disagree.  Multiplying the Heun operator by z (z-1) (z-a) and applying
# it to the summed series leaves a constant K instead of zero: the truncation
# boundary term tends to a nonzero limit because a_n ~ 1/n**2.
K = expansion_defect(p, e)
print(f"defect K = {K.value:.12f} (est. error {K.abs_error_estimate:.1e})")

# %%
# Two expansions with defects K1, K2 combine into an honest solution,
# K2 S1 - K1 S2.  At a = 1/2 the ascending and descending families both
# converge near the origin.
for z in (0.05, 0.1, 0.2):
    w = solution_combination(p, z, ("ascending", "descending:gamma"))
    print(f"z={z}: combination = {w:.12f}   Frobenius = "
          f"{eval_local(local, z).value:.12f}")
