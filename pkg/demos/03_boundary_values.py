"""
Closed values at the end points
===============================

On the two-term slice the expansion coefficients are ratios of Pochhammer
symbols, so the values at z = 0 and z = 1 reduce to generalized
hypergeometric sums at unit argument.  This demo computes them and checks
u(0) against a brute-force sum of the coefficients.
"""

import numpy as np

from heunhyp import (a_orbit, ascending_boundary_values, descending_boundary_values,
                     make_params, two_term_coefficients)

p = make_params(0.5, 0.475, 0.5, 1.5, 1.2, 1.0)
bv = ascending_boundary_values(p)
print(f"u(0) = {bv.u_at_0:.14f}")
print(f"u'(0) = {bv.du_at_0:.14f}")
print(f"u(1) = {bv.u_at_1:.14f}")

# %%
# Every basis function equals 1 at z = 0, so u(0) is the plain coefficient
# sum.  The tail decays like 1/k**2 (k counts even terms), so fit the partial
# sums in 1/K and read off the intercept.
c = two_term_coefficients(p, 1 << 17).coefficients[::2]
Ks = 2 ** np.arange(12, 18)
partial = np.array([np.sum(c[:K]) for K in Ks])
fit = np.polyfit(1.0 / Ks, partial, 2)
print(f"extrapolated coefficient sum = {fit[-1]:.14f}")

# %%
for name in ("gamma", "alpha", "beta"):
    d = descending_boundary_values(p, name)
    u1 = "n/a" if d.u_at_1 is None else f"{d.u_at_1:.12f}"
    print(f"descending ({name}): u(0) = {d.u_at_0:.12f}  u(1) = {u1}")

# %%
# The two-term condition asks for a = 1/2; the permutations of the singular
# points map it to a = -1 and a = 2, so those are the three reachable values.
print("orbit of 2:", a_orbit(2.0))
