# Worst-case error of approximating one measurement triple by another.
#
# An unbiased qubit measurement is a Bloch vector m with |m| <= 1. Replacing
# m by n shifts the outcome statistics of a state r by 2|r.(m - n)|. Summing
# over three measurements and maximizing over states gives the worst-case
# error, which has a closed form: 2 * max over sign patterns of |sum s_i d_i|.

import numpy as np

from jmtriple import stat_distance_sq, total_worst_case
from jmtriple.oracle import sphere_grid_max

# The three Pauli measurements and their uniformly shrunk versions.
m = np.eye(3)
n = m / np.sqrt(3)

value, state = total_worst_case(m, n)
print("worst-case error:", value)
print("attained at state:", state)
print("check at that state:", sum(stat_distance_sq(state, m[i], n[i]) for i in range(3)))

# A brute-force sweep over a latitude-longitude grid approaches the closed
# form from below, since every grid point is a pure state.
for res in (20, 100, 400):
    print(f"grid {res:4d}:", sphere_grid_max(m, n, res))
