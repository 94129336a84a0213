# Joint measurability of three unbiased qubit measurements.
#
# The triple is jointly measurable exactly when the four vertices have total
# distance at most 4 from their Fermat-Torricelli point. Shrinking the Pauli
# triple by lambda crosses that threshold at lambda = 1/sqrt(3).

import numpy as np

from jmtriple import incompatibility_bound, is_jointly_measurable_triple

for lam in (0.5, 0.57, 1 / np.sqrt(3), 0.58, 0.7):
    v = is_jointly_measurable_triple(lam * np.eye(3))
    print(f"lambda {lam:.6f}: jointly measurable {v.jointly_measurable!s:5}  margin {v.margin:+.3e}")

# The same geometry gives a lower bound on the worst-case error of any
# jointly measurable approximation.
report = incompatibility_bound(np.eye(3))
print("lower bound for Pauli:", report.bound, "= 2(sqrt 3 - 1) =", 2 * (np.sqrt(3) - 1))
