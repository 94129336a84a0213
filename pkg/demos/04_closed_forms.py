# Optimal jointly measurable approximations in closed form.
#
# Three geometries have explicit answers: m3 perpendicular to m1 and m2,
# m3 a small combination of m1 and m2, and the degenerate coplanar case where
# only a constructive upper bound is available.

import numpy as np

from jmtriple import approximate, classify
from jmtriple.analytic import projective_mu_nu, projective_triple
from jmtriple.errors import OutOfRange

targets = {
    "perpendicular": projective_triple(0.3, 0.5),
    "coplanar convex": np.array([[1, 0, 0], [0, 1, 0], [0.2, 0.1, 0]]),
    "coplanar degenerate": np.array([[1, 0, 0], [0, 1, 0], [0.7, 0.7, 0]]),
}
for name, m in targets.items():
    res = approximate(m)
    print(f"{name}: case {classify(m).tag.value}, label '{res.label}'")
    print("  n =", np.round(res.n, 6).tolist())
    print(f"  achieved {res.achieved:.9f}  lower bound {res.bound:.9f}  attains {res.attains_bound}")

# For sharp measurements at angles (a, b) the shrink factors have an
# explicit trigonometric form.
print("projective (mu, nu):", projective_mu_nu(0.3, 0.5))

# The perpendicular closed form can leave [0, 1]; the library refuses then
# instead of clamping, because the lower bound is not attained there.
m1 = np.array([-0.41139, -0.24531, -0.70893])
m2 = np.array([0.39126, 0.36070, 0.80346])
axis = np.cross(m1, m2)
m = np.array([m1, m2, 0.9775 * axis / np.linalg.norm(axis)])
try:
    approximate(m)
except OutOfRange as exc:
    print("no closed form:", exc)
