# The Fermat-Torricelli point of four vertices.
#
# A triple n maps to four points q = A n, one per sign pattern. Their
# Fermat-Torricelli point (geometric median) decides joint measurability and
# the lower bound, so it is computed with a certificate.

import numpy as np

from jmtriple import fermat_torricelli, quad_from_triple
from jmtriple.fermat import stationarity_residual

q = quad_from_triple(np.eye(3))
print("vertices of the Pauli quad:\n", q)
ft = fermat_torricelli(q)
print("point:", ft.point, "total distance:", ft.total_distance, "= 4 sqrt 3 =", 4 * np.sqrt(3))
print("residual:", ft.residual_norm)

# When one point sits inside the triangle of the other three the median is
# that vertex; the certificate is then |sum of unit vectors| <= 1.
pts = np.array([[1, 0, 0], [-0.5, 0.9, 0], [-0.5, -0.9, 0], [0.05, 0.02, 0]])
ft = fermat_torricelli(pts)
print("vertex solution:", ft.at_vertex, "unit-vector sum norm:", ft.residual_norm)

# Away from vertices the gradient of the total distance vanishes there.
rng = np.random.default_rng(0)
pts = rng.normal(size=(4, 3))
ft = fermat_torricelli(pts)
print("random set: iterations", ft.iterations, "stationarity", stationarity_residual(pts, ft.point))
