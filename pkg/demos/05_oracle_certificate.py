# Cross-checking a closed form with the numerical oracle.
#
# The oracle runs seeded Nelder-Mead restarts over all triples, scaling each
# candidate into the jointly measurable set, and keeps the smallest
# worst-case error found. A certificate compares it with the analytic claim.

import numpy as np

from jmtriple import approximate, certify, minimize_total_distance
from jmtriple.oracle import OracleConfig

cfg = OracleConfig(seed=0, restarts=4, max_evals=5000)
m = np.eye(3)
cert = certify(m, approximate(m), cfg)
print("Pauli:", cert.verdict, "claimed", cert.achieved_claimed, "oracle", cert.oracle_value)

# For a generic target there is no closed form; the oracle still gives an
# upper bound that sits above the geometric lower bound.
m = np.array([[1, 0, 0], [0, 1, 0], [0.5, 0.3, 0.6]])
res = minimize_total_distance(m, cfg)
print("generic target: best", res.best_value, "per restart", np.round(res.per_restart_best, 6).tolist())
