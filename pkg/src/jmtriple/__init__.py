"""Joint measurability of qubit measurement triples.

Decides whether three unbiased qubit POVMs can be measured jointly, bounds
the error of any jointly measurable approximation from below, builds the
closed-form optimal approximations where they exist, and checks them against
a numerical optimizer.
"""

from .analytic import (
    ApproximationResult,
    Case,
    CaseClass,
    approximate,
    busch_pair_optimal,
    check_conditions,
    classify,
    degenerate_construction,
    mu_nu_perpendicular,
    optimal_coplanar_convex,
    optimal_perpendicular,
    projective_mu_nu,
    projective_triple,
)
from .bloch import (
    effects,
    make_bloch,
    make_triple,
    pair_worst_case,
    stat_distance_sq,
    total_worst_case,
)
from .compat import (
    BoundReport,
    JmVerdict,
    incompatibility_bound,
    is_jointly_measurable_pair,
    is_jointly_measurable_triple,
)
from .errors import *  # noqa: F401,F403
from .fermat import (
    FtResult,
    fermat_torricelli,
    ft_diagonal_intersection,
    ft_perpendicular_case,
    quad_from_triple,
    triple_from_quad,
)
from .oracle import (
    Certificate,
    OracleConfig,
    OracleResult,
    certify,
    minimize_total_distance,
    sphere_grid_max,
)

__version__ = "0.1.0"
