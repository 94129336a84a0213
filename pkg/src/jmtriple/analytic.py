"""Closed-form optimal jointly measurable approximations.

Given three target measurements ``m1, m2, m3`` the goal is a jointly
measurable triple ``n1, n2, n3`` minimizing the worst-case total distance
``max_r sum_i 2|r.(m_i - n_i)|``. Closed forms exist when

* ``m3`` is perpendicular to both ``m1`` and ``m2``;
* ``m3 = k1 m1 + k2 m2`` with ``|k1| + |k2| < 1`` (the derived vertices form
  a convex quadrilateral and the problem reduces to the pair ``m1, m2``).

The coplanar formula is only optimal while no vertex is pulled past the
Fermat-Torricelli point; results carry ``attains_bound`` accordingly.

When ``|k1| + |k2| >= 1`` the Fermat-Torricelli point of the target vertices
is itself a vertex, the lower bound cannot be reached, and
:func:`degenerate_construction` gives an explicit jointly measurable triple
whose error is an upper estimate of the optimum.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .bloch import make_bloch, make_triple, total_worst_case
from .compat import (
    JM_TOL,
    BoundReport,
    incompatibility_bound,
    is_jointly_measurable_pair,
    jm_margin,
)
from .errors import (
    Degenerate,
    IllConditioned,
    NoClosedForm,
    NotEnoughIncompatibility,
    OutOfRange,
    PairCompatible,
    PreconditionViolated,
)
from .fermat import (
    ANG_TOL,
    EPS_COINCIDE,
    FT_TOL,
    PLANE_TOL,
    fermat_torricelli,
    ft_perpendicular_case,
    quad_from_triple,
    stationarity_residual,
    triple_from_quad,
)

CASE_TOL = 1e-9
MAX_CONDITION = 1e8
RANGE_SLACK = 1e-9


class Case(str, enum.Enum):
    COMPATIBLE = "Compatible"
    PERPENDICULAR = "PerpendicularM3"
    COPLANAR_CONVEX = "CoplanarConvex"
    COPLANAR_DEGENERATE = "CoplanarDegenerate"
    GENERIC = "Generic"


@dataclass(frozen=True)
class CaseClass:
    tag: Case
    k: tuple[float, float] | None = None
    bound: BoundReport | None = field(default=None, repr=False)


@dataclass(frozen=True)
class ApproximationResult:
    case: Case
    n: np.ndarray
    scalars: dict
    q_vertices: np.ndarray
    p_fermat: np.ndarray
    achieved: float
    bound: float
    optimal_states: tuple
    attains_bound: bool
    condition_residuals: tuple
    jm_margin: float
    label: str = "optimal"


def _unit(v):
    return v / np.linalg.norm(v)


def _dedup(vectors, tol=1e-12):
    out = []
    for v in vectors:
        if not any(np.linalg.norm(v - w) <= tol for w in out):
            out.append(v)
    return tuple(out)


def _result(case, m, n, *, attains, label="optimal", **fields):
    return ApproximationResult(
        case=case,
        n=n,
        achieved=total_worst_case(m, n)[0],
        bound=incompatibility_bound(m).bound,
        attains_bound=attains,
        condition_residuals=check_conditions(m, n),
        jm_margin=jm_margin(n)[0],
        label=label,
        **fields,
    )


def _is_perpendicular(m, ang_tol=ANG_TOL):
    m1, m2, m3 = m
    n3 = np.linalg.norm(m3)
    if n3 <= EPS_COINCIDE:
        return False
    return all(
        abs(np.dot(m3, other)) <= ang_tol * n3 * np.linalg.norm(other) for other in (m1, m2)
    )


def _coplanar_coefficients(m):
    """Least-squares ``(k1, k2)`` with ``m3 ~ k1 m1 + k2 m2`` and the fit residual.

    Raises IllConditioned when ``m1, m2`` are (nearly) parallel and ``m3`` is
    off their common line.
    """
    m1, m2, m3 = m
    a = np.column_stack([m1, m2])
    sv = np.linalg.svd(a, compute_uv=False)
    if sv[1] <= sv[0] / MAX_CONDITION:
        if sv[0] > 0:
            axis = _unit(m1 if np.linalg.norm(m1) >= np.linalg.norm(m2) else m2)
            off_line = np.linalg.norm(m3 - np.dot(m3, axis) * axis)
        else:
            off_line = np.linalg.norm(m3)
        if off_line > PLANE_TOL:
            raise IllConditioned("m1 and m2 are nearly parallel")
        return None, off_line
    k, *_ = np.linalg.lstsq(a, m3, rcond=None)
    return (float(k[0]), float(k[1])), float(np.linalg.norm(a @ k - m3))


def classify(m, *, jm_tol=JM_TOL):
    """Decide which closed form applies to the target triple ``m``.

    Precedence: Compatible, PerpendicularM3, CoplanarConvex or
    CoplanarDegenerate, Generic. A zero ``m3`` counts as coplanar with
    ``k1 = k2 = 0``.
    """
    m = make_triple(m)
    report = incompatibility_bound(m)
    if -2.0 * report.raw_bound >= -jm_tol:
        return CaseClass(Case.COMPATIBLE, bound=report)
    if _is_perpendicular(m):
        return CaseClass(Case.PERPENDICULAR, bound=report)
    k, residual = _coplanar_coefficients(m)
    if k is not None and residual <= PLANE_TOL:
        tag = (
            Case.COPLANAR_CONVEX
            if abs(k[0]) + abs(k[1]) < 1.0 - CASE_TOL
            else Case.COPLANAR_DEGENERATE
        )
        return CaseClass(tag, k=k, bound=report)
    return CaseClass(Case.GENERIC, bound=report)


def _segment_distance(x, a, b):
    ab = b - a
    denom = float(np.dot(ab, ab))
    t = 0.0 if denom == 0.0 else min(1.0, max(0.0, float(np.dot(x - a, ab)) / denom))
    return float(np.linalg.norm(x - (a + t * ab)))


def check_conditions(m, n):
    """Residuals of the four attainment conditions for target ``m`` and triple ``n``.

    1. ``q_k`` lies on the segment ``[p_F, p_k]`` (max distance to it);
    2. all offsets ``|p_k - q_k|`` are equal (max pairwise difference);
    3. ``q_F = p_F`` (distance between the two Fermat-Torricelli points);
    4. ``sum_k |q_k - q_F| = 4`` (absolute deviation).
    """
    p = quad_from_triple(m)
    q = quad_from_triple(n)
    ft_p = fermat_torricelli(p)
    ft_q = fermat_torricelli(q)
    p_f = ft_p.point
    r1 = max(_segment_distance(q[k], p_f, p[k]) for k in range(4))
    offsets = np.linalg.norm(p - q, axis=1)
    r2 = float(offsets.max() - offsets.min())
    r3 = float(np.linalg.norm(ft_q.point - p_f))
    r4 = abs(ft_q.total_distance - 4.0)
    return (r1, r2, r3, r4)


def mu_nu_perpendicular(p_f, quad):
    """Shrink factors ``(mu, nu)`` for the perpendicular case.

    With ``a = |p1 - p_F|`` and ``b = |p2 - p_F|`` the equal-offset and
    boundary conditions ``mu a = nu b`` and ``(1 - mu) a + (1 - nu) b = 2``
    give ``mu = (a + b - 2) / (2a)`` and ``nu = (a + b - 2) / (2b)``.
    """
    p = np.asarray(quad, dtype=float)
    p_f = np.asarray(p_f, dtype=float)
    dist = np.linalg.norm(p - p_f, axis=1)
    a, b = float(dist[0]), float(dist[1])
    if min(a, b) <= EPS_COINCIDE:
        raise Degenerate("a vertex coincides with the Fermat-Torricelli point")
    sym_tol = 10 * FT_TOL * max(1.0, a, b)
    if abs(dist[3] - a) > sym_tol or abs(dist[2] - b) > sym_tol:
        raise PreconditionViolated("vertex distances lack the perpendicular-case symmetry")
    mu = 0.5 * (a + b - 2.0) / a
    nu = 0.5 * (a + b - 2.0) / b
    for name, val in (("mu", mu), ("nu", nu)):
        if not -RANGE_SLACK <= val <= 1.0 + RANGE_SLACK:
            raise OutOfRange(f"{name} = {val!r} outside [0, 1]")
    return min(1.0, max(0.0, mu)), min(1.0, max(0.0, nu))


def projective_mu_nu(alpha, beta):
    """``(mu, nu)`` for sharp measurements parameterized by two angles.

    Here ``m1 = (-sin a, cos a, 0)``, ``m2 = (sin b, cos b, 0)`` and
    ``m3 = (0, 0, 1)``; only ``a + b`` enters.
    """
    theta = alpha + beta
    c = math.cos(theta)
    s = abs(math.sin(theta))
    if 1.0 + c <= EPS_COINCIDE or s <= EPS_COINCIDE:
        raise Degenerate(f"angle sum {theta!r} makes the formulas singular")
    root_mu = math.sqrt(2.0 * (1.0 + s) / ((1.0 + c) * (2.0 + s)))
    root_nu = math.sqrt(2.0 * (1.0 + s) / ((1.0 - c) * (2.0 + s)))
    mu = 0.5 * (1.0 + s / (1.0 + c) - root_mu)
    nu = 0.5 * (1.0 + (1.0 + c) / s - root_nu)
    return mu, nu


def projective_triple(alpha, beta):
    return np.array(
        [
            [-math.sin(alpha), math.cos(alpha), 0.0],
            [math.sin(beta), math.cos(beta), 0.0],
            [0.0, 0.0, 1.0],
        ]
    )


def optimal_perpendicular(m):
    """Optimal approximation when ``m3`` is perpendicular to ``m1`` and ``m2``."""
    m = make_triple(m)
    if not _is_perpendicular(m):
        raise PreconditionViolated("m3 must be nonzero and perpendicular to m1 and m2")
    m1, m2, m3 = m
    p = quad_from_triple(m)
    p_f = ft_perpendicular_case(m)
    if np.linalg.norm(p - p_f, axis=1).min() <= EPS_COINCIDE or (
        stationarity_residual(p, p_f) > 10 * FT_TOL
    ):
        p_f = fermat_torricelli(p).point

    mu, nu = mu_nu_perpendicular(p_f, p)
    n = np.array(
        [
            0.5 * ((2 - mu - nu) * m1 + (nu - mu) * m2 + (nu - mu) * m3 + (mu + nu) * p_f),
            0.5 * ((nu - mu) * m1 + (2 - mu - nu) * m2 + (nu - mu) * m3 + (mu + nu) * p_f),
            (1 - mu) * m3 + mu * p_f,
        ]
    )
    n = make_triple(n)
    shrink = np.array([mu, nu, nu, mu])[:, None]
    q = (1 - shrink) * p + shrink * p_f

    states = _dedup([_unit(p[k] - p_f) for k in range(4)])
    return _result(
        Case.PERPENDICULAR,
        m,
        n,
        attains=True,
        scalars={"mu": mu, "nu": nu},
        q_vertices=q,
        p_fermat=p_f,
        optimal_states=states,
    )


def busch_pair_optimal(m1, m2):
    """Optimal compatible approximation of a pair of unbiased qubit POVMs.

    A term whose direction is undefined (``m1 = -m2`` or ``m1 = m2``) is
    dropped when its coefficient vanishes in the limit; otherwise the pair is
    rejected as degenerate.
    """
    m1, m2 = make_bloch(m1), make_bloch(m2)
    s, d = m1 + m2, m1 - m2
    x, y = float(np.linalg.norm(s)), float(np.linalg.norm(d))
    cs = 1.0 + 0.5 * (x - y)
    cd = 1.0 + 0.5 * (y - x)
    terms = []
    for coeff, vec, norm in ((cs, s, x), (cd, d, y)):
        if norm <= EPS_COINCIDE:
            if abs(coeff) > 1e-9:
                raise Degenerate("m1 +- m2 vanishes with a nonzero coefficient")
            terms.append(np.zeros(3))
        else:
            terms.append(coeff * vec / norm)
    n1 = 0.5 * (terms[0] + terms[1])
    n2 = 0.5 * (terms[0] - terms[1])
    return make_bloch(n1), make_bloch(n2)


def optimal_coplanar_convex(m):
    """Optimal approximation when ``m3 = k1 m1 + k2 m2`` with ``|k1| + |k2| < 1``.

    ``n3 = m3`` and ``n1, n2`` move ``m1, m2`` inward along ``m1 +- m2``. The
    diagonals of the vertex quadrilateral are always ``[p1, p4]`` and
    ``[p2, p3]`` inside this region, whatever the signs of ``k1, k2``.
    """
    m = make_triple(m)
    k, residual = _coplanar_coefficients(m)
    if k is None or residual > PLANE_TOL or abs(k[0]) + abs(k[1]) >= 1.0 - CASE_TOL:
        raise PreconditionViolated("m3 must be a combination k1 m1 + k2 m2 with |k1|+|k2| < 1")
    m1, m2, m3 = m
    compatible, _ = is_jointly_measurable_pair(m1, m2)
    if compatible:
        raise PairCompatible("m1 and m2 are already jointly measurable")
    s, d = m1 + m2, m1 - m2
    x, y = float(np.linalg.norm(s)), float(np.linalg.norm(d))
    if min(x, y) <= EPS_COINCIDE:
        raise Degenerate("m1 + m2 or m1 - m2 vanishes")
    excess = x + y - 2.0
    delta = excess / (4.0 * x)
    sigma = excess / (4.0 * y)
    n = make_triple([m1 - delta * s - sigma * d, m2 - delta * s + sigma * d, m3])

    p = quad_from_triple(m)
    q = np.array(
        [
            p[0] - delta * (p[0] - p[3]),
            p[1] - sigma * (p[1] - p[2]),
            p[2] - sigma * (p[2] - p[1]),
            p[3] - delta * (p[3] - p[0]),
        ]
    )
    # diagonal [p1, p4] is m3 + t (m1 + m2), [p2, p3] is -m3 + u (m1 - m2)
    t = -(k[0] + k[1])
    p_f = m3 + t * s
    # every vertex moves by excess / 2 toward p_F; past p_F the triple is
    # no longer on the compatibility boundary and the bound is not reached
    shift = 0.5 * excess
    valid = float(np.linalg.norm(p - p_f, axis=1).min()) >= shift - RANGE_SLACK
    return _result(
        Case.COPLANAR_CONVEX,
        m,
        n,
        attains=valid,
        label="optimal" if valid else "outside validity region",
        scalars={"delta": delta, "sigma": sigma, "k1": k[0], "k2": k[1], "shift": shift},
        q_vertices=q,
        p_fermat=p_f,
        optimal_states=(s / x, d / y),
    )


def degenerate_construction(m):
    """Jointly measurable triple for targets whose Fermat-Torricelli point is a vertex.

    The lower bound is not attainable here. The construction keeps
    ``q_l = p_l`` at the optimal vertex, pulls the other three vertices toward
    it by a common amount ``t`` so their distances to it sum to 4, and reads
    off ``n_i = (q_1 + q_{i+1}) / 2``.

    The shifted vertices do not sum to zero, so they are not the vertices of
    any triple and the returned ``n`` lies strictly inside the compatible set.
    ``scalars["claimed_value"]`` holds ``2 t = (2/3)(sum_k |p_k - p_F| - 4)``,
    the error the shifted vertices would give; ``achieved`` is recomputed
    from ``n`` and is larger.
    """
    m = make_triple(m)
    p = quad_from_triple(m)
    ft = fermat_torricelli(p)
    if ft.at_vertex is None:
        raise PreconditionViolated("Fermat-Torricelli point of the target is not a vertex")
    l = ft.at_vertex - 1
    others = [k for k in range(4) if k != l]
    offsets = p[others] - p[l]
    dist = np.linalg.norm(offsets, axis=1)
    t = (float(dist.sum()) - 4.0) / 3.0
    if t <= 0.0:
        raise NotEnoughIncompatibility("target triple is jointly measurable")
    if dist.min() <= t:
        raise Degenerate("a vertex lies closer to the optimal vertex than the shift")
    units = offsets / dist[:, None]
    q = p.copy()
    q[others] = p[others] - t * units
    n = make_triple(triple_from_quad(q))
    return _result(
        Case.COPLANAR_DEGENERATE,
        m,
        n,
        attains=False,
        label="constructive upper bound",
        scalars={"t": t, "vertex": l + 1, "claimed_value": 2.0 * t},
        q_vertices=q,
        p_fermat=p[l].copy(),
        optimal_states=tuple(units),
    )


def compatible_result(m, report=None):
    m = make_triple(m)
    report = report or incompatibility_bound(m)
    return ApproximationResult(
        case=Case.COMPATIBLE,
        n=m,
        scalars={},
        q_vertices=report.quad,
        p_fermat=report.ft.point,
        achieved=0.0,
        bound=0.0,
        optimal_states=(),
        attains_bound=True,
        condition_residuals=check_conditions(m, m),
        jm_margin=-2.0 * report.raw_bound,
        label="compatible",
    )


def approximate(m, *, jm_tol=JM_TOL):
    """Classify ``m`` and return the matching closed-form approximation.

    Raises NoClosedForm for generic triples and OutOfRange when a coplanar
    target lies where the closed form overshoots the Fermat-Torricelli point;
    use the numerical oracle in both cases.
    """
    cls = classify(m, jm_tol=jm_tol)
    if cls.tag is Case.COMPATIBLE:
        return compatible_result(m, cls.bound)
    if cls.tag is Case.PERPENDICULAR:
        return optimal_perpendicular(m)
    if cls.tag is Case.COPLANAR_CONVEX:
        res = optimal_coplanar_convex(m)
        if not res.attains_bound:
            raise OutOfRange("closed form is outside its validity region for this target")
        return res
    if cls.tag is Case.COPLANAR_DEGENERATE:
        return degenerate_construction(m)
    raise NoClosedForm("no closed form for a generic triple")
