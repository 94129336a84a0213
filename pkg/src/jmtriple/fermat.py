"""Fermat-Torricelli points (geometric medians) of four points in R^3.

The four points are the vertices ``q1..q4`` derived from a measurement triple
by :func:`quad_from_triple`. The general solver first applies the
vertex-optimality test, then minimizes the total distance with Weiszfeld
iterations accelerated by guarded Newton steps. Two closed forms cover the
special geometries handled analytically elsewhere in the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bloch import make_triple
from .errors import (
    Degenerate,
    NoConvergence,
    NoProperIntersection,
    NotCoplanar,
    PreconditionViolated,
)

FT_TOL = 1e-10
FT_TOL_LOOSE = 1e-7
EPS_COINCIDE = 1e-12
ANG_TOL = 1e-9
PLANE_TOL = 1e-9
MAX_ITER = 100_000
# iterations without progress before giving up early
STALL_ITER = 1000
# merge radius, relative to the point spread, for the fallback vertex test
EPS_CLUSTER = 1e-8

# q = QUAD_MATRIX @ n
QUAD_MATRIX = np.array(
    [
        [1.0, 1.0, 1.0],
        [1.0, -1.0, -1.0],
        [-1.0, 1.0, -1.0],
        [-1.0, -1.0, 1.0],
    ]
)

_RESTART_DIRECTIONS = np.array(
    [
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
        [-1.0, 0.0, 0.0],
        [0.0, -1.0, 0.0],
        [0.0, 0.0, -1.0],
    ]
)


@dataclass(frozen=True)
class FtResult:
    """Fermat-Torricelli point together with its optimality certificate.

    For an interior point ``residual_norm`` is ``|sum_k unit(q_k - point)|``,
    which vanishes at the optimum. For a vertex answer (``at_vertex`` is the
    1-based index) it is the norm of the unit-vector sum over the other,
    non-coincident vertices, and the certificate is
    ``residual_norm <= multiplicity`` where ``multiplicity`` counts the
    vertices sitting on that point.
    """

    point: np.ndarray
    total_distance: float
    residual_norm: float
    at_vertex: int | None = None
    iterations: int = 0
    multiplicity: int = 1
    history: tuple = field(default=(), repr=False, compare=False)

    @property
    def certified(self):
        if self.at_vertex is None:
            return self.residual_norm <= FT_TOL_LOOSE
        return self.residual_norm <= self.multiplicity + FT_TOL


def quad_from_triple(n):
    """The four vertices ``n123, n1-n23, n2-n13, n3-n12`` as a ``(4, 3)`` array."""
    return QUAD_MATRIX @ make_triple(n)


def triple_from_quad(q):
    """Inverse of :func:`quad_from_triple`: ``n_i = (q1 + q_{i+1}) / 2``."""
    q = np.asarray(q, dtype=float)
    return 0.5 * (q[0] + q[1:])


def total_distance(points, x):
    return float(np.linalg.norm(points - x, axis=1).sum())


def stationarity_residual(points, x, eps=EPS_COINCIDE):
    """``|sum_k unit(q_k - x)|`` over the points not coinciding with ``x``."""
    diff = np.asarray(points, dtype=float) - x
    dist = np.linalg.norm(diff, axis=1)
    keep = dist > eps
    return float(np.linalg.norm((diff[keep] / dist[keep, None]).sum(axis=0)))


def _check_points(points):
    pts = np.array(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError(f"expected an (k, 3) array of points, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise ValueError("points must be finite")
    return pts


def vertex_test(points, eps=EPS_COINCIDE):
    """Norms of the unit-vector sums at each vertex and the vertex multiplicities."""
    pts = _check_points(points)
    diff = pts[None, :, :] - pts[:, None, :]
    dist = np.linalg.norm(diff, axis=2)
    keep = dist > eps
    safe = np.where(keep, dist, 1.0)
    units = np.where(keep[:, :, None], diff / safe[:, :, None], 0.0)
    norms = np.linalg.norm(units.sum(axis=1), axis=1)
    mult = len(pts) - keep.sum(axis=1)
    return norms, mult


def fermat_torricelli(points, *, tol=FT_TOL, max_iter=MAX_ITER, trace=False):
    """Geometric median of a small point set (four points in practice).

    Parameters
    ----------
    points : array_like, shape (k, 3)
    tol : float
        Target for the stationarity residual of an interior answer.
    max_iter : int
    trace : bool
        Record the total distance after every iteration in ``history``.

    Raises
    ------
    NoConvergence
        If ``max_iter`` is exhausted with the residual above ``FT_TOL_LOOSE``;
        the best iterate is attached as ``exc.best``.
    """
    pts = _check_points(points)

    norms, mult = vertex_test(pts)
    passing = np.flatnonzero(norms <= mult + tol)
    if passing.size:
        l = int(passing[0])
        return FtResult(
            point=pts[l].copy(),
            total_distance=total_distance(pts, pts[l]),
            residual_norm=float(norms[l]),
            at_vertex=l + 1,
            multiplicity=int(mult[l]),
        )

    centroid = pts.mean(axis=0)
    x = centroid.copy()
    f = total_distance(pts, x)
    best_x, best_f = x.copy(), f
    history = [f] if trace else None
    eye = np.eye(3)
    restarts = 0
    stall = 0
    res = np.inf

    for it in range(1, max_iter + 1):
        diff = pts - x
        dist = np.linalg.norm(diff, axis=1)
        if dist.min() <= EPS_COINCIDE:
            # Stuck on a vertex that failed the optimality test.
            direction = _RESTART_DIRECTIONS[restarts % len(_RESTART_DIRECTIONS)]
            restarts += 1
            x = 0.5 * (centroid + best_x) + 1e-6 * direction
            f = total_distance(pts, x)
            continue
        units = diff / dist[:, None]
        usum = units.sum(axis=0)
        res = float(np.linalg.norm(usum))
        if res <= tol:
            break

        x_new = None
        # Newton step on the total distance; H = sum (I - u u^T) / d.
        hess = (eye[None] - units[:, :, None] * units[:, None, :]) / dist[:, None, None]
        try:
            step = np.linalg.solve(hess.sum(axis=0), usum)
        except np.linalg.LinAlgError:
            step = None
        if step is not None and np.all(np.isfinite(step)):
            for _ in range(4):
                cand = x + step
                f_cand = total_distance(pts, cand)
                if f_cand <= f * (1.0 + 4e-16):
                    x_new, f_new = cand, f_cand
                    break
                step = 0.5 * step
        if x_new is None:
            w = 1.0 / dist
            x_new = (w[:, None] * pts).sum(axis=0) / w.sum()
            f_new = total_distance(pts, x_new)

        x, f = x_new, f_new
        stall = 0 if f < best_f * (1.0 - 1e-15) else stall + 1
        if f <= best_f:
            best_x, best_f = x.copy(), f
        if stall >= STALL_ITER:
            return _unconverged(pts, best_x, best_f, it, history, tol)
        if trace:
            history.append(f)
    else:
        return _unconverged(pts, best_x, best_f, max_iter, history, tol)

    return FtResult(
        point=x,
        total_distance=f,
        residual_norm=res,
        iterations=it,
        history=tuple(history or ()),
    )


def _unconverged(pts, best_x, best_f, iterations, history, tol):
    res = stationarity_residual(pts, best_x)
    result = FtResult(best_x, best_f, res, iterations=iterations, history=tuple(history or ()))
    if res <= FT_TOL_LOOSE:
        return result
    # Nearly coincident vertices leave a kink the iteration cannot resolve;
    # retry the vertex test treating them as one point.
    eps = EPS_CLUSTER * max(1.0, float(np.ptp(pts, axis=0).max()))
    norms, mult = vertex_test(pts, eps)
    passing = np.flatnonzero(norms <= mult + tol)
    if passing.size:
        l = int(passing[0])
        return FtResult(
            point=pts[l].copy(),
            total_distance=total_distance(pts, pts[l]),
            residual_norm=float(norms[l]),
            at_vertex=l + 1,
            iterations=iterations,
            multiplicity=int(mult[l]),
        )
    raise NoConvergence(f"Weiszfeld iteration did not converge (residual {res:.3e})", best=result)


def ft_perpendicular_case(m, *, ang_tol=ANG_TOL):
    """Closed-form Fermat-Torricelli point when ``m3`` is orthogonal to ``m1, m2``.

    Returns ``((y - x) / (y + x)) m3`` with ``x = |m1 + m2|``, ``y = |m1 - m2|``.
    """
    m = make_triple(m)
    m1, m2, m3 = m
    n3 = np.linalg.norm(m3)
    for other in (m1, m2):
        if abs(np.dot(m3, other)) > ang_tol * n3 * np.linalg.norm(other):
            raise PreconditionViolated("m3 is not perpendicular to m1 and m2")
    x = np.linalg.norm(m1 + m2)
    y = np.linalg.norm(m1 - m2)
    if x + y < EPS_COINCIDE:
        raise Degenerate("m1 + m2 and m1 - m2 both vanish")
    return (y - x) / (y + x) * m3


def ft_diagonal_intersection(p, *, plane_tol=PLANE_TOL):
    """Intersection of the diagonals ``[p1, p4]`` and ``[p2, p3]`` of a planar quadrilateral."""
    p = _check_points(p)
    if p.shape != (4, 3):
        raise ValueError("need exactly four vertices")
    sv = np.linalg.svd(p - p.mean(axis=0), compute_uv=False)
    if sv[-1] > plane_tol:
        raise NotCoplanar(f"vertices are not coplanar (residual {sv[-1]:.3e})")
    d1 = p[3] - p[0]
    d2 = p[2] - p[1]
    n1, n2 = np.linalg.norm(d1), np.linalg.norm(d2)
    if n1 <= EPS_COINCIDE or n2 <= EPS_COINCIDE:
        raise NoProperIntersection("a diagonal has zero length")
    if np.linalg.norm(np.cross(d1, d2)) <= plane_tol * n1 * n2:
        raise NoProperIntersection("diagonals are parallel")
    (t, u), *_ = np.linalg.lstsq(np.column_stack([d1, -d2]), p[1] - p[0], rcond=None)
    if not (-plane_tol <= t <= 1 + plane_tol and -plane_tol <= u <= 1 + plane_tol):
        raise NoProperIntersection("diagonals meet outside the segments")
    return p[0] + t * d1


def ft_total_distance(points, tol=FT_TOL, max_iter=500):
    """Minimal total distance of a point set, on plain floats.

    Same vertex test and Newton-accelerated Weiszfeld scheme as
    :func:`fermat_torricelli`, without numpy overhead. Meant for optimization
    loops that need only the objective value; returns ``inf`` if the iteration
    stalls above ``FT_TOL_LOOSE`` and no vertex passes the merged vertex test.
    """
    pts = [tuple(map(float, p)) for p in points]
    k = len(pts)
    sqrt = math.sqrt

    for l in range(k):
        xl, yl, zl = pts[l]
        sx = sy = sz = tot = 0.0
        mult = 0
        for px, py, pz in pts:
            dx, dy, dz = px - xl, py - yl, pz - zl
            d = sqrt(dx * dx + dy * dy + dz * dz)
            if d <= EPS_COINCIDE:
                mult += 1
                continue
            tot += d
            sx += dx / d
            sy += dy / d
            sz += dz / d
        if sqrt(sx * sx + sy * sy + sz * sz) <= mult + tol:
            return tot

    x = sum(p[0] for p in pts) / k
    y = sum(p[1] for p in pts) / k
    z = sum(p[2] for p in pts) / k

    def total(x, y, z):
        return sum(sqrt((px - x) ** 2 + (py - y) ** 2 + (pz - z) ** 2) for px, py, pz in pts)

    f = total(x, y, z)
    for _ in range(max_iter):
        ux = uy = uz = 0.0
        h00 = h01 = h02 = h11 = h12 = h22 = 0.0
        wsum = wx = wy = wz = 0.0
        for px, py, pz in pts:
            dx, dy, dz = px - x, py - y, pz - z
            d = sqrt(dx * dx + dy * dy + dz * dz)
            if d <= EPS_COINCIDE:
                # landed on a non-optimal vertex; nudge off it
                x += 1e-6
                d = None
                break
            ax, ay, az = dx / d, dy / d, dz / d
            ux += ax
            uy += ay
            uz += az
            w = 1.0 / d
            h00 += (1.0 - ax * ax) * w
            h11 += (1.0 - ay * ay) * w
            h22 += (1.0 - az * az) * w
            h01 -= ax * ay * w
            h02 -= ax * az * w
            h12 -= ay * az * w
            wsum += w
            wx += px * w
            wy += py * w
            wz += pz * w
        if d is None:
            f = total(x, y, z)
            continue
        if sqrt(ux * ux + uy * uy + uz * uz) <= tol:
            return f

        accepted = False
        c00 = h11 * h22 - h12 * h12
        c01 = h02 * h12 - h01 * h22
        c02 = h01 * h12 - h02 * h11
        det = h00 * c00 + h01 * c01 + h02 * c02
        if det != 0.0 and math.isfinite(det):
            c11 = h00 * h22 - h02 * h02
            c12 = h01 * h02 - h00 * h12
            c22 = h00 * h11 - h01 * h01
            sx = (c00 * ux + c01 * uy + c02 * uz) / det
            sy = (c01 * ux + c11 * uy + c12 * uz) / det
            sz = (c02 * ux + c12 * uy + c22 * uz) / det
            for _ in range(4):
                f_new = total(x + sx, y + sy, z + sz)
                if f_new <= f * (1.0 + 4e-16):
                    x, y, z, f = x + sx, y + sy, z + sz, f_new
                    accepted = True
                    break
                sx, sy, sz = 0.5 * sx, 0.5 * sy, 0.5 * sz
        if not accepted:
            x, y, z = wx / wsum, wy / wsum, wz / wsum
            f = total(x, y, z)

    res = stationarity_residual(pts, np.array([x, y, z]))
    if res <= FT_TOL_LOOSE:
        return f
    arr = np.array(pts)
    norms, mult = vertex_test(arr, EPS_CLUSTER * max(1.0, float(np.ptp(arr, axis=0).max())))
    passing = np.flatnonzero(norms <= mult + tol)
    if passing.size:
        return total_distance(arr, arr[int(passing[0])])
    return math.inf
