import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.optimize import minimize

from jmtriple.errors import (
    Degenerate,
    NoConvergence,
    NoProperIntersection,
    NotCoplanar,
    PreconditionViolated,
)
from jmtriple.fermat import (
    FT_TOL,
    fermat_torricelli,
    ft_diagonal_intersection,
    ft_perpendicular_case,
    ft_total_distance,
    quad_from_triple,
    stationarity_residual,
    total_distance,
    triple_from_quad,
    vertex_test,
)
from reference import coplanar_target, perpendicular_target, random_rotation

SQ3 = math.sqrt(3.0)

point_sets = arrays(float, (4, 3), elements=st.floats(-2, 2, allow_nan=False))


def test_quad_examples(pauli):
    q = quad_from_triple(pauli)
    assert q.tolist() == [[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]]
    assert np.all(quad_from_triple(np.zeros((3, 3))) == 0)
    t = 0.25
    q = quad_from_triple([[0, 0, t]] * 3)
    assert q.tolist() == [[0, 0, 3 * t], [0, 0, -t], [0, 0, -t], [0, 0, -t]]


def test_quad_round_trip():
    rng = np.random.default_rng(0)
    for _ in range(50):
        n = rng.uniform(-0.5, 0.5, size=(3, 3))
        q = quad_from_triple(n)
        np.testing.assert_allclose(triple_from_quad(q), n, atol=1e-15)
        np.testing.assert_allclose(q.sum(axis=0), 0, atol=1e-15)
        np.testing.assert_allclose(q[0] + q[1:], 2 * n, atol=1e-15)


def test_pauli_fermat_point(pauli):
    ft = fermat_torricelli(quad_from_triple(pauli))
    np.testing.assert_allclose(ft.point, 0, atol=1e-14)
    assert ft.total_distance == pytest.approx(4 * SQ3, abs=1e-13)
    assert ft.at_vertex is None
    assert ft.residual_norm <= FT_TOL


def test_coincident_points():
    v = np.array([0.1, -0.2, 0.3])
    ft = fermat_torricelli([v] * 4)
    np.testing.assert_array_equal(ft.point, v)
    assert ft.total_distance == 0
    assert ft.at_vertex == 1 and ft.multiplicity == 4


def test_vertex_inside_triangle():
    tri = np.array([[1.0, 0, 0], [-0.5, 0.9, 0], [-0.5, -0.9, 0]])
    pts = np.vstack([tri, [[0.05, 0.02, 0.0]]])
    ft = fermat_torricelli(pts)
    assert ft.at_vertex == 4
    np.testing.assert_array_equal(ft.point, pts[3])
    assert ft.residual_norm <= 1


def test_doubled_vertex_uses_multiplicity():
    # two points at the origin outweigh the other two whatever their directions
    pts = np.array([[0.0, 0, 0], [0, 0, 0], [1, 0, 0], [0, 1, 0]])
    norms, mult = vertex_test(pts)
    assert mult[0] == 2 and norms[0] == pytest.approx(math.sqrt(2))
    ft = fermat_torricelli(pts)
    assert ft.at_vertex == 1 and ft.certified


def test_collinear_points():
    pts = np.array([[0.0, 0, 0], [1, 0, 0], [2, 0, 0], [5, 0, 0]])
    ft = fermat_torricelli(pts)
    # any point of [1, 2] is optimal; the total is 6
    assert ft.total_distance == pytest.approx(6, abs=1e-12)
    assert ft.certified


def test_no_convergence_carries_best_iterate():
    pts = np.array([[1.0, 0, 0], [0, 1, 0], [0, 0, 1], [-1, -1, -1.5]])
    with pytest.raises(NoConvergence) as info:
        fermat_torricelli(pts, tol=0.0, max_iter=3)
    best = info.value.best
    assert best is not None and best.total_distance <= total_distance(pts, pts.mean(axis=0))


def test_rejects_non_finite_points():
    with pytest.raises(ValueError):
        fermat_torricelli([[np.nan, 0, 0]] * 4)


def _certificate_holds(pts, ft):
    if ft.at_vertex is None:
        return ft.residual_norm <= FT_TOL and stationarity_residual(pts, ft.point) <= FT_TOL
    return ft.residual_norm <= ft.multiplicity + FT_TOL


@given(point_sets)
def test_certificate_and_dominance(pts):
    ft = fermat_torricelli(pts)
    assert ft.certified
    assert _certificate_holds(pts, ft)
    slack = FT_TOL * max(1.0, ft.total_distance)
    assert ft.total_distance <= total_distance(pts, pts.mean(axis=0)) + slack
    for v in pts:
        assert ft.total_distance <= total_distance(pts, v) + slack


def test_matches_generic_minimizer():
    rng = np.random.default_rng(1)
    for _ in range(100):
        pts = rng.normal(size=(4, 3))
        ft = fermat_torricelli(pts)
        ref = min(
            minimize(lambda x: total_distance(pts, x), x0, method="Nelder-Mead",
                     options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 20000}).fun
            for x0 in (pts.mean(axis=0), *pts)
        )
        assert ft.total_distance <= ref + 1e-10
        assert ft.total_distance >= ref - 1e-8


def test_equivariance():
    rng = np.random.default_rng(2)
    for _ in range(100):
        pts = rng.normal(size=(4, 3))
        R = random_rotation(rng)
        c = rng.normal(size=3)
        a = fermat_torricelli(pts)
        b = fermat_torricelli(pts @ R.T + c)
        np.testing.assert_allclose(b.point, R @ a.point + c, atol=1e-9)
        assert b.total_distance == pytest.approx(a.total_distance, abs=1e-12)


def test_total_distance_never_increases():
    rng = np.random.default_rng(3)
    for _ in range(50):
        pts = rng.normal(size=(4, 3))
        ft = fermat_torricelli(pts, trace=True)
        h = np.array(ft.history)
        if h.size > 1:
            assert np.all(np.diff(h) <= 1e-15 * h[:-1])


def test_scalar_kernel_agrees():
    rng = np.random.default_rng(4)
    for _ in range(300):
        pts = rng.normal(size=(4, 3)) * rng.uniform(0.01, 3)
        assert ft_total_distance(pts) == pytest.approx(fermat_torricelli(pts).total_distance, abs=1e-12)


def test_perpendicular_examples(pauli):
    np.testing.assert_allclose(ft_perpendicular_case(pauli), 0, atol=1e-15)
    for a, b in [(0.3, 0.5), (0.1, 1.2), (0.7, 0.7)]:
        m = [[-math.sin(a), math.cos(a), 0], [math.sin(b), math.cos(b), 0], [0, 0, 1]]
        s = a + b
        expect = [0, 0, -math.cos(s) / (1 + abs(math.sin(s)))]
        np.testing.assert_allclose(ft_perpendicular_case(m), expect, atol=1e-15)


def test_perpendicular_equal_vectors():
    m1 = np.array([0.6, 0, 0])
    m = np.array([m1, m1, [0, 0, 0.5]])
    np.testing.assert_allclose(ft_perpendicular_case(m), -m[2])
    ft = fermat_torricelli(quad_from_triple(m))
    np.testing.assert_allclose(ft.point, -m[2], atol=1e-12)


def test_perpendicular_errors():
    with pytest.raises(PreconditionViolated):
        ft_perpendicular_case([[1, 0, 0], [0, 1, 0], [0.1, 0, 0.9]])
    with pytest.raises(Degenerate):
        ft_perpendicular_case([[0, 0, 0], [0, 0, 0], [0, 0, 1]])


def test_perpendicular_closed_form_is_the_fermat_point():
    # holds for non-unit m3 as well
    rng = np.random.default_rng(5)
    for _ in range(200):
        m = perpendicular_target(rng)
        ft = fermat_torricelli(quad_from_triple(m))
        np.testing.assert_allclose(ft_perpendicular_case(m), ft.point, atol=10 * FT_TOL)


def test_diagonal_examples():
    p = np.array([[1, 1, 0], [1, -1, 0], [-1, 1, 0], [-1, -1, 0]], dtype=float)
    np.testing.assert_allclose(ft_diagonal_intersection(p), 0, atol=1e-15)
    q = quad_from_triple([[1, 0, 0], [0, 1, 0], [0, 0, 0]])
    np.testing.assert_allclose(ft_diagonal_intersection(q), 0, atol=1e-15)


def test_diagonal_errors():
    with pytest.raises(NotCoplanar):
        ft_diagonal_intersection([[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1]])
    with pytest.raises(NoProperIntersection):
        # p1..p4 in order around a square: [p1,p4] and [p2,p3] are parallel sides
        ft_diagonal_intersection([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]])
    with pytest.raises(NoProperIntersection):
        ft_diagonal_intersection([[0, 0, 0], [2, 1, 0], [3, 1, 0], [1, 0, 0]])


def test_diagonal_intersection_is_stationary():
    rng = np.random.default_rng(6)
    for _ in range(200):
        p = quad_from_triple(coplanar_target(rng))
        x = ft_diagonal_intersection(p)
        assert stationarity_residual(p, x) <= FT_TOL
        np.testing.assert_allclose(fermat_torricelli(p).point, x, atol=1e-9)


def test_nearly_coincident_vertices_fall_back_to_merged_vertex():
    # p2 and p3 are 2e-10 apart; the kink stalls the iteration
    q = quad_from_triple([[1, 0, 0], [1, 1e-10, 0], [0.3, 0.2, 0.9]])
    ft = fermat_torricelli(q)
    assert ft.at_vertex == 2 and ft.multiplicity == 2
    assert ft.iterations < 10_000
    assert ft_total_distance(q) == pytest.approx(ft.total_distance, abs=1e-12)
    ref = minimize(lambda x: total_distance(q, x), q[1] + 0.01, method="Nelder-Mead",
                   options={"xatol": 1e-13, "fatol": 1e-15, "maxiter": 20000}).fun
    assert ft.total_distance <= ref + 1e-9
