from fractions import Fraction

import numpy as np
import pytest
from mpmath import mp

from latfree.construct import (
    AVector,
    ProjectedPolytope,
    build_a,
    build_simplex,
    circulant_matrix,
    cyclic_shift,
    facet_values,
    lift_point,
    make_params,
    project,
    solve_circulant,
    solve_circulant_numeric,
    vertex_closed_form,
)
from latfree.linalg import SingularMatrixError, determinant, hyperplane_normal, solve_exact

import oracles


def test_make_params_rejects_small_dimensions():
    with pytest.raises(ValueError):
        make_params(1)
    with pytest.raises(ValueError):
        make_params(2.0)


def test_delta_matches_reference():
    for d in (2, 3, 7, 20):
        delta = make_params(d).delta
        with mp.workdps(60):
            assert abs(mp.mpf(delta.decimal(55)) - oracles.delta(d)) < mp.mpf(10) ** -50


def test_build_a_is_the_power_sequence():
    params = make_params(4)
    a = build_a(params)
    assert a.normalization == "power"
    assert a[0] == 0
    for i in range(5):
        assert a[i] == params.delta**i - 1
    assert a.is_monotone(strict=True)
    unit = a.normalized()
    assert unit[0] == 0 and unit[-1] == 1


def test_cyclic_shift():
    assert cyclic_shift((1, 2, 3, 4), 1) == (4, 1, 2, 3)
    assert cyclic_shift((1, 2, 3, 4), 5) == (4, 1, 2, 3)
    assert cyclic_shift((1, 2, 3), 0) == (1, 2, 3)
    assert cyclic_shift((), 3) == ()


def test_circulant_matrix_rows():
    m = circulant_matrix((0, 1, 2))
    assert [list(row) for row in m] == [[1, 1, 1], [1, 2, 0], [2, 0, 1]]


def test_solve_circulant_hand_example():
    # eliminated by hand: v1 + v2 + v3 = 1, v1 + 2 v2 = 2, 2 v1 + v3 = 2
    v = solve_circulant((0, 1, 2))
    assert tuple(x.as_fraction() for x in v) == (Fraction(4, 3), Fraction(1, 3), Fraction(-2, 3))
    ones = solve_circulant((0, 1, 2), rhs="ones")
    assert tuple(x.as_fraction() for x in ones) == (Fraction(1, 3),) * 3
    with pytest.raises(ValueError):
        solve_circulant((0, 1, 2), rhs="other")


def test_solve_circulant_singular():
    with pytest.raises(SingularMatrixError):
        solve_circulant((1, 1, 1))


def test_closed_form_matches_elimination_and_reference():
    for d in range(2, 9):
        params = make_params(d)
        v = vertex_closed_form(params)
        assert tuple(solve_circulant(build_a(params))) == v
        ref, _ = oracles.family_vertex(d)
        with mp.workdps(60):
            for x, r in zip(v, ref):
                assert abs(mp.mpf(x.decimal(55)) - r) < mp.mpf(10) ** -45


def test_vertex_identities():
    for d in (2, 5, 11):
        params = make_params(d)
        a = build_a(params)
        v = vertex_closed_form(params)
        assert sum(v) == 1
        vals = facet_values(a.entries, v)
        assert vals[0] < a[-1]
        assert all(x == a[-1] for x in vals[1:])
        assert v[1] - v[-1] == params.delta * (v[0] - v[1])
        assert all(x == v[1] for x in v[1:-1])


def test_d2_vertex_decimals():
    v = vertex_closed_form(make_params(2))
    assert [round(float(x), 6) for x in v] == [1.150762, 0.821573, -0.972335]


def test_build_simplex_solvers_agree():
    params = make_params(4)
    s1 = build_simplex(params)
    s2 = build_simplex(params, solver="circulant")
    assert s1.vertices == s2.vertices
    assert s1.d == 4 and len(s1.vertices) == 5
    assert s1.vertices[2] == cyclic_shift(s1.vertices[0], 2)
    with pytest.raises(ValueError):
        build_simplex(params, solver="magic")


def test_project_and_lift():
    spec = build_simplex(make_params(3))
    poly = project(spec)
    assert poly.dim == 3
    for v, p in zip(spec.vertices, poly.vertices):
        assert lift_point(p) == v
    assert project(spec.vertices) == poly


def test_projected_polytope_helpers():
    poly = ProjectedPolytope(2, [(0, 0), (2, 0), (0, 2)])
    assert poly.centroid() == (Fraction(2, 3), Fraction(2, 3))
    moved = poly.translate((1, -1))
    assert moved.vertices[0] == (1, -1)
    sheared = poly.transform([[1, 1], [0, 1]])
    assert sheared.vertices[1:] == ((2, 0), (2, 2))
    with pytest.raises(ValueError):
        ProjectedPolytope(3, [(0, 0)])


def test_numeric_solver_matches_exact():
    params = make_params(6)
    a = [float(x) for x in build_a(params).normalized()]
    v = solve_circulant_numeric(a)
    ref = [float(x) for x in vertex_closed_form(params)]
    assert np.allclose(v, ref, atol=1e-12)


def test_avector_accepts_floats():
    a = AVector((0.0, 0.5, 1.0))
    assert not a.exact
    assert a.is_monotone()
    assert AVector((0, 1)).exact


def test_linalg_helpers():
    assert determinant([[2, 1], [1, 1]]) == 1
    n = hyperplane_normal([(1, 0, 0), (0, 1, 0), (0, 0, 1)])
    assert len({x.as_fraction() for x in n}) == 1 and n[0] != 0
    x = solve_exact([[2, 0], [0, 4]], [1, 1])
    assert x == [Fraction(1, 2), Fraction(1, 4)]
