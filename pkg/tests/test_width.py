import random
from fractions import Fraction

import numpy as np
import pytest
from mpmath import mp

from latfree.construct import ProjectedPolytope, build_simplex, make_params, project
from latfree.errors import ResourceGuardError
from latfree.width import (
    alpha_formula,
    directional_width,
    floor_bound_exact,
    inradius_lower_bound,
    lattice_width,
    numeric_lattice_width,
    short_vectors,
    width_bound_certified,
)

import oracles


def _family(d):
    return project(build_simplex(make_params(d)))


def test_directional_width():
    poly = ProjectedPolytope(2, [(0, 0), (2, 0), (0, 2)])
    assert directional_width(poly, (1, 1)) == 2
    assert directional_width(poly, (1, -1)) == 4
    with pytest.raises(ValueError):
        directional_width(poly, (0, 0))
    with pytest.raises(ValueError):
        directional_width(poly, (1, 0, 0))


def test_inradius_bound_of_right_triangle():
    # distance from (2/3, 2/3) to the hypotenuse x + y = 2 is sqrt(2)/3
    rho = inradius_lower_bound(ProjectedPolytope(2, [(0, 0), (2, 0), (0, 2)]))
    assert rho == Fraction(7908855, 2**24)
    assert 0 < mp.sqrt(2) / 3 - mp.mpf(rho.numerator) / rho.denominator < mp.mpf(2) ** -24


def test_standard_simplices_and_cube():
    for d in (2, 3):
        verts = [(0,) * d] + [tuple(d * int(i == j) for j in range(d)) for i in range(d)]
        assert lattice_width(ProjectedPolytope(d, verts)).value == d
    cube = ProjectedPolytope(3, [tuple(int(b) for b in format(k, "03b")) for k in range(8)])
    assert directional_width(cube, (1, 1, 1)) == 3
    assert directional_width(cube, (1, 0, 0)) == 1


def test_family_width_equals_alpha_small_d():
    for d in (2, 3):
        report = lattice_width(_family(d))
        assert report.value == alpha_formula(make_params(d)).alpha
        assert report.path == "enumeration"
        assert (1,) + (0,) * (d - 1) in report.minimizers
        with mp.workdps(40):
            assert abs(mp.mpf(report.value.decimal(40)) - oracles.alpha(d)) < mp.mpf(10) ** -35


def test_family_width_matches_brute_force_oracle():
    for d, box in ((2, 6), (3, 4)):
        poly = _family(d)
        verts = [[float(x) for x in v] for v in poly.vertices]
        ref = oracles.brute_lattice_width(verts, box)
        assert abs(float(lattice_width(poly).value) - ref) < 1e-12


def test_alpha_reference_values():
    assert alpha_formula(make_params(2)).alpha.decimal(5) == "2.1231"
    assert alpha_formula(make_params(3)).alpha.decimal(5) == "3.3815"
    for d in (2, 6, 15):
        with mp.workdps(40):
            got = mp.mpf(alpha_formula(make_params(d)).alpha.decimal(40))
            assert abs(got - oracles.alpha(d)) < mp.mpf(10) ** -30


def test_width_report_json():
    doc = lattice_width(_family(2)).to_json()
    assert doc["value_decimal"].startswith("2.1230962494")
    assert doc["path"] == "enumeration"
    assert doc["candidates_checked"] >= doc["exact_evaluations"] >= len(doc["minimizers"])


def test_width_guard():
    poly = ProjectedPolytope(6, [tuple(int(i == j) for j in range(6)) for i in range(7)])
    with pytest.raises(ResourceGuardError):
        lattice_width(poly)


def _random_unimodular(rng, d):
    m = np.eye(d, dtype=int)
    for _ in range(3):
        i, j = rng.sample(range(d), 2)
        k = rng.choice((-2, -1, 1, 2))
        m[i] += k * m[j]
    if rng.random() < 0.5:
        m[0] = -m[0]
    return m.tolist()


def test_unimodular_and_translation_invariance():
    rng = random.Random(7)
    for d in (2, 3):
        poly = _family(d)
        base = lattice_width(poly).value
        for _ in range(5):
            m = _random_unimodular(rng, d)
            t = [rng.randint(-3, 3) for _ in range(d)]
            assert lattice_width(poly.transform(m).translate(t)).value == base


def test_width_bound_chain():
    for d in range(2, 40):
        ok, (lo, hi, bits) = width_bound_certified(make_params(d))
        assert ok and lo > hi and bits >= 64


def test_floor_bound_closed_form():
    # 2d + 3 - sqrt(8d + 8) at d = 1 is 5 - 4 = 1
    assert floor_bound_exact(1) == 1
    assert abs(float(floor_bound_exact(2)) - (7 - 24**0.5)) < 1e-14


def test_short_vectors_identity_gram():
    vecs = short_vectors(np.eye(2), 1.0)
    assert sorted(map(tuple, vecs)) == [(0, 1), (1, 0)]
    vecs = short_vectors(np.eye(3), 2.0)
    assert len(vecs) == 3 + 6
    assert all(np.dot(v, v) <= 2 for v in vecs)


def test_numeric_width_agrees_with_exact():
    for d in (2, 3, 4):
        poly = _family(d)
        verts = [[float(x) for x in v] for v in poly.vertices]
        w, c, _ = numeric_lattice_width(verts)
        assert abs(w - float(alpha_formula(make_params(d)).alpha)) < 1e-12
        assert abs(directional_width(poly, c) - lattice_width(poly).value) < Fraction(1, 10**12)
