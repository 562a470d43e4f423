import itertools
import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latfree.certify import (
    Certificate,
    brute_force_interior_points,
    enumeration_certificate,
    find_shift,
    latticefree_certificate,
    positive_functional,
    recover_a,
    separating_facet,
    simplex_facets,
)
from latfree.construct import AVector, ProjectedPolytope, build_a, build_simplex, cyclic_shift, make_params, project
from latfree.errors import ResourceGuardError, VerificationError
from latfree.linalg import dot

import oracles


def _prefix(x):
    return list(itertools.accumulate(x))


def test_find_shift_examples():
    r = find_shift((1, 0, 0))
    assert (r.k, r.ell) == (1, 2)
    assert r.shifted == cyclic_shift((1, 0, 0), 2)
    r = find_shift((0, 0, 0))
    assert r.ell == 2
    with pytest.raises(ValueError):
        find_shift((-1, 0))


@settings(max_examples=300, deadline=None)
@given(st.lists(st.fractions(min_value=-20, max_value=20, max_denominator=7), min_size=2, max_size=9))
def test_find_shift_postcondition(x):
    total = sum(x)
    if total < 0:
        x = [-t for t in x]
        total = -total
    r = find_shift(x)
    sums = _prefix(r.shifted)
    assert all(s <= total for s in sums[:-1])
    if total > 0:
        assert all(s < total for s in sums[:-1])


def test_positive_functional_example():
    a = build_a(make_params(2))
    i = positive_functional((1, -1, 0), a)
    assert i == 1
    assert dot(cyclic_shift(a.entries, i), (1, -1, 0)) > 0


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(-6, 6), min_size=3, max_size=9))
def test_positive_functional_property(raw):
    x = raw[:-1] + [-sum(raw[:-1])]
    if not any(x):
        return
    a = build_a(make_params(len(x) - 1))
    i = positive_functional(x, a)
    assert dot(cyclic_shift(a.entries, i), x) > 0


def test_positive_functional_preconditions():
    a = build_a(make_params(2))
    with pytest.raises(ValueError):
        positive_functional((1, 0, 0), a)
    with pytest.raises(ValueError):
        positive_functional((0, 0, 0), a)
    with pytest.raises(ValueError):
        positive_functional((1, -1, 0), AVector((0, 0, 1)))


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(-5, 5), min_size=3, max_size=7))
def test_separating_facet_property(raw):
    x = raw[:-1] + [1 - sum(raw[:-1])]
    a = build_a(make_params(len(x) - 1))
    i = separating_facet(x, a)
    assert dot(cyclic_shift(a.entries, i), x) >= a[-1]


def test_separating_facet_needs_integers():
    a = build_a(make_params(2))
    with pytest.raises(ValueError):
        separating_facet((Fraction(1, 2), Fraction(1, 2), 0), a)
    with pytest.raises(ValueError):
        separating_facet((1, 1, 0), a)


def test_monotone_certificate():
    cert = latticefree_certificate(build_a(make_params(3)))
    assert cert.kind == "monotone_a"
    assert cert.verify()
    doc = json.loads(json.dumps(cert.to_json()))
    assert doc["replay"] and len(doc["payload"]["chain"]) == 3
    assert latticefree_certificate(AVector((0, 2, 1))) is None
    assert latticefree_certificate(AVector((0, 0, 1))).payload["chain"][0]["relation"] == "="


def test_brute_force_small_triangles():
    assert brute_force_interior_points(ProjectedPolytope(2, [(0, 0), (3, 0), (0, 3)])) == [(1, 1)]
    assert brute_force_interior_points(ProjectedPolytope(2, [(0, 0), (2, 0), (0, 2)])) == []
    tri = ProjectedPolytope(2, [(0, 0), (4, 0), (0, 4)])
    expected = sorted(oracles.interior_points([(0, 0), (4, 0), (0, 4)]))
    assert brute_force_interior_points(tri) == expected == [(1, 1), (1, 2), (2, 1)]


def test_brute_force_matches_float_oracle_on_shifted_family():
    for d in (2, 3):
        poly = project(build_simplex(make_params(d)))
        for t in itertools.product((Fraction(1, 3), Fraction(-1, 2), Fraction(0)), repeat=d):
            moved = poly.translate(t)
            verts = [[float(x) for x in v] for v in moved.vertices]
            assert brute_force_interior_points(moved) == sorted(oracles.interior_points(verts))


def test_family_has_empty_interior():
    for d in (2, 3, 4):
        poly = project(build_simplex(make_params(d)))
        assert brute_force_interior_points(poly) == []
        assert brute_force_interior_points(poly, workers=2) == []


def test_enumeration_certificate_round_trip():
    poly = project(build_simplex(make_params(2)))
    cert = enumeration_certificate(poly)
    assert cert.payload["empty_interior"]
    assert cert.payload["points_checked"] > 0
    again = Certificate(cert.kind, json.loads(json.dumps(cert.payload)))
    assert again.verify()
    with pytest.raises(ValueError):
        Certificate("unknown").verify()


def test_enumeration_guard():
    poly = ProjectedPolytope(7, [tuple(int(i == j) for j in range(7)) for i in range(8)])
    with pytest.raises(ResourceGuardError):
        brute_force_interior_points(poly)


def test_recover_a():
    spec = build_simplex(make_params(3))
    a = recover_a(spec.vertices)
    assert a.entries == build_a(spec.params).normalized().entries
    bad = list(spec.vertices)
    bad[1], bad[2] = bad[2], bad[1]
    with pytest.raises(VerificationError):
        recover_a(bad)


def test_simplex_facets_orientation():
    poly = ProjectedPolytope(2, [(0, 0), (1, 0), (0, 1)])
    facets = simplex_facets(poly)
    centroid = poly.centroid()
    assert all(dot(n, centroid) < off for n, off in facets)
    with pytest.raises(ValueError):
        simplex_facets(ProjectedPolytope(2, [(0, 0), (1, 1), (2, 2)]))
