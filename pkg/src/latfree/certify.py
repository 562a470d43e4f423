"""Lattice-freeness certificates for circulant simplices, plus a brute-force oracle.

The certificate path rests on the prefix-sum shift: for any ``x`` with
``sum(x) >= 0`` some cyclic shift of ``x`` has all proper prefix sums at most
``sum(x)``.  Against a non-decreasing ``a`` this forces, for every integer
``x`` in the hyperplane, some facet inequality ``<shift(a, i), x> >= a[-1]``;
so no integer point lies in the relative interior.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .construct import AVector, ProjectedPolytope, cyclic_shift
from .errors import ResourceGuardError, VerificationError
from .linalg import dot, hyperplane_normal, solve_consistent
from .scalar import FieldScalar, as_scalar, from_json, to_json

__all__ = [
    "Certificate",
    "ShiftResult",
    "brute_force_interior_points",
    "enumeration_certificate",
    "find_shift",
    "latticefree_certificate",
    "positive_functional",
    "recover_a",
    "separating_facet",
    "simplex_facets",
]

MAX_ENUMERATION_DIM = 6


@dataclass(frozen=True)
class ShiftResult:
    ell: int
    k: int
    prefix_sums: tuple
    shifted: tuple


def _prefix_sums(x):
    out = []
    acc = FieldScalar(0)
    for xi in x:
        acc = acc + xi
        out.append(acc)
    return tuple(out)


def find_shift(x):
    """Shift ``ell = d + 1 - k``, ``k`` the first index maximising the prefix sums.

    The returned shifted vector has every proper prefix sum ``<= sum(x)``, and
    ``< sum(x)`` when the sum is positive; this is re-checked before returning.
    """
    x = tuple(as_scalar(xi) for xi in x)
    n = len(x)
    sums = _prefix_sums(x)
    total = sums[-1]
    if total.sign() < 0:
        raise ValueError("find_shift needs <1, x> >= 0")
    k = 0
    for j in range(1, n):
        if sums[j] > sums[k]:
            k = j
    k += 1  # 1-based, smallest maximiser
    ell = n - k
    shifted = cyclic_shift(x, ell)
    strict = total.sign() > 0
    for s in _prefix_sums(shifted)[:-1]:
        c = (s - total).sign()
        if c > 0 or (strict and c == 0):
            raise VerificationError("prefix-sum postcondition failed", {"x": [str(v) for v in x]})
    return ShiftResult(ell=ell, k=k, prefix_sums=sums, shifted=shifted)


def positive_functional(x, a):
    """Index ``i`` with ``<shift(a, i), x> > 0`` for nonzero zero-sum ``x``.

    ``a`` must be strictly increasing.  The index is ``d + 1 - ell`` from
    :func:`find_shift` and is verified by an exact sign check.
    """
    x = tuple(as_scalar(xi) for xi in x)
    a = a if isinstance(a, AVector) else AVector(a)
    if len(x) != len(a):
        raise ValueError("x and a must have the same length")
    if all(xi.is_zero() for xi in x):
        raise ValueError("x must be nonzero")
    if not sum(x, FieldScalar(0)).is_zero():
        raise ValueError("x must satisfy <1, x> = 0")
    if not a.is_monotone(strict=True):
        raise ValueError("a must be strictly increasing")
    n = len(x)
    i = (n - find_shift(x).ell) % n
    if dot(cyclic_shift(a.entries, i), x).sign() <= 0:
        raise VerificationError("functional is not positive", {"i": i})
    return i


def separating_facet(x, a):
    """For an integer ``x`` with ``sum(x) = 1``, an ``i`` with ``<shift(a, i), x> >= a[-1]``.

    Valid for non-decreasing ``a``; the inequality is re-checked exactly.
    """
    x = tuple(as_scalar(xi) for xi in x)
    a = a if isinstance(a, AVector) else AVector(a)
    if any(not xi.is_rational() or xi.as_fraction().denominator != 1 for xi in x):
        raise ValueError("x must be an integer vector")
    if sum(x, FieldScalar(0)) != 1:
        raise ValueError("x must lie in the hyperplane <1, x> = 1")
    n = len(x)
    i = (n - find_shift(x).ell) % n
    if dot(cyclic_shift(a.entries, i), x) < a[-1]:
        raise VerificationError("no separating facet found; is a non-decreasing?", {"i": i})
    return i


@dataclass(frozen=True)
class Certificate:
    """Replayable evidence that a simplex has no interior lattice point.

    ``kind`` is ``"monotone_a"`` (ordering chain of ``a``) or
    ``"exhaustive_enumeration"`` (full scan of the integer bounding box).
    """

    kind: str
    payload: dict = field(default_factory=dict)

    def verify(self):
        if self.kind == "monotone_a":
            a = AVector([from_json(v) for v in self.payload["a"]])
            return latticefree_certificate(a) is not None
        if self.kind == "exhaustive_enumeration":
            verts = [[from_json(x) for x in v] for v in self.payload["vertices"]]
            poly = ProjectedPolytope(len(verts[0]), verts)
            return brute_force_interior_points(poly) == [] and not self.payload["interior_points"]
        raise ValueError(f"unknown certificate kind {self.kind!r}")

    def to_json(self):
        replay = {
            "monotone_a": "check a[i] <= a[i+1] for every listed pair; "
            "lattice-freeness of {x in H : <shift(a,i),x> <= a[-1]} follows",
            "exhaustive_enumeration": "rebuild facets from the vertices and test every integer "
            "point of the box for strict interiority",
        }[self.kind]
        return {"kind": self.kind, "payload": self.payload, "replay": replay}


def latticefree_certificate(a):
    """Monotone-``a`` certificate, or None when ``a`` is not non-decreasing.

    None means "not certified", not that the simplex contains a lattice point.
    """
    a = a if isinstance(a, AVector) else AVector(a)
    chain = []
    for i, (x, y) in enumerate(zip(a.entries, a.entries[1:])):
        gap = (y - x).sign()
        if gap < 0:
            return None
        chain.append({"i": i, "relation": "<" if gap > 0 else "="})
    return Certificate(
        "monotone_a",
        {"a": [to_json(x) for x in a.entries], "normalization": a.normalization, "chain": chain},
    )


def recover_a(vertices):
    """Recover ``a`` (with ``a[0] = 0``, ``a[-1] = 1``) from circulant vertices in H.

    ``vertices[i]`` must be ``shift(v, i)``.  The facet opposite ``vertices[0]``
    is fitted through the other vertices, then every facet/vertex incidence of
    the circulant description is checked exactly.
    """
    verts = [tuple(as_scalar(x) for x in v) for v in vertices]
    n = len(verts)
    if any(len(v) != n for v in verts):
        raise ValueError("need d+1 vertices in R^(d+1)")
    for i, v in enumerate(verts):
        if sum(v, FieldScalar(0)) != 1:
            raise VerificationError("vertex not in the hyperplane", {"vertex": i})
        if any(x != y for x, y in zip(v, cyclic_shift(verts[0], i))):
            raise VerificationError("vertices are not cyclic shifts", {"vertex": i})
    rows = [list(verts[j][1:-1]) for j in range(1, n)]
    rhs = [1 - verts[j][-1] for j in range(1, n)]
    middle = solve_consistent(rows, rhs)
    a = AVector((FieldScalar(0), *middle, FieldScalar(1)), "unit")
    for i in range(n):
        shifted = cyclic_shift(a.entries, i)
        for j in range(n):
            s = (dot(shifted, verts[j]) - 1).sign()
            if s > 0 or (s == 0) != (i != j):
                raise VerificationError("circulant facet structure violated", {"facet": i, "vertex": j})
    return a


def simplex_facets(poly):
    """Facets ``(normal, offset)`` with interior ``<normal, x> < offset``.

    One facet per omitted vertex, fitted by cofactor expansion.
    """
    verts = poly.vertices
    n = len(verts)
    if n != poly.dim + 1:
        raise ValueError("simplex_facets expects dim + 1 vertices")
    facets = []
    for k in range(n):
        others = verts[:k] + verts[k + 1:]
        normal = hyperplane_normal(others)
        offset = dot(normal, others[0])
        s = (dot(normal, verts[k]) - offset).sign()
        if s == 0:
            raise ValueError("degenerate simplex: vertices are not affinely independent")
        if s > 0:
            normal = [-x for x in normal]
            offset = -offset
        facets.append((tuple(normal), offset))
    return facets


def _float_enclosure(x, bits=64):
    iv = as_scalar(x).to_interval(bits)
    mid = float(iv.mid)
    err = float(iv.width) / 2 + abs(mid) * 2.0**-52 + 2.0**-1000
    return mid, err


def _bounding_box(poly):
    lo, hi = [], []
    for col in zip(*poly.vertices):
        ivs = [x.to_interval(64) for x in col]
        lo.append(math.floor(min(float(i.lower) for i in ivs)))
        hi.append(math.ceil(max(float(i.upper) for i in ivs)))
    return lo, hi


def _scan_slab(first, lo, hi, facets_f, facets):
    """Interior lattice points with first coordinate ``first`` plus the slab size."""
    ranges = [range(first, first + 1)] + [range(l, h + 1) for l, h in zip(lo[1:], hi[1:])]
    pts = np.array(list(itertools.product(*ranges)), dtype=np.int64)
    if not len(pts):
        return [], 0
    keep = np.ones(len(pts), dtype=bool)
    absx = np.abs(pts).astype(float)
    for normal_f, normal_err, off_f, off_err in facets_f:
        slack = off_f - pts.astype(float) @ normal_f
        bound = absx @ normal_err + off_err
        bound += 4 * (len(normal_f) + 1) * 2.0**-53 * (absx @ np.abs(normal_f) + abs(off_f))
        keep &= slack + bound > 0
        if not keep.any():
            break
    found = []
    for p in pts[keep]:
        x = [int(t) for t in p]
        if all((off - dot(normal, x)).sign() > 0 for normal, off in facets):
            found.append(tuple(x))
    return found, len(pts)


def _scan(poly, workers=1):
    if poly.dim > MAX_ENUMERATION_DIM:
        raise ResourceGuardError(
            f"brute-force enumeration is limited to dim <= {MAX_ENUMERATION_DIM}; "
            "use latticefree_certificate for larger instances"
        )
    facets = simplex_facets(poly)
    facets_f = []
    for normal, off in facets:
        enc = [_float_enclosure(x) for x in normal]
        off_f, off_err = _float_enclosure(off)
        facets_f.append(
            (np.array([e[0] for e in enc]), np.array([e[1] for e in enc]), off_f, off_err)
        )
    lo, hi = _bounding_box(poly)
    slabs = range(lo[0], hi[0] + 1)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda f: _scan_slab(f, lo, hi, facets_f, facets), slabs))
    else:
        results = [_scan_slab(f, lo, hi, facets_f, facets) for f in slabs]
    points = sorted(p for found, _ in results for p in found)
    checked = sum(n for _, n in results)
    return points, {"lower": lo, "upper": hi}, checked


def brute_force_interior_points(poly, workers=1):
    """All integer points strictly inside a simplex, by scanning its bounding box.

    Points are visited in lexicographic order; a floating-point filter with a
    rigorous error bound discards clear outsiders and every survivor is tested
    exactly.  Limited to ``dim <= 6``.
    """
    return _scan(poly, workers)[0]


def enumeration_certificate(poly, workers=1):
    points, box, checked = _scan(poly, workers)
    return Certificate(
        "exhaustive_enumeration",
        {
            "vertices": [[to_json(x) for x in v] for v in poly.vertices],
            "box": box,
            "points_checked": checked,
            "interior_points": [list(p) for p in points],
            "empty_interior": not points,
        },
    )
