"""Directional and lattice widths, and the closed-form width bounds of the family.

``lattice_width`` is exact: every primitive direction ``c`` with
``|c| <= W / (2 rho)`` is examined, where ``W`` is the width along a short
seed direction and ``rho`` a certified lower bound on the radius of a ball
inside the body.  Any longer ``c`` has width at least ``2 rho |c| > W`` and
cannot be the minimiser.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from mpmath import mp

from .certify import simplex_facets
from .errors import ResourceGuardError
from .linalg import dot
from .scalar import FieldScalar, IntervalApprox, adjoin_sqrt, mpf_to_fraction, to_json

__all__ = [
    "BoundPair",
    "WidthReport",
    "alpha_formula",
    "directional_width",
    "floor_bound_exact",
    "inradius_lower_bound",
    "lattice_width",
    "numeric_lattice_width",
    "pair_rms_bound",
    "short_vectors",
    "width_bound_certified",
]

MAX_WIDTH_DIM = 5
_GRID = 2**24


@dataclass(frozen=True)
class WidthReport:
    value: FieldScalar
    direction: tuple
    enumeration_radius: Fraction
    inradius_bound: Fraction
    candidates_checked: int
    minimizers: tuple = ()
    exact_evaluations: int = 0
    upper_bound: FieldScalar | None = None
    upper_direction: tuple = ()
    path: str = "enumeration"

    def to_json(self):
        return {
            "value": to_json(self.value),
            "value_decimal": self.value.decimal(50),
            "direction": list(self.direction),
            "minimizers": [list(c) for c in self.minimizers],
            "enumeration_radius": str(self.enumeration_radius),
            "inradius_bound": str(self.inradius_bound),
            "candidates_checked": self.candidates_checked,
            "exact_evaluations": self.exact_evaluations,
            "upper_bound": to_json(self.upper_bound),
            "upper_bound_direction": list(self.upper_direction),
            "path": self.path,
        }


@dataclass(frozen=True)
class BoundPair:
    alpha: FieldScalar
    floor_bound: IntervalApprox
    floor_exact: FieldScalar = field(default=None)


def _projections(poly, c):
    return [dot(c, v) for v in poly.vertices]


def directional_width(poly, c):
    """``max <c, x> - min <c, x>`` over the vertices, exactly."""
    c = tuple(c)
    if len(c) != poly.dim:
        raise ValueError("direction has the wrong dimension")
    if all(not x for x in c):
        raise ValueError("direction must be nonzero")
    vals = _projections(poly, c)
    hi = lo = vals[0]
    for v in vals[1:]:
        if v > hi:
            hi = v
        elif v < lo:
            lo = v
    return hi - lo


def _floor_to_grid(x):
    return Fraction(math.floor(x * _GRID), _GRID)


def _ceil_to_grid(x):
    return Fraction(math.ceil(x * _GRID), _GRID)


def inradius_lower_bound(poly):
    """Rational ``rho`` such that the ball of radius ``rho`` about the vertex
    centroid lies inside the simplex (minimum facet distance, rounded down)."""
    facets = simplex_facets(poly)
    g = poly.centroid()
    best = None
    with mp.workprec(200):
        for normal, off in facets:
            num = (off - dot(normal, g)).to_interval(120)
            norm2 = sum((x * x for x in normal), FieldScalar(0)).to_interval(120)
            if num.lower <= 0:
                raise ValueError("degenerate polytope: centroid is not interior")
            dist = num.lower / mp.sqrt(norm2.upper) * (1 - mp.mpf(2) ** -100)
            best = dist if best is None else min(best, dist)
    rho = _floor_to_grid(mpf_to_fraction(best) * (1 - Fraction(1, 10**30)))
    if rho <= 0:
        raise ValueError("degenerate polytope: inradius bound is not positive")
    return rho


def _float_vertices(poly):
    mids = np.empty((len(poly.vertices), poly.dim))
    errs = np.empty_like(mids)
    for i, v in enumerate(poly.vertices):
        for j, x in enumerate(v):
            iv = x.to_interval(64)
            mids[i, j] = float(iv.mid)
            errs[i, j] = float(iv.width) / 2 + abs(mids[i, j]) * 2.0**-52
    return mids, errs


def _candidate_slab(first, bound, r2, dim):
    """Primitive c with c[0] == first, |c|^2 <= r2, first nonzero entry positive."""
    rest = np.array(np.meshgrid(*[np.arange(-bound, bound + 1)] * (dim - 1), indexing="ij"))
    rest = rest.reshape(dim - 1, -1).T if dim > 1 else np.zeros((1, 0), dtype=np.int64)
    cand = np.hstack([np.full((len(rest), 1), first, dtype=np.int64), rest.astype(np.int64)])
    cand = cand[(cand**2).sum(axis=1) <= r2]
    if first == 0:
        nz = cand != 0
        has = nz.any(axis=1)
        cand = cand[has]
        lead = cand[np.arange(len(cand)), nz[has].argmax(axis=1)]
        cand = cand[lead > 0]
    g = np.gcd.reduce(np.abs(cand), axis=1) if len(cand) else np.zeros(0, dtype=np.int64)
    return cand[g == 1]


def _slab_widths(first, bound, r2, dim, mids, errs):
    cand = _candidate_slab(first, bound, r2, dim)
    if not len(cand):
        return cand, np.zeros(0), np.zeros(0)
    proj = cand.astype(float) @ mids.T
    w = proj.max(axis=1) - proj.min(axis=1)
    absc = np.abs(cand).astype(float)
    err = 2 * (absc @ errs.max(axis=0))
    err += 4 * (dim + 1) * 2.0**-53 * (absc @ np.abs(mids).max(axis=0)) * 2
    return cand, w, err


def _seed_direction(poly, mids):
    """Narrowest direction in {-1, 0, 1}^dim by float width; any valid upper bound will do."""
    dim = poly.dim
    grid = np.array(np.meshgrid(*[[-1, 0, 1]] * dim, indexing="ij")).reshape(dim, -1).T
    grid = grid[np.abs(grid).sum(axis=1) > 0]
    proj = grid @ mids.T
    best = grid[int(np.argmin(proj.max(axis=1) - proj.min(axis=1)))]
    if best[np.flatnonzero(best)[0]] < 0:
        best = -best
    return tuple(int(t) for t in best)


def lattice_width(poly, workers=1):
    """Certified exact lattice width of a full-dimensional simplex (``dim <= 5``)."""
    if poly.dim > MAX_WIDTH_DIM:
        raise ResourceGuardError(
            f"exact lattice width is limited to dim <= {MAX_WIDTH_DIM} (enumeration blow-up)"
        )
    dim = poly.dim
    mids, errs = _float_vertices(poly)
    seed = _seed_direction(poly, mids)
    upper = directional_width(poly, seed)
    rho = inradius_lower_bound(poly)
    w_hi = mpf_to_fraction(upper.to_interval(80).upper)
    radius = _ceil_to_grid(w_hi / (2 * rho))
    r2 = math.floor(radius * radius)
    bound = math.isqrt(r2)

    def scan(first):
        cand, w, err = _slab_widths(first, bound, r2, dim, mids, errs)
        if not len(cand):
            return cand, w, err, 0
        # keep only candidates that could still beat this slab's best upper end
        keep = w - err <= (w + err).min()
        return cand[keep], w[keep], err[keep], len(cand)

    firsts = range(0, bound + 1)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(scan, firsts))
    else:
        parts = [scan(f) for f in firsts]
    checked = sum(p[3] for p in parts)
    cand = np.vstack([p[0] for p in parts if len(p[0])])
    w = np.concatenate([p[1] for p in parts])
    err = np.concatenate([p[2] for p in parts])

    # anything whose enclosure cannot reach the smallest upper end is not minimal
    cutoff = (w + err).min()
    close = np.nonzero(w - err <= cutoff)[0]
    best = None
    minimizers = []
    for idx in close:
        c = tuple(int(t) for t in cand[idx])
        val = directional_width(poly, c)
        if best is None or val < best:
            best, minimizers = val, [c]
        elif val == best:
            minimizers.append(c)
    minimizers.sort()
    return WidthReport(
        value=best,
        direction=minimizers[0],
        enumeration_radius=radius,
        inradius_bound=rho,
        candidates_checked=checked,
        minimizers=tuple(minimizers),
        exact_evaluations=int(len(close)),
        upper_bound=upper,
        upper_direction=seed,
    )


# ---------------------------------------------------------------------------
# closed-form bounds for the large-width family


def alpha_formula(params):
    """Width lower bound of the family and the simplified bound ``2d - sqrt(8d+8) + 3``."""
    d, delta = params.d, params.delta
    p = delta ** d
    num = d * p * delta * delta - p * delta - (d + 1) * p + delta + 1
    alpha = num / ((delta - 1) * (p * delta - 1))
    floor_exact = floor_bound_exact(d)
    return BoundPair(alpha=alpha, floor_bound=floor_exact.to_interval(64), floor_exact=floor_exact)


def floor_bound_exact(d):
    return 2 * d + 3 - adjoin_sqrt(8 * d + 8)


def width_bound_certified(params, precision=64):
    """True once certified enclosures separate ``alpha`` above the simplified bound.

    Precision doubles until the enclosures are disjoint; returns the final
    ``(lower end of alpha, upper end of the bound, bits)``.
    """
    pair = alpha_formula(params)
    bits = precision
    while bits <= 1 << 16:
        a_iv = pair.alpha.to_interval(bits)
        f_iv = pair.floor_exact.to_interval(bits)
        if a_iv.lower > f_iv.upper:
            return True, (a_iv.lower, f_iv.upper, bits)
        if a_iv.upper < f_iv.lower:
            return False, (a_iv.upper, f_iv.lower, bits)
        bits *= 2
    raise ArithmeticError("could not separate alpha from the bound")


# ---------------------------------------------------------------------------
# floating-point lattice width (optimizer support)


def short_vectors(gram, bound):
    """Nonzero integer ``c`` with ``c^T gram c <= bound`` (Fincke-Pohst), one per +-c."""
    gram = np.asarray(gram, dtype=float)
    d = len(gram)
    upper = np.linalg.cholesky(gram).T
    out = []
    c = np.zeros(d, dtype=np.int64)
    tol = 1e-9 * max(1.0, bound)

    def rec(k, rem):
        s = upper[k, k + 1:] @ c[k + 1:]
        r = math.sqrt(max(rem, 0.0)) / upper[k, k]
        centre = -s / upper[k, k]
        for ck in range(math.ceil(centre - r - 1e-9), math.floor(centre + r + 1e-9) + 1):
            c[k] = ck
            val = (upper[k, k] * ck + s) ** 2
            if val > rem + tol:
                continue
            if k == 0:
                nz = np.flatnonzero(c)
                if len(nz) and c[nz[0]] > 0:
                    out.append(c.copy())
            else:
                rec(k - 1, rem - val)
        c[k] = 0

    rec(d - 1, float(bound))
    return np.array(out, dtype=np.int64).reshape(-1, d)


def pair_rms_bound(d, width):
    """Bound on ``c^T S c`` for directions of width at most ``width``."""
    return d * width**2 / (2 * (d + 1)) * (1 + 1e-9)


def numeric_lattice_width(vertices, upper=None):
    """Floating-point lattice width of a simplex given as a ``(d+1, d)`` array.

    The width along ``c`` is the largest ``|<c, v_j - v_k>|``, which is at least
    the root mean square over all vertex pairs, ``sqrt(2 (d+1) / d * c^T S c)``
    with ``S`` the vertex covariance.  Every ``c`` that could beat ``upper``
    therefore lies in an ellipsoid, enumerated by Fincke-Pohst.
    Returns ``(width, direction, n_candidates)``.
    """
    v = np.asarray(vertices, dtype=float)
    d = v.shape[1]
    if upper is None:
        upper = float(v[:, 0].max() - v[:, 0].min())
    g = v.mean(axis=0)
    cov = (v - g).T @ (v - g) / (d + 1)
    cand = short_vectors(cov, pair_rms_bound(d, upper))
    if not len(cand):
        e1 = np.eye(d, dtype=np.int64)[:1]
        cand = e1
    proj = cand @ v.T
    w = proj.max(axis=1) - proj.min(axis=1)
    i = int(np.argmin(w))
    return float(w[i]), tuple(int(t) for t in cand[i]), len(cand)
