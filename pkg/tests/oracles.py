"""Independent reference computations used by the tests.

Nothing here imports the package's exact machinery: values come from mpmath at
high precision or from plain brute force, so agreement is a real cross-check.
"""

import itertools
import math

import numpy as np
from mpmath import mp

DPS = 60


def delta(d):
    with mp.workdps(DPS):
        return 1 / (1 - mp.sqrt(mp.mpf(2) / (d + 1)))


def family_vertex(d):
    """Solve the circulant system for a_i = delta^(i-1) - 1 with mpmath LU."""
    with mp.workdps(DPS):
        dl = delta(d)
        a = [dl**i - 1 for i in range(d + 1)]
        n = d + 1
        m = mp.matrix(n, n)
        rhs = mp.matrix(n, 1)
        for j in range(n):
            m[0, j] = 1
        rhs[0] = 1
        for k in range(1, n):
            for j in range(n):
                m[k, j] = a[(k + j) % n]
            rhs[k] = a[-1]
        v = mp.lu_solve(m, rhs)
        return [v[i] for i in range(n)], a


def alpha(d):
    """Width of the family simplex along e_1: v_1 - v_{d+1}."""
    v, _ = family_vertex(d)
    with mp.workdps(DPS):
        return v[0] - v[-1]


def float_width(vertices, c):
    proj = np.asarray(vertices, dtype=float) @ np.asarray(c, dtype=float)
    return float(proj.max() - proj.min())


def brute_lattice_width(vertices, box):
    """Min width over every integer direction with entries in [-box, box]."""
    v = np.asarray(vertices, dtype=float)
    d = v.shape[1]
    best = math.inf
    for c in itertools.product(range(-box, box + 1), repeat=d):
        if any(c):
            best = min(best, float_width(v, c))
    return best


def interior_points(vertices, tol=1e-9):
    """Integer points with all barycentric coordinates > tol (float check)."""
    v = np.asarray(vertices, dtype=float)
    d = v.shape[1]
    lo = np.floor(v.min(axis=0)).astype(int)
    hi = np.ceil(v.max(axis=0)).astype(int)
    base = v[0]
    edges = (v[1:] - base).T
    inv = np.linalg.inv(edges)
    pts = np.array(list(itertools.product(*[range(l, h + 1) for l, h in zip(lo, hi)])), dtype=float)
    lam = (pts - base) @ inv.T
    bary = np.hstack([1 - lam.sum(axis=1, keepdims=True), lam])
    return [tuple(int(round(x)) for x in p) for p in pts[(bary > tol).all(axis=1)]]
