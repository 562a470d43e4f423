"""Explicit local maximizers in dimensions 4 and 5, and the a-vector optimizer.

The optimizer maximizes the lattice width of the circulant simplex generated
by ``a = (0, a_2, ..., a_d, 1)``.  The width of a fixed direction ``c`` is
``max_j <c, v^j> - min_k <c, v^j>`` over the shifted vertices ``v^j``, so the
objective is a min-max of smooth functions of ``a``.  A Nelder-Mead pass on
the free coordinates is followed by trust-region SQP on the epigraph form
``max t  s.t.  <c, v^j(a) - v^k(a)> >= t`` over the near-active directions, with
the direction set re-completed by short-vector enumeration after every step.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import minimize

from .certify import brute_force_interior_points, enumeration_certificate, latticefree_certificate, recover_a
from .construct import ProjectedPolytope, cyclic_shift, make_params, project
from .errors import ConvergenceError, VerificationError
from .scalar import FieldScalar, adjoin_sqrt, to_json
from .width import (
    alpha_formula,
    directional_width,
    lattice_width,
    numeric_lattice_width,
    pair_rms_bound,
    short_vectors,
)

__all__ = [
    "ExtremalSimplex",
    "ExtremalVerification",
    "OptimizationResult",
    "OptimizerConfig",
    "ProbeReport",
    "build_delta4",
    "build_delta5",
    "optimize_a",
    "perturbation_probe",
    "verify_extremal",
]


@dataclass(frozen=True)
class ExtremalSimplex:
    dim: int
    vertices: tuple
    claimed_width: FieldScalar

    @property
    def v(self):
        return self.vertices[0]

    def projected(self):
        return project(self.vertices)


def _checked(v, claimed):
    v = tuple(v)
    d = len(v) - 1
    if sum(v, FieldScalar(0)) != 1:
        raise VerificationError("coordinates do not sum to 1")
    vertices = tuple(cyclic_shift(v, i) for i in range(d + 1))
    for i in range(d + 1):
        for j in range(i):
            if all(x == y for x, y in zip(vertices[i], vertices[j])):
                raise VerificationError("cyclic shifts are not distinct", {"pair": [j, i]})
    return ExtremalSimplex(dim=d, vertices=vertices, claimed_width=claimed)


def build_delta4():
    r5 = adjoin_sqrt(5)
    s = adjoin_sqrt(5 - 2 * r5)
    t = adjoin_sqrt(5 + 2 * r5)
    u = adjoin_sqrt(10 + 2 * r5)
    v2 = (-3 + 4 * r5 - 4 * s) / 5
    v = (
        (7 - 2 * r5 + 2 * u) / 5,
        v2,
        (7 - 4 * r5 + 6 * s) / 5,
        v2,
        (-3 - 2 * r5 - 2 * t) / 5,
    )
    claimed = 2 + 2 * adjoin_sqrt(1 + 2 / r5)
    return _checked(v, claimed)


def build_delta5():
    r3 = adjoin_sqrt(3)
    v2 = (4 * r3 - 5) / 3
    v3 = (27 - 11 * r3) / 18
    v = ((57 - 7 * r3) / 18, v2, v3, v3, v2, (-33 - 19 * r3) / 18)
    claimed = 5 + 2 / r3
    return _checked(v, claimed)


@dataclass(frozen=True)
class ExtremalVerification:
    width: object
    certificate: object
    enumeration: object
    a: object
    exact_match: bool
    interval_match_bits: int
    alpha: FieldScalar

    def to_json(self):
        return {
            "lattice_free": True,
            "certificate": self.certificate.to_json(),
            "enumeration": self.enumeration.to_json(),
            "a": [to_json(x) for x in self.a],
            "width": self.width.to_json(),
            "exact_match": self.exact_match,
            "interval_match_bits": self.interval_match_bits,
            "family_alpha": self.alpha.decimal(30),
        }


def verify_extremal(simplex, workers=1):
    """Certify lattice-freeness and the claimed lattice width of an extremal simplex.

    Raises :class:`VerificationError` with a mismatch report on failure.
    """
    poly = simplex.projected()
    a = recover_a(simplex.vertices)
    cert = latticefree_certificate(a)
    if cert is None:
        raise VerificationError("recovered a is not monotone", {"a": [x.decimal(20) for x in a]})
    enum = enumeration_certificate(poly, workers=workers)
    if enum.payload["interior_points"]:
        raise VerificationError("interior lattice points found", {"points": enum.payload["interior_points"]})
    report = lattice_width(poly, workers=workers)
    claimed = simplex.claimed_width
    w_iv = report.value.to_interval(60)
    c_iv = claimed.to_interval(60)
    overlap = w_iv.lower <= c_iv.upper and c_iv.lower <= w_iv.upper
    exact = report.value == claimed
    if not (exact and overlap):
        raise VerificationError(
            "lattice width differs from the claimed value",
            {"computed": report.value.decimal(30), "claimed": claimed.decimal(30), "direction": report.direction},
        )
    alpha = alpha_formula(make_params(simplex.dim)).alpha
    return ExtremalVerification(report, cert, enum, a, exact, 60, alpha)


# ---------------------------------------------------------------------------
# optimizer


@dataclass
class OptimizerConfig:
    start: list | None = None  # full a (length d+1); default: the power family
    tolerance: float = 1e-13
    max_rounds: int = 200
    nelder_mead_iters: int = 4000
    trust_radius: float = 0.05
    active_margin: float = 0.3
    seed: int = 0
    start_jitter: float = 0.0

    @classmethod
    def from_json(cls, text):
        data = json.loads(text) if isinstance(text, str) else dict(text)
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown optimizer settings: {sorted(unknown)}")
        return cls(**data)

    def to_json(self):
        return asdict(self)


@dataclass
class OptimizationResult:
    d: int
    a_star: np.ndarray
    objective: float  # numeric lattice width at a_star
    gap: float  # v_1 - v_{d+1} re-solved at a_star
    monotone: bool
    residual: float
    direction: tuple
    trace: list = field(default_factory=list)

    @property
    def lam(self):
        return self.gap / (2 * self.d)

    def to_json(self):
        return {
            "d": self.d,
            "a_star": [float(x) for x in self.a_star],
            "objective": self.objective,
            "gap_v1_minus_vlast": self.gap,
            "lambda": self.lam,
            "monotone": self.monotone,
            "linear_solve_residual": self.residual,
            "minimizing_direction": list(self.direction),
            "trace": self.trace,
        }


MONOTONE_TOL = 1e-9


class _Circulant:
    """Numeric circulant system for a fixed dimension."""

    def __init__(self, d):
        self.d = d
        n = self.n = d + 1
        k = np.arange(1, n)[:, None]
        j = np.arange(n)[None, :]
        self.index = (k + j) % n  # row k, column j -> entry of a
        # shift(v, s)[m] = v[(m - s) % n]
        self.roll = (np.arange(n)[None, :] - np.arange(n)[:, None]) % n

    def matrix(self, a):
        m = np.empty((self.n, self.n))
        m[0] = 1.0
        m[1:] = a[self.index]
        return m

    def solve(self, a):
        m = self.matrix(a)
        rhs = np.ones(self.n)
        rhs[1:] = a[-1]
        v = np.linalg.solve(m, rhs)
        if not np.all(np.isfinite(v)) or np.linalg.cond(m) > 1e12:
            raise np.linalg.LinAlgError("ill-conditioned circulant system")
        return v, m, rhs

    def solve_with_jacobian(self, a):
        v, m, rhs = self.solve(a)
        jac = np.empty((self.n, self.d - 1))
        for col, entry in enumerate(range(1, self.d)):
            dm = np.zeros((self.n, self.n))
            dm[1:][self.index == entry] = 1.0
            jac[:, col] = -np.linalg.solve(m, dm @ v)
        return v, jac

    def vertices(self, v):
        return v[self.roll]  # row s is shift(v, s)


def _full_a(free):
    return np.concatenate([[0.0], free, [1.0]])


def _power_start(d):
    delta = 1 / (1 - math.sqrt(2 / (d + 1)))
    a = delta ** np.arange(d + 1) - 1
    return a / a[-1]


def _initial_directions(d):
    grid = np.array(np.meshgrid(*[[-1, 0, 1]] * d, indexing="ij")).reshape(d, -1).T
    nz = grid != 0
    has = nz.any(axis=1)
    grid = grid[has]
    lead = grid[np.arange(len(grid)), nz[has].argmax(axis=1)]
    return grid[lead > 0]


def _widths(sys, a, dirs):
    v, _, _ = sys.solve(a)
    proj = dirs @ sys.vertices(v)[:, :-1].T
    return proj.max(axis=1) - proj.min(axis=1), proj


def _true_width(sys, a, dirs=None):
    v, _, _ = sys.solve(a)
    verts = sys.vertices(v)[:, :-1]
    upper = None
    if dirs is not None:
        proj = dirs @ verts.T
        upper = float((proj.max(axis=1) - proj.min(axis=1)).min()) * (1 + 1e-9)
    return numeric_lattice_width(verts, upper)


def _merge_dirs(dirs, new):
    if not len(new):
        return dirs
    return np.unique(np.vstack([dirs, np.asarray(new).reshape(-1, dirs.shape[1])]), axis=0)


def _short_dirs(sys, a, bound):
    """Integer directions (one per +-c) with numeric width <= bound."""
    v, _, _ = sys.solve(a)
    verts = sys.vertices(v)[:, :-1]
    d = verts.shape[1]
    g = verts.mean(axis=0)
    cov = (verts - g).T @ (verts - g) / (d + 1)
    cand = short_vectors(cov, pair_rms_bound(d, bound))
    if not len(cand):
        return cand
    proj = cand @ verts.T
    w = proj.max(axis=1) - proj.min(axis=1)
    return cand[w <= bound]


def _sqp_step(sys, a, dirs, radius, margin):
    """One trust-region SQP step on the epigraph of the min-max objective."""
    d = sys.d
    w, proj = _widths(sys, a, dirs)
    f = w.min()
    act = np.flatnonzero(w <= f + margin)
    cmat = dirs[act].astype(float)
    hi = proj[act].argmax(axis=1)
    lo = proj[act].argmin(axis=1)
    roll = sys.roll

    def cons(x):
        v, _, _ = sys.solve(_full_a(x[:-1]))
        verts = v[roll][:, :-1]
        return np.einsum("ij,ij->i", cmat, verts[hi] - verts[lo]) - x[-1]

    def cjac(x):
        v, jac = sys.solve_with_jacobian(_full_a(x[:-1]))
        jv = jac[roll][:, :-1, :]  # (vertex, coord, param)
        g = np.einsum("ij,ijk->ik", cmat, jv[hi] - jv[lo])
        return np.hstack([g, -np.ones((len(act), 1))])

    x0 = np.concatenate([a[1:-1], [f]])
    bounds = [(x - radius, x + radius) for x in a[1:-1]] + [(None, None)]
    res = minimize(
        lambda x: -x[-1],
        x0,
        jac=lambda x: np.concatenate([np.zeros(d - 1), [-1.0]]),
        constraints=[{"type": "ineq", "fun": cons, "jac": cjac}],
        bounds=bounds,
        method="SLSQP",
        options={"ftol": 1e-16, "maxiter": 500},
    )
    x = np.clip(res.x[:-1], a[1:-1] - radius, a[1:-1] + radius)
    return _full_a(x), res.x[-1]


def optimize_a(d, config=None):
    """Locally maximize the lattice width over ``a`` with ``a[0] = 0, a[-1] = 1``.

    Starts from the power family unless ``config.start`` is given; raises
    :class:`ConvergenceError` (carrying the trace and best iterate) when the
    round budget runs out.  Steps are accepted only if the complete numeric
    lattice width increases, so the result is never below the start value.
    No lattice-freeness constraint is imposed: from ``d = 7`` on the ascent
    leaves the lattice-free region and the result is not lattice-free.
    """
    if d < 2:
        raise ValueError("dimension must be >= 2")
    config = config or OptimizerConfig()
    sys = _Circulant(d)
    a = np.asarray(config.start, dtype=float) if config.start is not None else _power_start(d)
    if a.shape != (d + 1,):
        raise ValueError(f"start must have length {d + 1}")
    a = (a - a[0]) / (a[-1] - a[0])
    if config.start_jitter:
        rng = np.random.default_rng(config.seed)
        a[1:-1] += rng.uniform(-config.start_jitter, config.start_jitter, d - 1)
    trace = []

    f, _, _ = _true_width(sys, a)
    dirs = _merge_dirs(_initial_directions(d), _short_dirs(sys, a, f + config.active_margin))
    trace.append({"stage": "start", "objective": f})

    if d > 2 and config.nelder_mead_iters:

        def neg(x):
            try:
                w, _ = _widths(sys, _full_a(x), dirs)
            except np.linalg.LinAlgError:
                return math.inf  # singular iterate: rejected, the simplex shrinks
            return -w.min()

        res = minimize(
            neg,
            a[1:-1],
            method="Nelder-Mead",
            options={"maxiter": config.nelder_mead_iters, "xatol": 1e-10, "fatol": 1e-12},
        )
        cand = _full_a(res.x)
        try:
            fc, _, _ = _true_width(sys, cand, dirs)
        except np.linalg.LinAlgError:
            fc = -math.inf
        if fc > f:
            a, f = cand, fc
            dirs = _merge_dirs(dirs, _short_dirs(sys, a, f + config.active_margin))
        trace.append({"stage": "nelder-mead", "objective": f, "evaluations": int(res.nfev)})

    radius = config.trust_radius
    converged = False
    for rnd in range(config.max_rounds):
        try:
            cand, predicted = _sqp_step(sys, a, dirs, radius, config.active_margin)
            fc, _, _ = _true_width(sys, cand, dirs)
        except np.linalg.LinAlgError:
            radius /= 4
            trace.append({"stage": "sqp", "round": rnd, "rejected": "singular", "radius": radius})
            if radius < config.tolerance:
                converged = True
                break
            continue
        dirs = _merge_dirs(dirs, _short_dirs(sys, cand, fc + config.active_margin))
        step = float(np.max(np.abs(cand - a)))
        stalled = predicted - f <= config.tolerance * max(1.0, abs(f))
        if fc > f:
            a, f = cand, fc
            radius = min(2 * radius, config.trust_radius)
            trace.append({"stage": "sqp", "round": rnd, "objective": f, "step": step, "directions": len(dirs)})
        else:
            radius = min(radius, step) / 4
            trace.append({"stage": "sqp", "round": rnd, "rejected": "no ascent", "radius": radius})
        if stalled or step < config.tolerance or radius < config.tolerance:
            converged = True
            break
    best = {"a": [float(x) for x in a], "objective": f}
    if not converged:
        raise ConvergenceError(f"optimizer did not converge in {config.max_rounds} rounds", trace, best)

    v, m, rhs = sys.solve(a)
    width, direction, _ = _true_width(sys, a, dirs)
    return OptimizationResult(
        d=d,
        a_star=a,
        objective=width,
        gap=float(v[0] - v[-1]),
        monotone=bool(np.all(np.diff(a) >= -MONOTONE_TOL)),
        residual=float(np.max(np.abs(m @ v - rhs))),
        direction=direction,
        trace=trace,
    )


# ---------------------------------------------------------------------------
# perturbation probe


@dataclass
class ProbeReport:
    epsilon: float
    samples: int
    seed: int
    lattice_free: int
    wider: int
    violations: int
    records: list

    def to_json(self):
        return asdict(self)


def _probe_sample(args):
    verts_json, claimed_json, directions, eps, seed, index, denom, full = args
    from .scalar import from_json

    rng = np.random.default_rng([seed, index])
    verts = [[from_json(x) for x in v] for v in verts_json]
    claimed = from_json(claimed_json)
    d = len(verts[0])
    noise = rng.integers(-denom, denom + 1, size=(len(verts), d))
    pert = [[x + eps * Fraction(int(k), denom) for x, k in zip(v, row)] for v, row in zip(verts, noise)]
    poly = ProjectedPolytope(d, pert)
    free = not brute_force_interior_points(poly)
    # width along the original minimizers bounds the new lattice width from above
    upper = min((directional_width(poly, c) for c in directions), key=lambda w: w)
    record = {"index": index, "lattice_free": free, "upper_bound": upper.decimal(20)}
    if full or upper > claimed:
        width = lattice_width(poly).value
        record.update(wider=width > claimed, width_check="full enumeration", width=width.decimal(20))
    else:
        record.update(wider=False, width_check="minimizer upper bound")
    return record


def perturbation_probe(simplex, epsilon, samples, seed, workers=1, denom=10**6, full_width=False):
    """Randomly move each vertex coordinate by at most ``epsilon`` and look for
    perturbed simplices that are still lattice-free but wider.

    A statistical sanity check of local maximality, not a proof.  With
    ``full_width`` every sample gets its exact lattice width; otherwise the
    width along the original minimizing directions settles most samples.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    eps = Fraction(epsilon).limit_denominator(10**12)
    poly = simplex.projected()
    base = lattice_width(poly)
    verts_json = [[to_json(x) for x in v] for v in poly.vertices]
    jobs = [
        (verts_json, to_json(simplex.claimed_width), base.minimizers, eps, seed, i, denom, full_width)
        for i in range(samples)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_probe_sample, jobs))
    else:
        records = [_probe_sample(j) for j in jobs]
    free = sum(r["lattice_free"] for r in records)
    wider = sum(r["wider"] for r in records)
    violations = sum(r["lattice_free"] and r["wider"] for r in records)
    return ProbeReport(float(epsilon), samples, seed, free, wider, violations, records)
