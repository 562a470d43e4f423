"""The circulant simplex family living in the hyperplane ``<1, x> = 1``.

For a vector ``a`` of length ``d+1`` the simplex is

    {x : sum(x) = 1, <shift(a, i), x> <= a[-1] for i = 0..d}

and its vertices are the cyclic shifts of a single vector ``v``.  With
``a_i = delta**(i-1) - 1`` and ``delta = 1/(1 - sqrt(2/(d+1)))`` this is the
large-width lattice-free family; ``v`` then has a closed form.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .linalg import dot, solve_exact
from .scalar import FieldScalar, adjoin_sqrt, as_scalar

__all__ = [
    "AVector",
    "Params",
    "ProjectedPolytope",
    "SimplexSpec",
    "build_a",
    "build_simplex",
    "circulant_matrix",
    "cyclic_shift",
    "facet_values",
    "lift_point",
    "make_params",
    "project",
    "solve_circulant",
    "solve_circulant_numeric",
    "vertex_closed_form",
]


@dataclass(frozen=True)
class Params:
    d: int
    delta: FieldScalar
    radicand: int


@dataclass(frozen=True)
class AVector:
    """Facet-normal generator ``a``.

    ``normalization`` records which scaling is in force: ``"power"`` for
    ``a_i = delta**(i-1) - 1`` (so ``a[-1] = delta**d - 1``), ``"unit"`` for
    ``a[0] = 0, a[-1] = 1``, or ``None`` for anything else.  The simplex only
    depends on the affine class of ``a``, so both describe the same body.
    Entries are exact scalars, or plain floats when any input is a float.
    """

    entries: tuple
    normalization: str | None = None

    def __post_init__(self):
        entries = tuple(self.entries)
        if any(isinstance(x, float) for x in entries):
            entries = tuple(float(x) for x in entries)  # numeric a, e.g. from a discretization
        else:
            entries = tuple(as_scalar(x) for x in entries)
        object.__setattr__(self, "entries", entries)

    @property
    def exact(self):
        return not isinstance(self.entries[0], float)

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def __iter__(self):
        return iter(self.entries)

    @property
    def d(self):
        return len(self.entries) - 1

    def is_monotone(self, strict=False):
        pairs = zip(self.entries, self.entries[1:])
        if strict:
            return all(x < y for x, y in pairs)
        return all(x <= y for x, y in pairs)

    def normalized(self):
        lo, hi = self.entries[0], self.entries[-1]
        span = hi - lo
        if span == 0:
            raise ValueError("a[0] == a[-1]; the unit normalization is undefined")
        return AVector(tuple((x - lo) / span for x in self.entries), "unit")


@dataclass(frozen=True)
class SimplexSpec:
    params: Params | None
    a: AVector
    vertices: tuple

    @property
    def d(self):
        return self.a.d


@dataclass(frozen=True)
class ProjectedPolytope:
    """Vertex list in R^dim; the object whose lattice width gets measured."""

    dim: int
    vertices: tuple

    def __post_init__(self):
        verts = tuple(tuple(as_scalar(x) for x in v) for v in self.vertices)
        if any(len(v) != self.dim for v in verts):
            raise ValueError("vertex dimension does not match dim")
        object.__setattr__(self, "vertices", verts)

    def centroid(self):
        n = len(self.vertices)
        return tuple(sum(col, FieldScalar(0)) / n for col in zip(*self.vertices))

    def translate(self, t):
        return ProjectedPolytope(self.dim, [tuple(x + s for x, s in zip(v, t)) for v in self.vertices])

    def transform(self, matrix):
        """Image under the linear map ``x -> matrix @ x``."""
        return ProjectedPolytope(self.dim, [tuple(dot(row, v) for row in matrix) for v in self.vertices])


def make_params(d):
    if not isinstance(d, int) or d < 2:
        raise ValueError(f"dimension must be an integer >= 2, got {d!r}")
    root = adjoin_sqrt(Fraction(2, d + 1))
    delta = 1 / (1 - root)
    return Params(d=d, delta=delta, radicand=2 * (d + 1))


def build_a(params):
    """``a_i = delta**(i-1) - 1`` via ``a_{i+1} = delta * a_i + (delta - 1)``."""
    delta = params.delta
    step = delta - 1
    entries = [FieldScalar(0)]
    for _ in range(params.d):
        entries.append(delta * entries[-1] + step)
    return AVector(tuple(entries), "power")


def cyclic_shift(x, i):
    """Move every entry ``i`` positions to the right, wrapping around."""
    x = tuple(x)
    n = len(x)
    if not n:
        return x
    i %= n
    return x[n - i:] + x[: n - i]


def vertex_closed_form(params):
    d, delta = params.d, params.delta
    p = [FieldScalar(1)]
    for _ in range(d + 2):
        p.append(p[-1] * delta)
    den = (delta - 1) * (p[d + 1] - 1)
    v1 = (1 - d * p[d] + (d - 2) * p[d + 1] + p[d + 2]) / den
    v2 = (delta - 1) * p[d] / (p[d + 1] - 1)
    vlast = (-delta + p[d] + (d - 1) * p[d + 1] - (d - 1) * p[d + 2]) / den
    return (v1,) + (v2,) * (d - 1) + (vlast,)


def circulant_matrix(a):
    """All-ones first row, then row ``k`` is ``a`` rotated left by ``k``."""
    a = tuple(a)
    n = len(a)
    rows = [tuple(FieldScalar(1) for _ in range(n))]
    for k in range(1, n):
        rows.append(tuple(a[(k + j) % n] for j in range(n)))
    return rows


def solve_circulant(a, rhs="facet"):
    """Exact vertex ``v`` of the circulant simplex generated by ``a``.

    ``rhs="facet"`` solves ``<1, v> = 1`` and ``<row_k, v> = a[-1]``, which is
    invariant under affine rescaling of ``a``.  ``rhs="ones"`` uses an all-ones
    right-hand side, which agrees with ``"facet"`` when ``a[-1] == 1``.
    Raises :class:`~latfree.linalg.SingularMatrixError` for singular systems.
    """
    entries = tuple(a)
    n = len(entries)
    if rhs == "facet":
        b = [FieldScalar(1)] + [as_scalar(entries[-1])] * (n - 1)
    elif rhs == "ones":
        b = [FieldScalar(1)] * n
    else:
        raise ValueError(f"unknown right-hand side convention {rhs!r}")
    return tuple(solve_exact(circulant_matrix(entries), b))


def solve_circulant_numeric(a):
    """Floating-point counterpart of :func:`solve_circulant` (``"facet"`` convention)."""
    import numpy as np

    a = np.asarray(a, dtype=float)
    n = len(a)
    idx = (np.arange(1, n)[:, None] + np.arange(n)[None, :]) % n
    m = np.vstack([np.ones(n), a[idx]])
    rhs = np.full(n, a[-1])
    rhs[0] = 1.0
    return np.linalg.solve(m, rhs)


def facet_values(a, x):
    """``[<shift(a, i), x> for i = 0..d]``."""
    return [dot(cyclic_shift(a, i), x) for i in range(len(tuple(a)))]


def build_simplex(params, solver="closed_form"):
    a = build_a(params)
    if solver == "closed_form":
        v = vertex_closed_form(params)
    elif solver == "circulant":
        v = solve_circulant(a)
    else:
        raise ValueError(f"unknown solver {solver!r}")
    vertices = tuple(cyclic_shift(v, i) for i in range(params.d + 1))
    return SimplexSpec(params=params, a=a, vertices=vertices)


def project(simplex):
    """Drop the last coordinate of every vertex (accepts a SimplexSpec or a vertex list)."""
    vertices = simplex.vertices if hasattr(simplex, "vertices") else simplex
    vertices = tuple(vertices)
    dim = len(vertices[0]) - 1
    return ProjectedPolytope(dim, [v[:-1] for v in vertices])


def lift_point(x):
    """Lift a point of R^d to the hyperplane: append ``1 - sum(x)``."""
    x = tuple(x)
    return x + (1 - sum(x),)
