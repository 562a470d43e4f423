"""Continuous model of the circulant vertex system.

With ``y`` on ``[0, 1]`` standing in for ``a`` and ``omega`` for the vertex
profile, the vertex equations become

    lam * y'(t) = 1 - (C omega)(t) - (1 - int omega) * y(t),
    (C omega)(t) = int_0^1 y(t + s) omega(s) ds,   y(t) = y(t - 1) on (1, 2].

Integrating over ``t`` gives ``lam = 1 - int y``.  Exponential ``y`` with
constant ``omega`` solve it exactly.  Everything here is float64 on the uniform
grid ``t_i = i / n`` with composite-trapezoid quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .construct import AVector, make_params, solve_circulant_numeric

__all__ = [
    "ContinuumReport",
    "GridFunction",
    "closure_lambda",
    "continuum_report",
    "convolve",
    "discretize_to_a",
    "exponential_solution",
    "gamma_for_dimension",
    "integrated_lambda",
    "residual",
]


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples at ``t = 0, 1/n, ..., 1``."""

    samples: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=float)
        if arr.ndim != 1 or len(arr) < 2:
            raise ValueError("need at least two samples")
        if not np.all(np.isfinite(arr)):
            raise ValueError("samples must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    def __eq__(self, other):
        return isinstance(other, GridFunction) and np.array_equal(self.samples, other.samples)

    __hash__ = None

    @property
    def n(self):
        return len(self.samples) - 1

    @property
    def t(self):
        return np.linspace(0.0, 1.0, self.n + 1)

    @classmethod
    def from_callable(cls, f, n):
        return cls(f(np.linspace(0.0, 1.0, n + 1)))

    @classmethod
    def constant(cls, value, n):
        return cls(np.full(n + 1, float(value)))

    def integral(self):
        return float(np.trapezoid(self.samples, dx=1.0 / self.n))

    def derivative(self):
        """Second-order differences (central inside, one-sided at the ends)."""
        return np.gradient(self.samples, 1.0 / self.n, edge_order=2)

    def check_endpoints(self, tol=1e-12):
        if abs(self.samples[0]) > tol or abs(self.samples[-1] - 1) > tol:
            raise ValueError("y must satisfy y(0) = 0 and y(1) = 1")

    def to_json(self):
        return {"n": self.n, "samples": [float(x) for x in self.samples]}

    @classmethod
    def from_json(cls, data):
        g = cls(data["samples"])
        if g.n != data["n"]:
            raise ValueError("grid size does not match the sample count")
        return g


def _check_grids(y, omega):
    if y.n != omega.n:
        raise ValueError(f"grid mismatch: {y.n} vs {omega.n}")


def convolve(y, omega):
    """``(C omega)(t_i)`` for every grid point.

    At ``t_i`` the wrapped integrand jumps at ``s = 1 - t_i``, itself a grid
    node, so the integral splits into two smooth trapezoid sums.
    """
    _check_grids(y, omega)
    n = y.n
    ys, ws = y.samples, omega.samples
    h = 1.0 / n
    out = np.empty(n + 1)
    for i in range(n + 1):
        # s in [0, 1 - t_i]: y(t_i + s) = ys[i + j], omega = ws[j]
        head = np.trapezoid(ys[i:] * ws[: n - i + 1], dx=h) if i < n else 0.0
        # s in [1 - t_i, 1]: y(t_i + s - 1) = ys[j], omega = ws[n - i + j]
        tail = np.trapezoid(ys[: i + 1] * ws[n - i:], dx=h) if i > 0 else 0.0
        out[i] = head + tail
    return GridFunction(out)


def _equation_rhs(y, omega):
    return 1.0 - convolve(y, omega).samples - (1.0 - omega.integral()) * y.samples


def residual(y, omega, lam):
    """``sup_i |lam * y'(t_i) - (1 - (C omega)(t_i) - (1 - int omega) y(t_i))|``."""
    _check_grids(y, omega)
    return float(np.max(np.abs(lam * y.derivative() - _equation_rhs(y, omega))))


def integrated_lambda(y, omega):
    """Mean over ``t`` of the right-hand side; equals ``lam`` when the equation holds
    and ``y`` runs from 0 to 1."""
    rhs = _equation_rhs(y, omega)
    return float(np.trapezoid(rhs, dx=1.0 / y.n))


@dataclass(frozen=True)
class ContinuumReport:
    gamma: float
    n: int
    lam: float
    omega: float
    integral_y: float
    residual_sup: float

    def to_json(self):
        return {
            "gamma": self.gamma,
            "n": self.n,
            "lambda": self.lam,
            "omega": self.omega,
            "integral_y": self.integral_y,
            "one_minus_integral_y": 1.0 - self.integral_y,
            "residual_sup": self.residual_sup,
        }


def exponential_solution(gamma, n):
    """``y = (e^{gamma t} - 1) / (e^gamma - 1)`` with its constant ``omega`` and ``lam``.

    Since ``y' = gamma * (y + 1/(e^gamma - 1))`` and ``C omega = omega * int y``
    for constant ``omega``, matching the ``y`` terms gives
    ``omega = 1 + gamma * lam`` and the constant terms give ``lam = 1 - int y``,
    with ``int y = 1/gamma - 1/(e^gamma - 1)`` in closed form.
    ``gamma = 0`` (affine ``y``) is rejected.
    """
    if gamma == 0:
        raise ValueError("gamma must be nonzero; the gamma -> 0 limit y(t) = t is affine")
    if n < 2:
        raise ValueError("grid size must be at least 2")
    em1 = math.expm1(gamma)
    y = GridFunction(np.expm1(gamma * np.linspace(0.0, 1.0, n + 1)) / em1)
    integral = 1.0 / gamma - 1.0 / em1
    lam = 1.0 - integral
    omega = 1.0 + gamma * lam
    return y, omega, lam


def continuum_report(gamma, n):
    y, omega, lam = exponential_solution(gamma, n)
    res = residual(y, GridFunction.constant(omega, n), lam)
    return ContinuumReport(gamma, n, lam, omega, y.integral(), res)


def discretize_to_a(y, d):
    """``a_i = y((i - 1) / d)`` for ``i = 1..d+1``; needs ``d`` to divide the grid size."""
    if d < 1 or y.n % d:
        raise ValueError(f"grid size {y.n} is not a multiple of d = {d}")
    y.check_endpoints()
    step = y.n // d
    return AVector(tuple(float(x) for x in y.samples[::step]), "unit")


def closure_lambda(a):
    """``(v_1 - v_{d+1}) / (2d)`` for the circulant simplex of a float ``a``."""
    entries = np.asarray(a.entries if isinstance(a, AVector) else a, dtype=float)
    v = solve_circulant_numeric(entries)
    d = len(entries) - 1
    return float((v[0] - v[-1]) / (2 * d))


def gamma_for_dimension(d):
    """``d * ln(delta(d))``: the exponent whose discretization is the power family."""
    return d * math.log(float(make_params(d).delta))
