"""Exact arithmetic in towers of real quadratic extensions of the rationals.

A value lives in a :class:`Tower` ``Q(sqrt r1)(sqrt r2)...`` and is stored as a
nested pair ``(a, b)`` meaning ``a + b*sqrt(r_k)`` with ``a`` and ``b`` one level
down; level 0 is a :class:`fractions.Fraction`.  Every adjoined radicand is
positive and certified non-square in the level below, so a value is zero iff all
of its rational leaves are zero, and signs can be decided exactly.

Values from different towers are combined by merging the towers: the second
tower's radicands are re-expressed in the first one and only those that are not
already squares there get adjoined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from threading import Lock

from mpmath import libmp, mp

__all__ = [
    "FieldScalar",
    "IntervalApprox",
    "Tower",
    "adjoin_sqrt",
    "as_scalar",
    "field_arith",
    "from_json",
    "mpf_to_fraction",
    "sign",
    "to_interval",
    "to_json",
]

_ZERO = Fraction(0)
_ONE = Fraction(1)


# ---------------------------------------------------------------------------
# nested representation helpers (pure functions on reps)


@lru_cache(maxsize=None)
def _zero(k):
    return _ZERO if k == 0 else (_zero(k - 1), _zero(k - 1))


def _const(q, k):
    x = q
    for level in range(k):
        x = (x, _zero(level))
    return x


def _pad(x, j, k):
    for level in range(j, k):
        x = (x, _zero(level))
    return x


def _is_zero(x):
    if type(x) is tuple:
        return _is_zero(x[0]) and _is_zero(x[1])
    return not x


def _add(x, y):
    if type(x) is tuple:
        return (_add(x[0], y[0]), _add(x[1], y[1]))
    return x + y


def _sub(x, y):
    if type(x) is tuple:
        return (_sub(x[0], y[0]), _sub(x[1], y[1]))
    return x - y


def _neg(x):
    if type(x) is tuple:
        return (_neg(x[0]), _neg(x[1]))
    return -x


def _scale(x, q):
    if type(x) is tuple:
        return (_scale(x[0], q), _scale(x[1], q))
    return x * q


def _mul(x, y, rads, k):
    if k == 0:
        return x * y
    a, b = x
    c, e = y
    k1 = k - 1
    bz = _is_zero(b)
    ez = _is_zero(e)
    if bz and ez:
        return (_mul(a, c, rads, k1), b)
    if bz:
        return (_mul(a, c, rads, k1), _mul(a, e, rads, k1))
    if ez:
        return (_mul(a, c, rads, k1), _mul(b, c, rads, k1))
    be_r = _mul(_mul(b, e, rads, k1), rads[k1], rads, k1)
    return (
        _add(_mul(a, c, rads, k1), be_r),
        _add(_mul(a, e, rads, k1), _mul(b, c, rads, k1)),
    )


def _norm(x, rads, k):
    """a^2 - b^2 r, the product of x with its conjugate (one level down)."""
    a, b = x
    k1 = k - 1
    return _sub(_mul(a, a, rads, k1), _mul(_mul(b, b, rads, k1), rads[k1], rads, k1))


def _inv(x, rads, k):
    if k == 0:
        if not x:
            raise ZeroDivisionError("division by zero in exact field")
        return 1 / x
    a, b = x
    if _is_zero(b):
        return (_inv(a, rads, k - 1), b)
    ni = _inv(_norm(x, rads, k), rads, k - 1)
    return (_mul(a, ni, rads, k - 1), _neg(_mul(b, ni, rads, k - 1)))


def _sign(x, rads, k):
    if k == 0:
        return (x > 0) - (x < 0)
    a, b = x
    sb = _sign(b, rads, k - 1)
    sa = _sign(a, rads, k - 1)
    if sb == 0 or sa == sb:
        return sa if sa else sb
    if sa == 0:
        return sb
    # opposite signs: compare a^2 with b^2 r
    return sa * _sign(_norm(x, rads, k), rads, k - 1)


def _fraction_sqrt(q):
    if q < 0:
        return None
    n, d = q.numerator, q.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def _sqrt(x, rads, k):
    """Non-negative square root of ``x`` inside the same field, or None.

    Complete for quadratic towers: ``a + b sqrt r`` (b != 0) is a square iff its
    norm is a square ``n`` and one of ``(a +- n)/2`` is a square ``p^2``; then the
    root is ``p + (b/2p) sqrt r``.  For b = 0 the root is ``sqrt a`` or
    ``sqrt(a/r) sqrt r``.
    """
    if k == 0:
        return _fraction_sqrt(x)
    if _sign(x, rads, k) < 0:
        return None
    a, b = x
    k1 = k - 1
    r = rads[k1]
    if _is_zero(b):
        s = _sqrt(a, rads, k1)
        if s is not None:
            return (s, b)
        s = _sqrt(_mul(a, _inv(r, rads, k1), rads, k1), rads, k1)
        if s is not None:
            return (_zero(k1), s)
        return None
    n = _sqrt(_norm(x, rads, k), rads, k1)
    if n is None:
        return None
    for cand in (_add(a, n), _sub(a, n)):
        p = _sqrt(_scale(cand, Fraction(1, 2)), rads, k1)
        if p is None or _is_zero(p):
            continue
        q = _mul(b, _inv(_scale(p, 2), rads, k1), rads, k1)
        root = (p, q)
        if _is_zero(_sub(_mul(root, root, rads, k), x)):
            return root if _sign(root, rads, k) >= 0 else _neg(root)
    return None


# ---------------------------------------------------------------------------
# towers


class Tower:
    """An interned tower of real quadratic extensions.

    ``radicands[k]`` is a rep at level ``k``.  Towers with equal radicand tuples
    are the same object, so identity doubles as equality.
    """

    __slots__ = ("radicands", "depth", "_parent", "_roots", "__weakref__")
    _registry: dict = {}
    _lock = Lock()

    def __new__(cls, radicands=()):
        radicands = tuple(radicands)
        with cls._lock:
            tower = cls._registry.get(radicands)
            if tower is None:
                tower = object.__new__(cls)
                tower.radicands = radicands
                tower.depth = len(radicands)
                tower._parent = None
                tower._roots = {}
                cls._registry[radicands] = tower
        return tower

    @property
    def parent(self):
        if self._parent is None and self.depth:
            self._parent = Tower(self.radicands[:-1])
        return self._parent

    def prefix(self, k):
        return Tower(self.radicands[:k])

    def extend(self, radicand):
        return Tower(self.radicands + (radicand,))

    def is_prefix_of(self, other):
        return self.depth <= other.depth and other.radicands[: self.depth] == self.radicands

    def root_intervals(self, prec):
        """Outward-rounded enclosures of sqrt(r_k) for every level."""
        roots = self._roots.get(prec)
        if roots is None:
            roots = []
            for k, r in enumerate(self.radicands):
                lo, hi = _rep_interval(r, self.radicands, k, tuple(roots), prec)
                if libmp.mpf_sign(lo) <= 0:
                    lo = libmp.fzero
                roots.append(
                    (libmp.mpf_sqrt(lo, prec, libmp.round_floor), libmp.mpf_sqrt(hi, prec, libmp.round_ceiling))
                )
            roots = tuple(roots)
            self._roots[prec] = roots
        return roots

    def __repr__(self):
        return f"Tower(depth={self.depth})"


Q = Tower(())


def _evaluate_into(x, level, gens, target):
    """Map a rep of some tower (at ``level``) into ``target`` given generator images."""
    if level == 0:
        return _const(x, target.depth)
    a = _evaluate_into(x[0], level - 1, gens, target)
    b = _evaluate_into(x[1], level - 1, gens, target)
    return _add(a, _mul(b, gens[level - 1], target.radicands, target.depth))


@lru_cache(maxsize=4096)
def _join(t1, t2):
    """Common tower of ``t1`` and ``t2`` plus embeddings of both into it."""
    if t2.is_prefix_of(t1):
        j = t2.depth
        return t1, None, lambda x: _pad(x, j, t1.depth)
    if t1.is_prefix_of(t2):
        j = t1.depth
        return t2, lambda x: _pad(x, j, t2.depth), None
    cur = t1
    gens = []
    for j, r in enumerate(t2.radicands):
        img = _evaluate_into(r, j, gens, cur)
        root = _sqrt(img, cur.radicands, cur.depth)
        if root is None:
            new = cur.extend(img)
            gens = [_pad(g, cur.depth, new.depth) for g in gens]
            cur = new
            root = (_zero(cur.depth - 1), _const(_ONE, cur.depth - 1))
        gens.append(root)
    final = cur
    gens = tuple(gens)
    n2 = t2.depth
    d1 = t1.depth
    return (
        final,
        lambda x: _pad(x, d1, final.depth),
        lambda x: _evaluate_into(x, n2, gens, final),
    )


# ---------------------------------------------------------------------------
# outward-rounded intervals on raw mpf tuples

_F = libmp.round_floor
_C = libmp.round_ceiling


def _frac_interval(q, prec):
    return (
        libmp.from_rational(q.numerator, q.denominator, prec, _F),
        libmp.from_rational(q.numerator, q.denominator, prec, _C),
    )


def _iv_add(x, y, prec):
    return libmp.mpf_add(x[0], y[0], prec, _F), libmp.mpf_add(x[1], y[1], prec, _C)


def _iv_mul(x, y, prec):
    los = [libmp.mpf_mul(p, q, prec, _F) for p in x for q in y]
    his = [libmp.mpf_mul(p, q, prec, _C) for p in x for q in y]
    lo = los[0]
    for v in los[1:]:
        if libmp.mpf_lt(v, lo):
            lo = v
    hi = his[0]
    for v in his[1:]:
        if libmp.mpf_gt(v, hi):
            hi = v
    return lo, hi


def _rep_interval(x, rads, k, roots, prec):
    if k == 0:
        return _frac_interval(x, prec)
    a = _rep_interval(x[0], rads, k - 1, roots, prec)
    b = _rep_interval(x[1], rads, k - 1, roots, prec)
    return _iv_add(a, _iv_mul(b, roots[k - 1], prec), prec)


@dataclass(frozen=True)
class IntervalApprox:
    """Certified enclosure ``lower <= value <= upper`` at ``precision`` bits."""

    lower: object
    upper: object
    precision: int

    @property
    def width(self):
        return mp.make_mpf(libmp.mpf_sub(self.upper._mpf_, self.lower._mpf_, 0))

    @property
    def mid(self):
        total = libmp.mpf_add(self.upper._mpf_, self.lower._mpf_, 0)
        return mp.make_mpf(libmp.mpf_shift(total, -1))

    def contains(self, value):
        value = mp.mpf(value)
        return self.lower <= value <= self.upper

    def sign(self):
        """Sign if the enclosure excludes zero (or is exactly zero), else None."""
        if self.lower > 0:
            return 1
        if self.upper < 0:
            return -1
        if self.lower == 0 and self.upper == 0:
            return 0
        return None


# ---------------------------------------------------------------------------
# the scalar type


def _squarefree_split(m):
    """m = s^2 * f with f free of small square factors (f may keep large ones)."""
    s = 1
    p = 2
    while p * p <= m and p < 5000:
        while m % (p * p) == 0:
            m //= p * p
            s *= p
        p += 1 if p == 2 else 2
    r = math.isqrt(m)
    if r * r == m:
        return s * r, 1
    return s, m


class FieldScalar:
    """An immutable exact real number in a quadratic tower over Q.

    Supports ``+ - * /``, integer powers, comparisons, ``sqrt`` and conversion to
    certified intervals.  Plain ``int`` and ``Fraction`` operands are promoted.
    """

    __slots__ = ("tower", "rep", "_sgn")

    def __init__(self, value=0):
        if isinstance(value, FieldScalar):
            self.tower, self.rep, self._sgn = value.tower, value.rep, value._sgn
            return
        if isinstance(value, str):
            value = Fraction(value)
        elif not isinstance(value, (int, Fraction)):
            raise TypeError(f"cannot build an exact scalar from {type(value).__name__}")
        self.tower = Q
        self.rep = Fraction(value)
        self._sgn = None

    @classmethod
    def _make(cls, tower, rep):
        while tower.depth and _is_zero(rep[1]):
            rep = rep[0]
            tower = tower.parent
        obj = object.__new__(cls)
        obj.tower = tower
        obj.rep = rep
        obj._sgn = None
        return obj

    # -- structure -------------------------------------------------------
    @property
    def depth(self):
        return self.tower.depth

    def is_rational(self):
        return self.tower.depth == 0

    def as_fraction(self):
        if self.tower.depth:
            raise ValueError("value is irrational")
        return self.rep

    def parts(self):
        """``(a, b, r)`` with ``self == a + b*sqrt(r)``; None for rationals."""
        if not self.tower.depth:
            return None
        t = self.tower.parent
        a, b = self.rep
        r = self.tower.radicands[-1]
        return FieldScalar._make(t, a), FieldScalar._make(t, b), FieldScalar._make(t, r)

    def is_zero(self):
        return _is_zero(self.rep)

    # -- arithmetic ------------------------------------------------------
    def _align(self, other):
        if self.tower is other.tower:
            return self.tower, self.rep, other.rep
        if other.tower.depth == 0:
            return self.tower, self.rep, _const(other.rep, self.tower.depth)
        if self.tower.depth == 0:
            return other.tower, _const(self.rep, other.tower.depth), other.rep
        t, e1, e2 = _join(self.tower, other.tower)
        x = self.rep if e1 is None else e1(self.rep)
        y = other.rep if e2 is None else e2(other.rep)
        return t, x, y

    def __add__(self, other):
        other = as_scalar(other, strict=False)
        if other is NotImplemented:
            return other
        t, x, y = self._align(other)
        return FieldScalar._make(t, _add(x, y))

    __radd__ = __add__

    def __sub__(self, other):
        other = as_scalar(other, strict=False)
        if other is NotImplemented:
            return other
        t, x, y = self._align(other)
        return FieldScalar._make(t, _sub(x, y))

    def __rsub__(self, other):
        other = as_scalar(other, strict=False)
        if other is NotImplemented:
            return other
        return other - self

    def __neg__(self):
        return FieldScalar._make(self.tower, _neg(self.rep))

    def __pos__(self):
        return self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return FieldScalar._make(self.tower, _scale(self.rep, Fraction(other)))
        other = as_scalar(other, strict=False)
        if other is NotImplemented:
            return other
        t, x, y = self._align(other)
        return FieldScalar._make(t, _mul(x, y, t.radicands, t.depth))

    __rmul__ = __mul__

    def inverse(self):
        return FieldScalar._make(self.tower, _inv(self.rep, self.tower.radicands, self.tower.depth))

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                raise ZeroDivisionError("division by zero in exact field")
            return FieldScalar._make(self.tower, _scale(self.rep, 1 / Fraction(other)))
        other = as_scalar(other, strict=False)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = as_scalar(other, strict=False)
        if other is NotImplemented:
            return other
        return other * self.inverse()

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result = FieldScalar(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __abs__(self):
        return -self if self.sign() < 0 else self

    # -- order -----------------------------------------------------------
    def sign(self):
        if self._sgn is None:
            self._sgn = _scalar_sign(self)
        return self._sgn

    def _cmp(self, other):
        other = as_scalar(other, strict=False)
        if other is NotImplemented:
            return None
        return (self - other).sign()

    def __eq__(self, other):
        s = self._cmp(other)
        return NotImplemented if s is None else s == 0

    def __ne__(self, other):
        s = self._cmp(other)
        return NotImplemented if s is None else s != 0

    def __lt__(self, other):
        s = self._cmp(other)
        return NotImplemented if s is None else s < 0

    def __le__(self, other):
        s = self._cmp(other)
        return NotImplemented if s is None else s <= 0

    def __gt__(self, other):
        s = self._cmp(other)
        return NotImplemented if s is None else s > 0

    def __ge__(self, other):
        s = self._cmp(other)
        return NotImplemented if s is None else s >= 0

    # equal values may sit in different towers, so no consistent hash exists
    __hash__ = None

    def __bool__(self):
        return not self.is_zero()

    # -- roots and numerics ---------------------------------------------
    def sqrt(self):
        return adjoin_sqrt(self)

    def to_interval(self, precision=53):
        return to_interval(self, precision)

    def __float__(self):
        if not self.tower.depth:
            return float(self.rep)
        return float(self.to_interval(60).mid)

    def decimal(self, digits=50):
        """Decimal rendering with ``digits`` significant digits."""
        bits = int(digits * 3.33) + 16
        with mp.workprec(bits):
            return mp.nstr(self.to_interval(bits).mid, digits, strip_zeros=False)

    def __str__(self):
        if not self.tower.depth:
            return str(self.rep)
        a, b, r = self.parts()
        return f"({a}) + ({b})*sqrt({r})"

    def __repr__(self):
        return f"FieldScalar({self})"

    def __reduce__(self):
        return (from_json, (to_json(self),))


def as_scalar(value, strict=True):
    if isinstance(value, FieldScalar):
        return value
    if isinstance(value, (int, Fraction)) and not isinstance(value, bool):
        return FieldScalar(value)
    if strict:
        raise TypeError(f"not an exact scalar: {value!r}")
    return NotImplemented


def _scalar_sign(x):
    t = x.tower
    if t.depth == 0:
        return (x.rep > 0) - (x.rep < 0)
    if _is_zero(x.rep):
        return 0
    if t.depth >= 2:
        # cheap enclosure first; exact recursion only when it straddles zero
        lo, hi = _rep_interval(x.rep, t.radicands, t.depth, t.root_intervals(64), 64)
        if libmp.mpf_sign(lo) > 0:
            return 1
        if libmp.mpf_sign(hi) < 0:
            return -1
    return _sign(x.rep, t.radicands, t.depth)


def sign(x):
    """Exact sign of ``x`` as -1, 0 or 1."""
    return as_scalar(x).sign()


def field_arith(x, y, op):
    """Apply ``op`` in {'add', 'sub', 'mul', 'div'} exactly."""
    x, y = as_scalar(x), as_scalar(y)
    if op == "add":
        return x + y
    if op == "sub":
        return x - y
    if op == "mul":
        return x * y
    if op == "div":
        if y.is_zero():
            raise ZeroDivisionError("division by zero in exact field")
        return x / y
    raise ValueError(f"unknown operation {op!r}")


def adjoin_sqrt(base):
    """Positive square root of ``base``, extending the tower only when needed."""
    base = as_scalar(base)
    if base.sign() <= 0:
        raise ValueError("square roots are only supported for positive values")
    t = base.tower
    if t.depth == 0:
        q = base.rep
        s, f = _squarefree_split(q.numerator * q.denominator)
        coeff = Fraction(s, q.denominator)
        if f == 1:
            return FieldScalar(coeff)
        gen = FieldScalar._make(Tower((Fraction(f),)), (_ZERO, _ONE))
        return gen * coeff
    root = _sqrt(base.rep, t.radicands, t.depth)
    if root is not None:
        return FieldScalar._make(t, root)
    new = t.extend(base.rep)
    return FieldScalar._make(new, (_zero(t.depth), _const(_ONE, t.depth)))


def to_interval(x, precision=53):
    """Certified enclosure of width at most ``2**(2 - precision) * max(1, |x|)``."""
    if precision < 16:
        raise ValueError("precision must be at least 16 bits")
    x = as_scalar(x)
    t = x.tower
    work = precision + 16
    while True:
        lo, hi = _rep_interval(x.rep, t.radicands, t.depth, t.root_intervals(work), work)
        lo_m, hi_m = mp.make_mpf(lo), mp.make_mpf(hi)
        scale = max(mp.mpf(1), abs(lo_m), abs(hi_m))
        if libmp.mpf_le(libmp.mpf_sub(hi, lo, 0), mp.ldexp(scale, 2 - precision)._mpf_):
            return IntervalApprox(lo_m, hi_m, precision)
        work *= 2


def mpf_to_fraction(x):
    """Exact value of an mpf as a Fraction."""
    raw = x._mpf_ if hasattr(x, "_mpf_") else libmp.from_float(float(x))
    return Fraction(*libmp.to_rational(raw))


# ---------------------------------------------------------------------------
# JSON encoding: rationals as "p/q", others as {"a": .., "b": .., "r": ..}


def to_json(x):
    x = as_scalar(x)
    if x.is_rational():
        q = x.rep
        return f"{q.numerator}/{q.denominator}"
    a, b, r = x.parts()
    return {"a": to_json(a), "b": to_json(b), "r": to_json(r)}


def from_json(obj):
    if isinstance(obj, str):
        return FieldScalar(Fraction(obj))
    if isinstance(obj, (int,)):
        return FieldScalar(obj)
    try:
        a, b, r = obj["a"], obj["b"], obj["r"]
    except (TypeError, KeyError) as exc:
        raise ValueError(f"malformed exact scalar encoding: {obj!r}") from exc
    return from_json(a) + from_json(b) * adjoin_sqrt(from_json(r))
