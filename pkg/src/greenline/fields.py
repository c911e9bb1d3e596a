"""Valued fields: the complex numbers and the rationals inside Q_p.

Every other module works with a *field object* (``ComplexField()`` or
``PAdicField(p)``) and with plain Python scalars: ``complex`` for the former
and ``fractions.Fraction`` for the latter.  Non-archimedean absolute values
are kept exact as ``p**(-v)`` with a rational exponent ``v``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np

__all__ = [
    "INF",
    "Absolute",
    "ComplexField",
    "PAdicField",
    "valuation",
    "as_fraction",
    "chordal",
    "is_inf",
    "make_field",
]

ARCH_RTOL = 1e-9


class _Infinity:
    """The point at infinity of the projective line."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "inf"

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()


def is_inf(z) -> bool:
    if z is INF:
        return True
    if isinstance(z, (complex, float, np.complexfloating, np.floating)):
        return bool(np.isinf(z.real) or np.isinf(z.imag))
    return False


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot use {x!r} as an exact rational")


def _vp_int(n: int, p: int) -> int:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def valuation(x, p: int):
    """p-adic valuation of a rational; ``math.inf`` for zero."""
    x = as_fraction(x)
    if x == 0:
        return math.inf
    return _vp_int(x.numerator, p) - _vp_int(x.denominator, p)


@dataclass(frozen=True)
class Absolute:
    """An absolute value.

    Archimedean values carry a float in ``value``.  Non-archimedean values
    carry the exponent ``v`` of ``p**(-v)``; ``v = inf`` is zero and
    ``v = -inf`` is the formal value ``+infinity`` (used by the Hsia kernel
    with respect to a classical point).
    """

    p: int | None
    v: Fraction | float = 0
    value: float = 0.0

    @classmethod
    def archimedean(cls, value: float) -> Absolute:
        return cls(None, 0, float(value))

    @classmethod
    def padic(cls, p: int, v) -> Absolute:
        if not (isinstance(v, float) and math.isinf(v)):
            v = as_fraction(v)
        return cls(p, v, 0.0)

    @property
    def is_archimedean(self) -> bool:
        return self.p is None

    def is_zero(self) -> bool:
        if self.p is None:
            return self.value == 0.0
        return self.v == math.inf

    def _check(self, other: Absolute):
        if self.p != other.p:
            raise ValueError("absolute values from different fields")

    def __mul__(self, other: Absolute) -> Absolute:
        self._check(other)
        if self.p is None:
            return Absolute.archimedean(self.value * other.value)
        if {self.v, other.v} == {math.inf, -math.inf}:
            raise ZeroDivisionError("0 * infinity")
        return Absolute.padic(self.p, self.v + other.v)

    def __truediv__(self, other: Absolute) -> Absolute:
        self._check(other)
        if self.p is None:
            return Absolute.archimedean(self.value / other.value)
        if other.v == math.inf:
            if self.v == math.inf:
                raise ZeroDivisionError("0 / 0")
            return Absolute.padic(self.p, -math.inf)
        return Absolute.padic(self.p, self.v - other.v)

    def __pow__(self, k) -> Absolute:
        if self.p is None:
            return Absolute.archimedean(self.value ** k)
        if k == 0:
            return Absolute.padic(self.p, 0)
        return Absolute.padic(self.p, self.v * k)

    def _key(self):
        # larger key == larger absolute value
        return self.value if self.p is None else -self.v

    def __lt__(self, other):
        self._check(other)
        return self._key() < other._key()

    def __le__(self, other):
        self._check(other)
        return self._key() <= other._key()

    def __gt__(self, other):
        self._check(other)
        return self._key() > other._key()

    def __ge__(self, other):
        self._check(other)
        return self._key() >= other._key()

    def __float__(self) -> float:
        if self.p is None:
            return self.value
        if self.v == math.inf:
            return 0.0
        if self.v == -math.inf:
            return math.inf
        return float(self.p) ** float(-self.v)

    def log_p(self):
        """log|x| in units of log p (exact); archimedean values refuse."""
        if self.p is None:
            raise TypeError("log_p is only defined for non-archimedean values")
        return -self.v

    def log(self) -> float:
        if self.p is None:
            return math.log(self.value) if self.value > 0 else -math.inf
        if self.v == math.inf:
            return -math.inf
        if self.v == -math.inf:
            return math.inf
        return float(-self.v) * math.log(self.p)

    def __repr__(self):
        if self.p is None:
            return f"|{self.value:g}|"
        if self.v == math.inf:
            return f"0_{self.p}"
        return f"{self.p}^({-self.v})"


def amax(*values: Absolute) -> Absolute:
    return max(values, key=lambda a: a._key())


class ComplexField:
    """The archimedean field C with complex doubles."""

    is_archimedean = True
    p = None

    def coerce(self, x) -> complex:
        if isinstance(x, Fraction):
            return complex(float(x))
        return complex(x)

    def abs(self, x) -> Absolute:
        return Absolute.archimedean(abs(complex(x)))

    def norm(self, p0, p1) -> Absolute:
        return Absolute.archimedean(math.hypot(abs(p0), abs(p1)))

    def is_zero(self, x) -> bool:
        return x == 0

    def __eq__(self, other):
        return isinstance(other, ComplexField)

    def __hash__(self):
        return hash("C")

    def __repr__(self):
        return "ComplexField()"


@dataclass(frozen=True)
class PAdicField:
    """Q viewed inside Q_p; scalars are exact ``Fraction`` values."""

    p: int
    is_archimedean = False

    def __post_init__(self):
        if self.p < 2 or any(self.p % q == 0 for q in range(2, int(self.p ** 0.5) + 1)):
            raise ValueError(f"{self.p} is not prime")

    def coerce(self, x) -> Fraction:
        return as_fraction(x)

    def abs(self, x) -> Absolute:
        return Absolute.padic(self.p, valuation(x, self.p))

    def norm(self, p0, p1) -> Absolute:
        return amax(self.abs(p0), self.abs(p1))

    def is_zero(self, x) -> bool:
        return x == 0


def make_field(spec: str | int | None):
    """``"complex"`` / ``None`` -> C; ``"p-adic:3"``, ``"3"``, ``3`` -> Q_3."""
    if spec is None:
        return ComplexField()
    if isinstance(spec, int):
        return PAdicField(spec)
    s = str(spec).strip().lower()
    if s in ("c", "complex", "archimedean"):
        return ComplexField()
    for prefix in ("p-adic", "padic", "q_", "qp"):
        if s.startswith(prefix):
            s = s[len(prefix):].lstrip(":(= ").rstrip(")")
            break
    return PAdicField(int(s))


def _homog(z):
    return (0, 1) if is_inf(z) else (1, z)


def chordal(z, w, field) -> Absolute:
    """Normalized chordal distance ``|p ^ q| / (|p| |q|)`` on P^1.

    Max-norm on K^2 for non-archimedean fields and the Euclidean norm for C.
    """
    p0, p1 = _homog(z)
    q0, q1 = _homog(w)
    if field.is_archimedean:
        p0, p1, q0, q1 = (complex(t) for t in (p0, p1, q0, q1))
    wedge = p0 * q1 - p1 * q0
    return field.abs(wedge) / (field.norm(p0, p1) * field.norm(q0, q1))
