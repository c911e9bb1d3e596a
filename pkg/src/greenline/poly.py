"""Univariate polynomials over a valued field, lowest degree first."""

from __future__ import annotations

from fractions import Fraction
from math import comb

import numpy as np
import sympy

__all__ = ["Poly", "sylvester_matrix", "sylvester_resultant"]


def _is_exact(c) -> bool:
    return isinstance(c, (int, Fraction))


class Poly:
    """Immutable polynomial ``sum(coeffs[k] * z**k)``.

    Coefficients are either all exact rationals or all complex numbers.
    Trailing zeros are stripped, so ``degree`` is the true degree (the zero
    polynomial has degree ``-1``).
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        cs = list(coeffs)
        if cs and all(_is_exact(c) for c in cs):
            cs = [Fraction(c) for c in cs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)

    @classmethod
    def const(cls, c):
        return cls([c])

    @classmethod
    def z(cls, exact=True):
        return cls([Fraction(0), Fraction(1)] if exact else [0j, 1 + 0j])

    @classmethod
    def from_roots(cls, roots, lead=1):
        p = cls([lead])
        for r in roots:
            p = p * cls([-r, 1])
        return p

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def lc(self):
        if not self.coeffs:
            raise ValueError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    @property
    def is_exact(self) -> bool:
        return all(isinstance(c, Fraction) for c in self.coeffs)

    def is_zero(self) -> bool:
        return not self.coeffs

    def __iter__(self):
        return iter(self.coeffs)

    def __getitem__(self, k):
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else 0

    def __len__(self):
        return len(self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, Poly):
            other = Poly([other])
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        if not self.coeffs:
            return "Poly(0)"
        terms = []
        for k, c in enumerate(self.coeffs):
            if c == 0:
                continue
            terms.append(f"{c}" if k == 0 else f"{c}*z^{k}" if k > 1 else f"{c}*z")
        return "Poly(" + " + ".join(terms) + ")"

    def _lift(self, other):
        return other if isinstance(other, Poly) else Poly([other])

    def __add__(self, other):
        other = self._lift(other)
        n = max(len(self), len(other))
        return Poly([self[k] + other[k] for k in range(n)])

    __radd__ = __add__

    def __neg__(self):
        return Poly([-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        other = self._lift(other)
        if not self.coeffs or not other.coeffs:
            return Poly()
        out = [0] * (len(self) + len(other) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power")
        result, base = Poly([1]), self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def compose(self, other: Poly) -> Poly:
        acc = Poly()
        for c in reversed(self.coeffs):
            acc = acc * other + c
        return acc

    def derivative(self) -> Poly:
        return Poly([k * c for k, c in enumerate(self.coeffs)][1:])

    def taylor_shift(self, a) -> Poly:
        """Coefficients of ``P(z + a)``."""
        n = len(self.coeffs)
        out = [0] * n
        for k, c in enumerate(self.coeffs):
            if c == 0:
                continue
            apow = 1
            for j in range(k, -1, -1):
                out[j] += c * comb(k, j) * apow
                apow = apow * a
        return Poly(out)

    def scale(self, c) -> Poly:
        return Poly([c * x for x in self.coeffs])

    def to_complex(self) -> Poly:
        return Poly([complex(float(c)) if isinstance(c, Fraction) else complex(c) for c in self.coeffs])

    def divmod(self, other: Poly):
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        q = [0] * max(len(rem) - len(other) + 1, 1)
        lc = other.lc
        while len(rem) >= len(other) and any(c != 0 for c in rem):
            shift = len(rem) - len(other)
            f = rem[-1] / lc
            q[shift] = f
            for i, c in enumerate(other.coeffs):
                rem[shift + i] -= f * c
            rem.pop()
            while rem and rem[-1] == 0:
                rem.pop()
        return Poly(q), Poly(rem)

    def gcd(self, other: Poly) -> Poly:
        """Monic gcd (exact coefficients only)."""
        a, b = self, other
        while not b.is_zero():
            a, b = b, a.divmod(b)[1]
        return a.scale(Fraction(1) / a.lc) if not a.is_zero() else a

    def homogeneous(self, d: int) -> list:
        """Coefficient vector of ``p0^d * P(p1/p0)`` by powers of p1, length d+1."""
        if self.degree > d:
            raise ValueError(f"degree {self.degree} exceeds homogeneous degree {d}")
        return [self[k] for k in range(d + 1)]


def sylvester_matrix(P: Poly, Q: Poly, m: int | None = None, n: int | None = None):
    """Sylvester matrix with P-rows first, coefficients highest degree first.

    ``m`` and ``n`` are the nominal degrees (default: actual degrees).
    """
    m = P.degree if m is None else m
    n = Q.degree if n is None else n
    m, n = max(m, 0), max(n, 0)
    size = m + n
    pc = [P[k] for k in range(m, -1, -1)]
    qc = [Q[k] for k in range(n, -1, -1)]
    rows = []
    for i in range(n):
        rows.append([0] * i + pc + [0] * (size - m - 1 - i))
    for i in range(m):
        rows.append([0] * i + qc + [0] * (size - n - 1 - i))
    return rows


def sylvester_resultant(P: Poly, Q: Poly, m: int | None = None, n: int | None = None):
    """Resultant R(P, Q) as the Sylvester determinant.

    Sign convention: P-rows first, so ``R(z - a, z - b) == a - b``.
    Exact for rational coefficients, ``numpy.linalg.det`` otherwise.
    """
    if P.is_zero() and Q.is_zero():
        raise ValueError("resultant of two zero polynomials")
    rows = sylvester_matrix(P, Q, m, n)
    if not rows:
        return Fraction(1) if (P.is_exact and Q.is_exact) else 1 + 0j
    if P.is_exact and Q.is_exact:
        M = sympy.Matrix([[sympy.Rational(c.numerator, c.denominator) if isinstance(c, Fraction)
                           else sympy.Integer(c) for c in row] for row in rows])
        det = M.det(method="bareiss")
        return Fraction(int(det.p), int(det.q))
    return complex(np.linalg.det(np.array(rows, dtype=complex)))
