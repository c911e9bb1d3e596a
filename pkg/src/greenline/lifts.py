"""Rational maps as homogeneous lifts: resultants, iteration, normalization.

A lift ``F = (F0, F1)`` is stored through its dehomogenized rows
``F0(1, z)`` and ``F1(1, z)`` together with the common homogeneous degree
``d``; the map it induces is ``z -> F1(1, z) / F0(1, z)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import sympy
from sympy.parsing.sympy_parser import (
    convert_xor,
    implicit_multiplication_application,
    parse_expr,
    rationalize,
    standard_transformations,
)

from .fields import INF, ComplexField, PAdicField, is_inf
from .measures import CINF, DiscreteMeasure
from .poly import Poly, sylvester_resultant

__all__ = [
    "HomogeneousLift",
    "RationalMap",
    "RootFindingError",
    "compose",
    "fixed_point_divisor",
    "identity_lift",
    "normalize_lift",
    "parse_map",
    "rational_roots",
    "res_f",
    "complex_roots",
]


class RootFindingError(RuntimeError):
    pass


@dataclass(frozen=True)
class HomogeneousLift:
    F0: Poly
    F1: Poly
    d: int
    field: object

    def __post_init__(self):
        if self.F0.is_zero() or self.F1.is_zero():
            raise ValueError("a lift cannot have a zero component")
        if max(self.F0.degree, self.F1.degree) > self.d:
            raise ValueError("component degree exceeds the homogeneous degree")
        if self.d < 1:
            raise ValueError("homogeneous degree must be positive")
        if max(self.F0.degree, self.F1.degree) < self.d and self.d > 0:
            # p0 divides both forms: F^{-1}(0) != {0}
            raise ValueError("degenerate lift: p0 divides both forms")

    @property
    def d0(self) -> int:
        return self.F0.degree

    @property
    def d1(self) -> int:
        return self.F1.degree

    @property
    def c0(self):
        return self.F0.lc

    @property
    def c1(self):
        return self.F1.lc

    def scaled(self, c) -> HomogeneousLift:
        return HomogeneousLift(self.F0.scale(c), self.F1.scale(c), self.d, self.field)

    def __call__(self, p0, p1):
        """Evaluate the homogeneous pair at ``(p0, p1)``."""
        out = []
        for row in (self.F0, self.F1):
            acc = 0
            for k in range(self.d + 1):
                a = row[k]
                if a != 0:
                    acc += a * p0 ** (self.d - k) * p1 ** k
            out.append(acc)
        return tuple(out)


def identity_lift(field) -> HomogeneousLift:
    one = Fraction(1) if not field.is_archimedean else 1 + 0j
    return HomogeneousLift(Poly([one]), Poly([0 * one, one]), 1, field)


def res_f(F: HomogeneousLift):
    """Homogeneous resultant ``c0^(d-d1) * c1^(d-d0) * R(F0(1,.), F1(1,.))``."""
    r = sylvester_resultant(F.F0, F.F1)
    return F.c0 ** (F.d - F.d1) * F.c1 ** (F.d - F.d0) * r


def compose(F: HomogeneousLift, G: HomogeneousLift) -> HomogeneousLift:
    """The lift ``F o G`` of degree ``F.d * G.d``."""
    g0, g1 = G.F0, G.F1
    g0pows = [Poly([1])]
    g1pows = [Poly([1])]
    for _ in range(F.d):
        g0pows.append(g0pows[-1] * g0)
        g1pows.append(g1pows[-1] * g1)
    rows = []
    for row in (F.F0, F.F1):
        acc = Poly()
        for k in range(F.d + 1):
            a = row[k]
            if a != 0:
                acc = acc + (g0pows[F.d - k] * g1pows[k]).scale(a)
        rows.append(acc)
    return HomogeneousLift(rows[0], rows[1], F.d * G.d, F.field)


def iterate(F: HomogeneousLift, n: int) -> HomogeneousLift:
    if n == 0:
        return identity_lift(F.field)
    out = F
    for _ in range(n - 1):
        out = compose(F, out)
    return out


def green_offset(F: HomogeneousLift):
    """``V_{g_F} = -log|Res F| / (d (d-1))``.

    Returned as a float over C and as an exact ``Fraction`` in units of
    ``log p`` over Q_p.
    """
    if F.d < 2:
        raise ValueError("energy offset needs degree > 1")
    absres = F.field.abs(res_f(F))
    if F.field.is_archimedean:
        return -absres.log() / (F.d * (F.d - 1))
    return -absres.log_p() / (F.d * (F.d - 1))


def normalize_lift(F: HomogeneousLift):
    """Rescale ``F`` so that ``|Res F| = 1`` when the field allows it.

    Returns ``(lift, offset)`` where ``offset`` is ``V_{g_F}`` of the input
    lift.  Over Q_p with ``|Res F| = p^-k`` a rescaling by ``p^(-k/(2d))``
    exists only when ``2d | k``; otherwise ``F`` comes back unchanged and the
    offset must be carried analytically.
    """
    offset = green_offset(F)
    absres = F.field.abs(res_f(F))
    if F.field.is_archimedean:
        c = absres.value ** (-1.0 / (2 * F.d))
        return F.scaled(c), offset
    k = absres.v
    e = Fraction(k) / (2 * F.d)
    if e.denominator == 1:
        return F.scaled(Fraction(F.field.p) ** (-int(e))), offset
    return F, offset


# ----------------------------------------------------------------- roots


def complex_roots(P: Poly, tol: float = 1e-10) -> np.ndarray:
    """Companion-matrix roots with one guarded Newton polish step."""
    P = P.to_complex()
    if P.degree < 1:
        return np.empty(0, dtype=complex)
    coeffs = np.array(P.coeffs[::-1], dtype=complex)
    r = np.roots(coeffs)
    dcoeffs = np.polyder(coeffs)
    val = np.polyval(coeffs, r)
    der = np.polyval(dcoeffs, r)
    with np.errstate(divide="ignore", invalid="ignore"):
        cand = r - val / der
    ok = np.isfinite(cand)
    better = ok & (np.abs(np.polyval(coeffs, np.where(ok, cand, r))) < np.abs(val))
    r = np.where(better, cand, r)
    scale = np.polyval(np.abs(coeffs), np.abs(r))
    resid = np.abs(np.polyval(coeffs, r)) / np.where(scale > 0, scale, 1.0)
    if np.any(resid > tol * max(1, P.degree)) or not np.all(np.isfinite(r)):
        raise RootFindingError(f"root finder residual {resid.max():.3g} exceeds {tol:g}")
    return r


def rational_roots(P: Poly) -> list:
    """Rational roots of an exact polynomial, with multiplicity."""
    if P.degree < 1:
        return []
    x = sympy.Symbol("x")
    sp = sympy.Poly([sympy.Rational(c.numerator, c.denominator) for c in P.coeffs[::-1]], x, domain="QQ")
    out = []
    for root, mult in sp.ground_roots().items():
        out.extend([Fraction(int(root.p), int(root.q))] * mult)
    return out


def fixed_point_divisor(F: HomogeneousLift, n: int, k: int = 0) -> DiscreteMeasure:
    """The divisor ``[f^n = f^k]`` including its part at infinity."""
    if not (n >= 1 and 0 <= k < n):
        raise ValueError("need n >= 1 and 0 <= k < n")
    Fn, Fk = iterate(F, n), iterate(F, k)
    H = Fn.F1 * Fk.F0 - Fk.F1 * Fn.F0
    total = F.d ** n + F.d ** k
    at_inf = total - max(H.degree, 0)
    if F.field.is_archimedean:
        roots = complex_roots(H)
        pts = np.concatenate([roots, np.full(at_inf, CINF)])
        return DiscreteMeasure(pts, np.ones(len(pts)))
    roots = rational_roots(H)
    if len(roots) != H.degree:
        raise RootFindingError("divisor has roots outside Q")
    return DiscreteMeasure(list(roots) + [INF] * at_inf, [1] * (len(roots) + at_inf)).merged()


# ---------------------------------------------------------------- maps


@dataclass(frozen=True)
class RationalMap:
    """A rational map given by one of its lifts."""

    lift: HomogeneousLift

    @classmethod
    def from_polys(cls, P: Poly, Q: Poly, field) -> RationalMap:
        """``f = P / Q``; a common factor is cancelled for exact input."""
        P = _coerce_poly(P, field)
        Q = _coerce_poly(Q, field)
        if not field.is_archimedean:
            g = P.gcd(Q)
            if g.degree > 0:
                P = P.divmod(g)[0]
                Q = Q.divmod(g)[0]
        d = max(P.degree, Q.degree)
        F = HomogeneousLift(Q, P, d, field)
        if field.is_archimedean:
            if abs(res_f(F)) == 0:
                raise ValueError("numerator and denominator share a root")
        elif res_f(F) == 0:
            raise ValueError("numerator and denominator share a root")
        return cls(F)

    @classmethod
    def parse(cls, text: str, field) -> RationalMap:
        P, Q = parse_map(text, field)
        return cls.from_polys(P, Q, field)

    @property
    def field(self):
        return self.lift.field

    @property
    def d(self) -> int:
        return self.lift.d

    @property
    def numerator(self) -> Poly:
        return self.lift.F1

    @property
    def denominator(self) -> Poly:
        return self.lift.F0

    @property
    def is_polynomial(self) -> bool:
        return self.lift.d0 == 0

    @property
    def fixes_infinity(self) -> bool:
        return self.lift.d1 > self.lift.d0

    @property
    def offset(self):
        """``V_{g_F}`` of the stored lift."""
        return green_offset(self.lift)

    def normalized(self) -> RationalMap:
        return RationalMap(normalize_lift(self.lift)[0])

    def __call__(self, z):
        if is_inf(z):
            if self.lift.d1 > self.lift.d0:
                return INF
            if self.lift.d1 < self.lift.d0:
                return 0 * self.lift.c0
            return self.lift.c1 / self.lift.c0
        den = self.denominator(z)
        if den == 0:
            return INF
        return self.numerator(z) / den

    def compose(self, other: RationalMap) -> RationalMap:
        return RationalMap(compose(self.lift, other.lift))

    def iterate(self, n: int) -> RationalMap:
        return RationalMap(iterate(self.lift, n))

    def conjugate(self, m: RationalMap) -> RationalMap:
        """``m o f o m^-1`` for a Moebius map ``m``."""
        return m.compose(self).compose(m.inverse())

    def inverse(self) -> RationalMap:
        if self.d != 1:
            raise ValueError("only Moebius maps are inverted")
        # (a z + b) / (c z + dd)  ->  (dd z - b) / (-c z + a)
        b, a = self.numerator[0], self.numerator[1]
        dd, c = self.denominator[0], self.denominator[1]
        F = HomogeneousLift(Poly([a, -c]), Poly([-b, dd]), 1, self.field)
        return RationalMap(F)

    def derivative_at(self, z):
        P, Q = self.numerator, self.denominator
        return (P.derivative()(z) * Q(z) - P(z) * Q.derivative()(z)) / Q(z) ** 2

    def describe(self) -> str:
        """``(P)/(Q)`` with ``Q`` made monic."""
        P, Q = self.numerator, self.denominator
        P, Q = P.scale(1 / Q.lc), Q.scale(1 / Q.lc)
        if Q.degree == 0 and Q[0] == 1:
            return _fmt_poly(P)
        return f"({_fmt_poly(P)})/({_fmt_poly(Q)})"


def moebius(a, b, c, d, field) -> RationalMap:
    """``z -> (a z + b) / (c z + d)``."""
    co = field.coerce
    F = HomogeneousLift(Poly([co(d), co(c)]), Poly([co(b), co(a)]), 1, field)
    if F.F0.is_zero() or co(a) * co(d) - co(b) * co(c) == 0:
        raise ValueError("singular Moebius map")
    return RationalMap(F)


def _fmt_coeff(c):
    """``(sign, magnitude text)`` for one coefficient."""
    if isinstance(c, complex):
        if c.imag == 0:
            c = c.real
        elif c.real == 0:
            mag = "I" if abs(c.imag) == 1 else f"{abs(c.imag):.12g}*I"
            return ("-" if c.imag < 0 else "+"), mag
        else:
            return "+", f"({c.real:.12g}{c.imag:+.12g}*I)"
    if c < 0:
        return "-", _fmt_real(-c)
    return "+", _fmt_real(c)


def _fmt_real(x):
    if isinstance(x, Fraction):
        return str(x) if x.denominator == 1 else f"({x})"
    x = float(x)
    return str(int(x)) if x.is_integer() and abs(x) < 1e15 else f"{x:.12g}"


def _fmt_poly(P: Poly) -> str:
    out = ""
    for k in range(P.degree, -1, -1):
        c = P[k]
        if c == 0:
            continue
        sign, mag = _fmt_coeff(c)
        zpart = "" if k == 0 else "z" if k == 1 else f"z^{k}"
        if zpart:
            term = zpart if mag == "1" else f"{mag}*{zpart}"
        else:
            term = mag
        if not out:
            out = term if sign == "+" else f"-{term}"
        else:
            out += f" {sign} {term}"
    return out or "0"


def _coerce_poly(P, field) -> Poly:
    if not isinstance(P, Poly):
        P = Poly(P)
    return Poly([field.coerce(c) for c in P.coeffs])


_TRANSFORMS = standard_transformations + (implicit_multiplication_application, convert_xor, rationalize)
_Z = sympy.Symbol("z")


def parse_map(text: str, field):
    """Parse ``f = P(z)/Q(z)`` into ``(P, Q)``.

    Literals are integers, fractions or decimals (read exactly); ``^`` and
    ``**`` are powers; ``I`` is the imaginary unit (complex field only).
    """
    s = text.strip()
    if "=" in s:
        lhs, s = s.split("=", 1)
        if lhs.strip() not in ("f", "f(z)", "phi", "g"):
            raise ValueError(f"unexpected left-hand side {lhs!r}")
    try:
        expr = parse_expr(s, local_dict={"z": _Z, "I": sympy.I}, transformations=_TRANSFORMS)
    except (SyntaxError, TypeError, sympy.SympifyError) as exc:
        raise ValueError(f"cannot parse map {text!r}: {exc}") from None
    if expr.free_symbols - {_Z}:
        raise ValueError(f"unknown symbols {expr.free_symbols - {_Z}} in {text!r}")
    num, den = sympy.fraction(sympy.together(sympy.expand(expr)))
    out = []
    for part in (num, den):
        poly = sympy.Poly(sympy.expand(part), _Z)
        coeffs = poly.all_coeffs()[::-1]
        out.append(Poly([_to_scalar(c, field) for c in coeffs]))
    return out[0], out[1]


def _to_scalar(c, field):
    c = sympy.nsimplify(c) if c.is_Float else c
    if c.is_Rational:
        return field.coerce(Fraction(int(c.p), int(c.q)))
    if not field.is_archimedean:
        raise ValueError(f"coefficient {c} is not rational")
    return complex(c.evalf(17))
