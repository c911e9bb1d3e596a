"""Exact geometry of the Berkovich projective line over Q inside Q_p.

A point ``zeta(a, p^-v)`` is the sup-norm of the closed disk
``{x : |x - a| <= p^-v}``; ``v = inf`` gives the classical point ``a`` and
``INF`` stands for the classical point at infinity.  Every other point of
the line lives in the affine chart, so that is the only chart stored.
Distances and kernels come back as :class:`Absolute` values (exact exponents);
logarithms are rationals in units of ``log p``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction

from .fields import INF, Absolute, amax, as_fraction, is_inf, valuation
from .poly import Poly

__all__ = [
    "BerkPoint",
    "Disk",
    "NewtonPolygon",
    "DiskPreimage",
    "gauss",
    "hsia_infty",
    "hsia_can",
    "hsia",
    "point_norm",
    "order_and_join",
    "rho",
    "gauss_norm",
    "count_roots_in_disk",
    "polynomial_disk_preimage",
    "parse_point",
    "format_point",
]


def _canon_center(a: Fraction, v, p: int) -> Fraction:
    """The representative of ``a`` modulo ``{val >= v}`` with digits in 0..p-1."""
    if v == math.inf:
        return a
    n = math.ceil(v)
    k = valuation(a, p)
    if k >= n:
        return Fraction(0)
    u = a / Fraction(p) ** k
    mod = p ** (n - k)
    digits = u.numerator % mod * pow(u.denominator, -1, mod) % mod
    return Fraction(digits) * Fraction(p) ** k


def _exp(v):
    if isinstance(v, float):
        if math.isinf(v):
            return v
        raise TypeError("radius exponents must be exact")
    return as_fraction(v)


@dataclass(frozen=True)
class BerkPoint:
    """``zeta(center, p^-v)``; the center is stored in canonical form."""

    center: Fraction
    v: Fraction | float
    p: int

    def __post_init__(self):
        if is_inf(self.center):
            raise ValueError("use INF for the point at infinity")
        v = _exp(self.v)
        if v == -math.inf:
            raise ValueError("radius must be finite")
        a = as_fraction(self.center)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "center", _canon_center(a, v, self.p))

    @classmethod
    def classical(cls, a, p: int) -> BerkPoint:
        return cls(as_fraction(a), math.inf, p)

    @property
    def is_classical(self) -> bool:
        return self.v == math.inf

    @property
    def kind(self) -> str:
        """``I`` classical; ``II`` radius in ``|Q^*|``; ``III`` fractional exponent.

        Over C_p a fractional exponent is still in the value group; the
        label records that no rational scalar has that absolute value.
        """
        if self.is_classical:
            return "I"
        return "II" if Fraction(self.v).denominator == 1 else "III"

    @property
    def radius(self) -> Absolute:
        return Absolute.padic(self.p, self.v)

    def __repr__(self):
        return format_point(self)


def gauss(p: int) -> BerkPoint:
    return BerkPoint(Fraction(0), Fraction(0), p)


def _prime(*pts):
    ps = {s.p for s in pts if isinstance(s, BerkPoint)}
    if len(ps) > 1:
        raise ValueError("points over different primes")
    return ps.pop() if ps else None


def _val_diff(a: Fraction, b: Fraction, p: int):
    return valuation(a - b, p)


def _vdist(S: BerkPoint, T: BerkPoint):
    """Exponent of ``|S - T|_inf``: ``min(v_S, v_T, val(a_S - a_T))``."""
    return min(S.v, T.v, _val_diff(S.center, T.center, S.p))


def hsia_infty(S, T) -> Absolute:
    """``|S - T|_inf = max(r_S, r_T, |a_S - a_T|)`` for affine points."""
    if S is INF or T is INF:
        raise ValueError("|S - T|_inf needs both points in the affine chart")
    p = _prime(S, T)
    return Absolute.padic(p, _vdist(S, T))


def point_norm(S) -> Absolute:
    """``||S|| = max(1, |S|_inf)``; infinite at ``INF``."""
    if S is INF:
        raise ValueError("INF has no finite norm")
    return Absolute.padic(S.p, min(0, S.v, valuation(S.center, S.p)))


def hsia_can(S, T, p: int | None = None) -> Absolute:
    """``[S, T]_can = |S - T|_inf / (||S|| ||T||)``, with ``[S, INF] = 1/||S||``."""
    p = p or _prime(S, T)
    if p is None:
        raise ValueError("prime unknown for INF-only input")
    if S is INF and T is INF:
        return Absolute.padic(p, math.inf)
    if S is INF or T is INF:
        X = T if S is INF else S
        return Absolute.padic(p, -point_norm(X).v)
    return hsia_infty(S, T) / (point_norm(S) * point_norm(T))


def hsia(S, T, S0, p: int | None = None) -> Absolute:
    """Generalized Hsia kernel ``[S, T]_{S0}``.

    ``[S, T]_can / ([S, S0]_can [T, S0]_can)``, and ``1/[S0, S0]_can`` when
    either argument is ``S0`` (possibly infinite).
    """
    p = p or _prime(S, T, S0)
    if S0 is INF:
        if S is INF or T is INF:
            return Absolute.padic(p, -math.inf)
        return hsia_infty(S, T)
    if S == S0 or T == S0:
        return Absolute.padic(p, 0) / hsia_can(S0, S0, p)
    return hsia_can(S, T, p) / (hsia_can(S, S0, p) * hsia_can(T, S0, p))


def order_and_join(S: BerkPoint, T: BerkPoint):
    """``(relation, join)`` where relation is ``"equal"``, ``"S>=T"``,
    ``"T>=S"`` or ``"incomparable"`` (disk containment)."""
    if S is INF or T is INF:
        raise ValueError("order_and_join works in the affine chart")
    w = _val_diff(S.center, T.center, S.p)
    if S == T:
        return "equal", S
    if T.v >= S.v and w >= S.v:
        return "S>=T", S
    if S.v >= T.v and w >= T.v:
        return "T>=S", T
    return "incomparable", BerkPoint(S.center, min(S.v, T.v, w), S.p)


def rho(S: BerkPoint, T: BerkPoint) -> Fraction:
    """Path distance in the big model metric, in units of ``log p``."""
    if S is INF or T is INF or S.is_classical or T.is_classical:
        raise ValueError("classical points are at infinite distance")
    _, J = order_and_join(S, T)
    return (S.v - J.v) + (T.v - J.v)


# ------------------------------------------------------------ polynomials


def _coeff_vals(Q: Poly, p: int):
    return [valuation(c, p) if c != 0 else math.inf for c in Q.coeffs]


def gauss_norm(P: Poly, S) -> Absolute:
    """``|P(S)|_inf = max_k |b_k| r^k`` with ``P(z + a) = sum b_k z^k``."""
    if S is INF:
        raise ValueError("gauss_norm needs an affine point")
    if P.is_zero():
        return Absolute.padic(S.p, math.inf)
    Q = P.taylor_shift(S.center)
    if S.is_classical:
        return Absolute.padic(S.p, valuation(Q[0], S.p) if Q[0] != 0 else math.inf)
    best = min(vk + k * S.v for k, vk in enumerate(_coeff_vals(Q, S.p)))
    return Absolute.padic(S.p, best)


@dataclass(frozen=True)
class NewtonPolygon:
    """Lower convex hull of ``(k, val(b_k))`` over the nonzero coefficients."""

    vertices: tuple

    @classmethod
    def of(cls, P: Poly, p: int) -> NewtonPolygon:
        pts = [(k, Fraction(vk)) for k, vk in enumerate(_coeff_vals(P, p)) if vk != math.inf]
        hull = []
        for pt in pts:
            while len(hull) >= 2:
                (x1, y1), (x2, y2) = hull[-2], hull[-1]
                # drop hull[-1] unless it lies strictly below the chord
                if (y2 - y1) * (pt[0] - x1) >= (pt[1] - y1) * (x2 - x1):
                    hull.pop()
                else:
                    break
            hull.append(pt)
        return cls(tuple(hull))

    @property
    def segments(self):
        """``(slope, length)`` pairs, slopes strictly increasing."""
        out = []
        for (x1, y1), (x2, y2) in zip(self.vertices, self.vertices[1:]):
            out.append(((y2 - y1) / (x2 - x1), x2 - x1))
        return out

    @property
    def length(self) -> int:
        if not self.vertices:
            return 0
        return self.vertices[-1][0] - self.vertices[0][0]

    def root_valuations(self):
        """``{valuation: count}`` for the nonzero roots."""
        return {-s: n for s, n in self.segments}


def _root_valuations(P: Poly, a: Fraction, p: int):
    """Valuations of ``w - a`` over the roots ``w`` of ``P`` (with multiplicity)."""
    Q = P.taylor_shift(a)
    k0 = next(k for k, c in enumerate(Q.coeffs) if c != 0)
    vals = {math.inf: k0} if k0 else {}
    for s, n in NewtonPolygon.of(Q, p).segments:
        vals[-s] = vals.get(-s, 0) + n
    return vals


def count_roots_in_disk(P: Poly, S, strict: bool = False) -> int:
    """Roots ``w`` of ``P`` (with multiplicity) with ``|w - a| <= r``.

    A root of valuation ``u`` relative to the center lies in the disk iff
    ``u >= v``; a Newton polygon segment of slope ``s`` carries roots of
    valuation ``-s``.  ``strict`` counts the open disk ``|w - a| < r``.
    """
    if P.is_zero():
        raise ValueError("zero polynomial")
    if S is INF:
        raise ValueError("count_roots_in_disk needs an affine point")
    vals = _root_valuations(P, S.center, S.p)
    if strict:
        return sum(n for u, n in vals.items() if u > S.v)
    return sum(n for u, n in vals.items() if u >= S.v)


# ------------------------------------------------------------------ disks


@dataclass(frozen=True, eq=False)
class Disk:
    """``{|x - a| <= r}`` (``closed``) or ``{|x - a| < r}`` with ``r = p^-v``."""

    center: Fraction
    v: Fraction
    p: int
    closed: bool = True

    def __post_init__(self):
        object.__setattr__(self, "center", as_fraction(self.center))
        object.__setattr__(self, "v", _exp(self.v))

    @property
    def boundary(self) -> BerkPoint:
        return BerkPoint(self.center, self.v, self.p)

    def contains(self, x) -> bool:
        u = valuation(as_fraction(x) - self.center, self.p)
        return u >= self.v if self.closed else u > self.v

    def __eq__(self, other):
        if not isinstance(other, Disk):
            return NotImplemented
        return (self.p, self.v, self.closed) == (other.p, other.v, other.closed) and self.contains(other.center)

    def __hash__(self):
        return hash((self.p, self.v, self.closed))

    def __repr__(self):
        br = "closed" if self.closed else "open"
        return f"Disk({br}, {format_point(self.boundary)})"


@dataclass(frozen=True)
class DiskPreimage:
    components: tuple  # of (Disk, degree)
    complete: bool

    @property
    def total_degree(self) -> int:
        return sum(m for _, m in self.components)


def polynomial_disk_preimage(P: Poly, target: Disk, max_depth: int = 64) -> DiskPreimage:
    """Components of ``P^-1(target)`` with their mapping degrees.

    Each component is a disk of the same kind (open/closed) as the target.
    Root clusters of ``P - c`` are refined along residue directions
    ``b + t p^w``; clusters whose radius is not an integral power of ``p``
    or whose directions are not rational cannot be split inside Q and leave
    ``complete = False``.
    """
    p, c, V = target.p, target.center, target.v
    Q = P - c
    if Q.degree < 1:
        raise ValueError("P must be nonconstant")
    strict = not target.closed
    found: list = []
    complete = [True]

    def inside(val) -> bool:
        return val > V if strict else val >= V

    def record(disk, deg):
        for D, _ in found:
            if D == disk:
                return
        found.append((disk, deg))

    def explore(b: Fraction, w, open_region: bool, depth: int):
        vals = _root_valuations(Q, b, p)
        region = {u: n for u, n in vals.items() if (u > w if open_region else u >= w)}
        N = sum(region.values())
        if N == 0:
            return
        Qb = Q.taylor_shift(b)
        v0 = valuation(Qb[0], p) if Qb[0] != 0 else math.inf
        if inside(v0):
            sig = max((V - vk) / k for k, vk in enumerate(_coeff_vals(Qb, p)) if k >= 1 and vk != math.inf)
            deg = sum(n for u, n in vals.items() if (u > sig if strict else u >= sig))
            record(Disk(b, sig, p, closed=not strict), deg)
            # the component and the region are nested disks around b
            if deg >= N:
                return
        if depth >= max_depth:
            complete[0] = False
            return
        w1 = min(region)
        if w1 == math.inf:
            return
        if Fraction(w1).denominator != 1:
            complete[0] = False
            return
        step = Fraction(p) ** int(w1)
        seen = 0
        for t in range(p):
            bt = b + t * step
            sub = _root_valuations(Q, bt, p)
            cnt = sum(n for u, n in sub.items() if u > w1)
            if cnt:
                seen += cnt
                explore(bt, w1, True, depth + 1)
        if seen < N:
            complete[0] = False

    vals0 = _root_valuations(Q, Fraction(0), p)
    explore(Fraction(0), min(vals0), False, 0)
    comps = tuple(found)
    if sum(m for _, m in comps) != Q.degree:
        complete[0] = False
    return DiskPreimage(comps, complete[0])


# ---------------------------------------------------------------- notation

_POINT = re.compile(r"^\s*zeta\s*\(\s*([^,]+?)\s*,\s*(.+?)\s*\)\s*$", re.IGNORECASE)
_POWER = re.compile(r"^(\d+)\s*\^\s*\(?\s*([-+]?\d+(?:\s*/\s*\d+)?)\s*\)?$")


def _parse_radius(text: str, p: int):
    t = text.replace(" ", "")
    if t == "0":
        return math.inf
    m = _POWER.match(t)
    if m:
        if int(m.group(1)) != p:
            raise ValueError(f"radius base {m.group(1)} differs from p = {p}")
        return -Fraction(m.group(2).replace(" ", ""))
    r = Fraction(t)
    if r <= 0:
        raise ValueError("radius must be positive (or 0 for a classical point)")
    v = -valuation(r, p)
    if r != Fraction(p) ** (-v):
        raise ValueError(f"radius {t} is not a power of {p}; write {p}^(e) for fractional exponents")
    return Fraction(v)


def parse_point(text: str, p: int):
    """Parse ``inf``, ``gauss``, a rational ``a``, or ``zeta(a, p^-v)``."""
    s = text.strip()
    low = s.lower()
    if low in ("inf", "infinity", "oo"):
        return INF
    if low == "gauss":
        return gauss(p)
    m = _POINT.match(s)
    if m:
        return BerkPoint(Fraction(m.group(1).replace(" ", "")), _parse_radius(m.group(2), p), p)
    return BerkPoint.classical(Fraction(s.replace(" ", "")), p)


def _fmt_exp(e: Fraction) -> str:
    return str(e) if e.denominator == 1 and e >= 0 else f"({e})"


def format_point(S) -> str:
    if S is INF:
        return "inf"
    if S.is_classical:
        return f"zeta({S.center}, 0)"
    return f"zeta({S.center}, {S.p}^{_fmt_exp(-Fraction(S.v))})"
