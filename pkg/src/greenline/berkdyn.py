"""Rational maps acting on the Berkovich line: images, local degrees,
pullbacks of point masses, and a search for (potentially) good reduction."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .berkovich import (
    BerkPoint,
    Disk,
    count_roots_in_disk,
    format_point,
    gauss,
    gauss_norm,
    order_and_join,
    polynomial_disk_preimage,
)
from .fields import INF, is_inf, valuation
from .lifts import RationalMap, moebius, rational_roots
from .measures import DiscreteMeasure
from .poly import Poly

__all__ = [
    "MappedPoint",
    "ReductionVerdict",
    "DescentFailure",
    "InexactBranch",
    "map_point",
    "pullback_point_mass",
    "detect_reduction",
    "berk_equilibrium_check",
    "invert_point",
]


class DescentFailure(RuntimeError):
    """The image could not be certified with rational data."""


class InexactBranch(RuntimeError):
    """A preimage needs points outside Q (or an unsupported branch)."""


@dataclass(frozen=True)
class MappedPoint:
    image: object
    local_degree: int
    method: str

    def __iter__(self):
        return iter((self.image, self.local_degree))


def _prime(f: RationalMap) -> int:
    if f.field.is_archimedean:
        raise ValueError("Berkovich dynamics needs a p-adic field")
    return f.field.p


def invert_point(S, p: int):
    """Image of a point under ``z -> 1/z``."""
    if S is INF:
        return BerkPoint.classical(0, p)
    if S.is_classical:
        return INF if S.center == 0 else BerkPoint.classical(1 / S.center, p)
    vb = valuation(S.center, p)
    if S.v > vb:  # 0 is outside the disk
        return BerkPoint(1 / S.center, S.v - 2 * vb, p)
    return BerkPoint(Fraction(0), -S.v, p)


def _affine_image(S, alpha: Fraction, beta: Fraction, p: int):
    """Image under ``z -> alpha z + beta``."""
    if S is INF:
        return INF
    v = S.v if S.is_classical else S.v + valuation(alpha, p)
    return BerkPoint(alpha * S.center + beta, v, p)


def _classical_degree(f: RationalMap, a) -> MappedPoint:
    p = _prime(f)
    P, Q = f.numerator, f.denominator
    if a is INF:
        img = f(INF)
        if is_inf(img):
            deg = f.lift.d1 - f.lift.d0
        else:
            deg = f.lift.d0 - (P - Q.scale(img)).degree
    else:
        img = f(a)
        if is_inf(img):
            deg = count_roots_in_disk(Q, BerkPoint.classical(a, p))
        else:
            deg = count_roots_in_disk(P - Q.scale(img), BerkPoint.classical(a, p))
    image = INF if is_inf(img) else BerkPoint.classical(img, p)
    return MappedPoint(image, deg, "classical")


def _polynomial_image(F: Poly, S: BerkPoint) -> MappedPoint:
    p = S.p
    b = F.taylor_shift(S.center)
    R = min(valuation(b[k], p) + k * S.v for k in range(1, b.degree + 1) if b[k] != 0)
    fa = b[0]
    deg = count_roots_in_disk(F - fa, S)
    return MappedPoint(BerkPoint(fa, R, p), deg, "exact-polynomial")


def _moebius_image(f: RationalMap, S) -> MappedPoint:
    p = _prime(f)
    beta, alpha = f.numerator[0], f.numerator[1]
    delta, gamma = f.denominator[0], f.denominator[1]
    if gamma == 0:
        return MappedPoint(_affine_image(S, alpha / delta, beta / delta, p), 1, "exact-moebius")
    # f = alpha/gamma - det / (gamma (gamma z + delta))
    det = alpha * delta - beta * gamma
    T = _affine_image(S, gamma, delta, p)
    T = invert_point(T, p)
    T = _affine_image(T, -det / gamma, alpha / gamma, p)
    return MappedPoint(T, 1, "exact-moebius")


def _pole_free(P: Poly, Q: Poly, S: BerkPoint) -> MappedPoint:
    c = P(S.center) / Q(S.center)
    H = P - Q.scale(c)
    if H.is_zero():
        raise ValueError("constant map")
    R = gauss_norm(H, S) / gauss_norm(Q, S)
    return MappedPoint(BerkPoint(c, R.v, S.p), count_roots_in_disk(H, S), "pole-free-disk")


def _reduce_mod_p(P: Poly, shift: int, p: int):
    """Coefficients of ``P / p^shift`` mod p, lowest first, as ints."""
    out = []
    for c in P.coeffs:
        x = c / Fraction(p) ** shift
        if valuation(x, p) > 0 or x == 0:
            out.append(0)
        else:
            out.append(x.numerator * pow(x.denominator, -1, p) % p)
    while out and out[-1] == 0:
        out.pop()
    return out


def _fp_divmod(a, b, p):
    a = list(a)
    q = [0] * max(len(a) - len(b) + 1, 1)
    inv = pow(b[-1], -1, p)
    while len(a) >= len(b) and a:
        k = len(a) - len(b)
        t = a[-1] * inv % p
        q[k] = t
        for i, c in enumerate(b):
            a[k + i] = (a[k + i] - t * c) % p
        while a and a[-1] == 0:
            a.pop()
    return q, a


def _fp_gcd(a, b, p):
    while b:
        a, b = b, _fp_divmod(a, b, p)[1]
    return a


def _descend(P: Poly, Q: Poly, S: BerkPoint, budget: int) -> MappedPoint:
    """Certify ``f(S)`` by reducing ``(f(a + p^v w) - c) / p^m`` mod p.

    A nonconstant reduction proves the image is ``zeta(c, p^-m)`` with local
    degree equal to the reduced degree; a constant reduction ``lambda``
    moves ``c`` to ``c + lambda p^m`` and the search continues.
    """
    p = S.p
    if S.is_classical or Fraction(S.v).denominator != 1:
        raise DescentFailure(f"descent needs an integral radius exponent at {format_point(S)}")
    v = int(S.v)
    lin = Poly([S.center, Fraction(p) ** v])
    Qs = Q.compose(lin)
    Ps = P.compose(lin)
    qa = Q(S.center)
    c = P(S.center) / qa if qa != 0 else Fraction(0)
    for _ in range(budget):
        H = P - Q.scale(c)
        m = (gauss_norm(H, S) / gauss_norm(Q, S)).v
        if Fraction(m).denominator != 1:
            raise DescentFailure(f"image radius exponent {m} is fractional")
        m = int(m)
        N = Ps - Qs.scale(c)
        D = Qs.scale(Fraction(p) ** m)
        nu = min(valuation(x, p) for x in N.coeffs + D.coeffs if x != 0)
        nb, db = _reduce_mod_p(N, nu, p), _reduce_mod_p(D, nu, p)
        g = _fp_gcd(nb, db, p)
        if len(g) > 1:
            nb, db = _fp_divmod(nb, g, p)[0], _fp_divmod(db, g, p)[0]
            while nb and nb[-1] == 0:
                nb.pop()
            while db and db[-1] == 0:
                db.pop()
        deg = max(len(nb), len(db)) - 1
        if deg >= 1:
            return MappedPoint(BerkPoint(c, m, p), deg, "descent-verified")
        lam = nb[0] * pow(db[0], -1, p) % p
        c = c + lam * Fraction(p) ** m
    raise DescentFailure("descent budget exhausted")


def map_point(f: RationalMap, S, search_depth: int = 64) -> MappedPoint:
    """Image of a Berkovich point and the local degree there."""
    p = _prime(f)
    if S is INF or S.is_classical:
        return _classical_degree(f, S if S is INF else S.center)
    if S.p != p:
        raise ValueError("point and map over different primes")
    P, Q = f.numerator, f.denominator
    if f.is_polynomial:
        return _polynomial_image(P.scale(1 / Q[0]), S)
    if f.d == 1:
        return _moebius_image(f, S)
    if count_roots_in_disk(Q, S) == 0:
        return _pole_free(P, Q, S)
    if count_roots_in_disk(P, S) == 0:
        T = _pole_free(Q, P, S)
        return MappedPoint(invert_point(T.image, p), T.local_degree, "pole-free-disk")
    return _descend(P, Q, S, search_depth)


# --------------------------------------------------------------- pullbacks


def pullback_point_mass(f: RationalMap, S) -> DiscreteMeasure:
    """``f^* delta_S`` as exact atoms weighted by local degree (total ``d``)."""
    p = _prime(f)
    d = f.d
    P, Q = f.numerator, f.denominator
    if f.d == 1:
        pre = map_point(f.inverse(), S).image
        return DiscreteMeasure.dirac(pre)
    if S is INF or S.is_classical:
        if S is INF:
            H, at_inf = Q, d - Q.degree
        else:
            H = P - Q.scale(S.center)
            at_inf = d - H.degree
        roots = rational_roots(H)
        if len(roots) != H.degree:
            raise InexactBranch("some preimages are not rational")
        pts = [BerkPoint.classical(r, p) for r in roots] + [INF] * at_inf
        return DiscreteMeasure(pts, [1] * len(pts)).merged()
    if S.p != p:
        raise ValueError("point and map over different primes")
    if f.is_polynomial:
        F = P.scale(1 / Q[0])
        pre = polynomial_disk_preimage(F, Disk(S.center, S.v, p, closed=True))
        if not pre.complete:
            raise InexactBranch("disk preimage needs points outside Q")
        pts = [D.boundary for D, _ in pre.components]
        return DiscreteMeasure(pts, [m for _, m in pre.components]).merged()
    mp = map_point(f, S)
    if mp.image == S and mp.local_degree == d:
        return DiscreteMeasure.dirac(S, d)
    raise InexactBranch("pullback of a non-classical point under a non-polynomial map")


# --------------------------------------------------------------- reduction


@dataclass
class ReductionVerdict:
    status: str  # "good" | "potentially-good" | "none-found"
    witness: BerkPoint | None = None
    conjugator: RationalMap | None = None
    conjugate: RationalMap | None = None
    certificate: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {"status": self.status}
        if self.witness is not None:
            out["witness"] = format_point(self.witness)
        if self.conjugator is not None:
            out["conjugator"] = self.conjugator.describe()
            out["conjugate"] = self.conjugate.describe()
        if self.certificate:
            out["certificate"] = self.certificate
        return out


def _is_totally_invariant(f: RationalMap, S, depth: int):
    try:
        mp = map_point(f, S, depth)
    except DescentFailure as exc:
        return False, None, str(exc)
    return mp.image == S and mp.local_degree == f.d, mp, None


# orbit points whose center needs more bits than this are not followed:
# exact arithmetic on them gets slow and the orbit is escaping anyway
HEIGHT_CAP = 4096


def _height(S) -> int:
    c = Fraction(S.center)
    return max(c.numerator.bit_length(), c.denominator.bit_length())


def _size(S) -> Fraction:
    """``log_p |S|_inf``."""
    return -min(S.v, valuation(S.center, S.p))


def _candidates(f: RationalMap, p: int):
    out = []
    fixed = rational_roots(f.numerator - f.denominator * Poly([0, 1]))
    centers = list(dict.fromkeys(fixed))
    if f.is_polynomial:
        F = f.numerator.scale(1 / f.denominator[0])
        d, ad = F.degree, F.lc
        w = Fraction(valuation(ad, p), d - 1)  # |a_d|^(-1/(d-1)) = p^(v(a_d)/(d-1))
        extra = [Fraction(0), -F[d - 1] / (d * ad)]
        for a in dict.fromkeys(extra + centers):
            out.append(BerkPoint(a, -w, p))
    for i, x in enumerate(centers):
        for y in centers[i + 1:]:
            out.append(order_and_join(BerkPoint.classical(x, p), BerkPoint.classical(y, p))[1])
    return [S for S in dict.fromkeys(out) if not S.is_classical]


def detect_reduction(f: RationalMap, search_depth: int = 10) -> ReductionVerdict:
    """Semi-decision for good / potentially good reduction.

    ``good`` iff the Gauss point is totally invariant.  Otherwise the Gauss
    orbit, polynomial escape-radius points and joins of rational fixed
    points seed orbits of length ``search_depth``; the first point ``S0``
    with ``f(S0) = S0`` of local degree ``d`` is returned as the witness.
    A ``none-found`` verdict carries the explored points and the sizes
    ``log_p |f^n(Gauss)|_inf``; it is not a proof of absence.
    """
    p = _prime(f)
    G = gauss(p)
    ok, mp, err = _is_totally_invariant(f, G, 64)
    if ok:
        return ReductionVerdict("good", witness=G)
    explored = []
    failures = []
    truncated = []
    orbit_sizes = [_size(G)]
    seeds = [G] + _candidates(f, p)
    for k, S in enumerate(seeds):
        for step in range(search_depth + 1):
            if S is INF or S.is_classical:
                break
            if _height(S) > HEIGHT_CAP:
                truncated.append(f"seed {k} after {step} steps")
                break
            if S not in explored:
                explored.append(S)
            ok, mp, err = _is_totally_invariant(f, S, 64)
            if err:
                failures.append(f"{format_point(S)}: {err}")
                break
            if ok:
                return _witness_verdict(f, S, p)
            if step == search_depth:
                break
            S = mp.image
            if k == 0:
                orbit_sizes.append(_size(S) if S is not INF and not S.is_classical else None)
    sizes = [s for s in orbit_sizes if s is not None]
    cert = {
        "search_depth": search_depth,
        "explored": [format_point(S) for S in explored],
        "gauss_orbit_log_sizes": [str(s) for s in sizes],
        "gauss_orbit_strictly_increasing": all(b > a for a, b in zip(sizes, sizes[1:])) and len(sizes) > 1,
    }
    if failures:
        cert["descent_failures"] = failures
    if truncated:
        cert["orbits_truncated_at_height_cap"] = truncated
    return ReductionVerdict("none-found", certificate=cert)


def _witness_verdict(f: RationalMap, S0: BerkPoint, p: int) -> ReductionVerdict:
    if Fraction(S0.v).denominator != 1:
        return ReductionVerdict("potentially-good", witness=S0,
                                certificate={"conjugator": "radius outside |Q^*|; witness only"})
    lam = Fraction(p) ** (-int(S0.v))
    m = moebius(lam, -lam * S0.center, 0, 1, f.field)
    phi = f.conjugate(m)
    ok, _, _ = _is_totally_invariant(phi, gauss(p), 64)
    return ReductionVerdict("potentially-good", witness=S0, conjugator=m, conjugate=phi,
                            certificate={"conjugate_has_good_reduction": ok})


def berk_equilibrium_check(f: RationalMap, S0: BerkPoint) -> dict:
    """Check ``f^* delta_S0 = d delta_S0``; then ``mu_f = delta_S0``."""
    d = f.d
    try:
        if f.is_polynomial:
            pull = pullback_point_mass(f, S0)
            route = "pullback"
        else:
            mp = map_point(f, S0)
            pull = DiscreteMeasure.dirac(S0, d) if (mp.image == S0 and mp.local_degree == d) else None
            route = "fixed-with-full-degree"
    except (InexactBranch, DescentFailure) as exc:
        return {"verified": False, "route": "unavailable", "reason": str(exc)}
    if pull is None:
        return {"verified": False, "route": route,
                "image": format_point(mp.image), "local_degree": mp.local_degree}
    atoms = pull.atoms()
    verified = len(atoms) == 1 and atoms[0][0] == S0 and atoms[0][1] == d
    out = {
        "verified": verified,
        "route": route,
        "pullback": [[format_point(S), str(m)] for S, m in atoms],
    }
    if verified:
        out["conclusion"] = "mu_f = delta_S0 = nu_inf of the closed disk of S0"
    else:
        out["extra_atoms"] = [[format_point(S), str(m)] for S, m in atoms if S != S0]
    return out
