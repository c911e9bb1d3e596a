"""Logarithmic potentials, energies, weighted kernels and equilibrium
distributions of finite measures.

Complex measures give floats (natural logarithms).  Measures of Berkovich
points give exact rationals in units of ``log p``.  Coincident classical
atoms make ``log|z - w|`` infinite; such terms are clamped to ``LOG_FLOOR``
and counted in the ``clamped`` field of the detailed results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import sympy

from . import _kernels
from .berkovich import BerkPoint, Disk, hsia, hsia_can, hsia_infty, order_and_join
from .fields import INF, is_inf
from .measures import DiscreteMeasure

__all__ = [
    "LOG_FLOOR",
    "KernelSum",
    "EnergyReport",
    "Equilibrium",
    "WeightedKernel",
    "potential",
    "potential_detail",
    "energy",
    "energy_detail",
    "weighted_energy",
    "equilibrium_of_disks",
    "frostman_check",
    "log_chordal",
]

LOG_FLOOR = _kernels.LOG_FLOOR
_EXACT_FLOOR = Fraction(int(LOG_FLOOR))


@dataclass(frozen=True)
class KernelSum:
    value: object
    clamped: int = 0


def _is_pole_inf(pole) -> bool:
    return pole is None or pole is INF or (not isinstance(pole, BerkPoint) and is_inf(pole))


def _split_inf(nu: DiscreteMeasure):
    inf = np.isinf(nu.points.real) | np.isinf(nu.points.imag)
    return nu.points[~inf], nu.masses[~inf], float(nu.masses[inf].sum())


def log_chordal(z, w):
    """``log[z, w]`` for complex arrays (``CINF`` allowed)."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    zi = np.isinf(z.real) | np.isinf(z.imag)
    wi = np.isinf(w.real) | np.isinf(w.imag)
    zf = np.where(zi, 0, z)
    wf = np.where(wi, 0, w)
    with np.errstate(divide="ignore"):
        fin = np.log(np.abs(zf - wf)) - 0.5 * np.log1p(np.abs(zf) ** 2) - 0.5 * np.log1p(np.abs(wf) ** 2)
        out = np.where(zi & ~wi, -0.5 * np.log1p(np.abs(wf) ** 2), fin)
        out = np.where(wi & ~zi, -0.5 * np.log1p(np.abs(zf) ** 2), out)
        out = np.where(zi & wi, -np.inf, out)
    return out


# -------------------------------------------------------------- potentials


def potential_detail(nu: DiscreteMeasure, pole, z, skip_self: bool = False) -> KernelSum:
    """``p_{pole, nu}(z) = sum_i m_i log[z, a_i]_{pole}``.

    For complex measures ``z`` may be an array.  ``skip_self`` drops exact
    coincidences (the potential of the other atoms at an atom).
    """
    if nu.is_archimedean:
        return _potential_complex(nu, pole, z, skip_self)
    total, clamped = Fraction(0), 0
    for a, m in nu.atoms():
        lv, bad = _exact_log_kernel(z, a, pole)
        if bad:
            clamped += 1
            if skip_self:
                continue
        total += m * lv
    return KernelSum(total, clamped)


def potential(nu: DiscreteMeasure, pole, z, skip_self: bool = False):
    return potential_detail(nu, pole, z, skip_self).value


def _potential_complex(nu, pole, z, skip_self):
    scalar = np.ndim(z) == 0
    zs = np.atleast_1d(np.asarray(z, dtype=complex))
    a, m, minf = _split_inf(nu)
    if _is_pole_inf(pole):
        if minf:
            raise ValueError("measure charges the pole at infinity")
        val, hits = _kernels.log_potential(a, m, zs, skip_self)
    else:
        z0 = complex(pole)
        val, hits = _kernels.log_potential(a, m, zs, skip_self)
        # log[z,w]_{z0} = log|z-w| - log|z-z0| - log|w-z0| + log(1+|z0|^2)
        with np.errstate(divide="ignore"):
            lz = np.log(np.abs(zs - z0))
            lw = np.log(np.abs(a - z0))
        if np.any(np.isinf(lw)):
            raise ValueError("measure charges the pole")
        c = math.log1p(abs(z0) ** 2)
        val = val - m.sum() * lz - float(m @ lw) + m.sum() * c
        if minf:
            val = val + minf * (c - lz)
    return KernelSum(float(val[0]) if scalar else val, hits)


def _exact_log_kernel(z, a, pole):
    """``(log_p [z, a]_{pole}, collided)`` with the floor applied."""
    if _is_pole_inf(pole):
        if z is INF or a is INF:
            raise ValueError("measure or point at the pole")
        k = hsia_infty(z, a)
    else:
        k = hsia(z, a, pole)
    if k.v == math.inf:
        return _EXACT_FLOOR, True
    if k.v == -math.inf:
        raise ValueError("point coincides with the pole")
    return -Fraction(k.v), False


# ---------------------------------------------------------------- energies


def energy_detail(nu: DiscreteMeasure, pole=INF) -> KernelSum:
    """``sum_{i != j} m_i m_j log[a_i, a_j]_{pole}``.

    Berkovich atoms of positive radius also contribute their diagonal term
    ``m_i^2 log diam(a_i)``; classical diagonals are excluded.
    """
    if nu.is_archimedean:
        a, m, minf = _split_inf(nu)
        if _is_pole_inf(pole):
            if minf:
                raise ValueError("measure charges the pole at infinity")
            e, clamped = _kernels.pair_energy(a, m)
            return KernelSum(e, clamped)
        if minf:
            raise ValueError("atoms at infinity need pole = infinity or the canonical kernel")
        z0 = complex(pole)
        e, clamped = _kernels.pair_energy(a, m)
        lw = np.log(np.abs(a - z0))
        M = m.sum()
        s2 = M * M - float(m @ m)
        e = e - 2 * float((m * lw) @ (M - m)) + s2 * math.log1p(abs(z0) ** 2)
        return KernelSum(e, clamped)
    total, clamped = Fraction(0), 0
    atoms = nu.atoms()
    for i, (a, ma) in enumerate(atoms):
        for j, (b, mb) in enumerate(atoms):
            if i == j and (a is INF or a.is_classical):
                continue
            lv, bad = _exact_log_kernel(a, b, pole)
            clamped += bad
            total += ma * mb * lv
    return KernelSum(total, clamped)


def energy(nu: DiscreteMeasure, pole=INF):
    return energy_detail(nu, pole).value


@dataclass
class WeightedKernel:
    """``Phi_g(S, T) = log[S, T]_can - g(S) - g(T)``.

    ``g`` is a callable (e.g. a ``GreenEvaluator``) or a constant.
    """

    g: object = 0.0

    def weight(self, z):
        if callable(self.g):
            return self.g(z)
        if isinstance(z, np.ndarray):
            return np.full(z.shape, float(self.g))
        return self.g

    def shifted(self, c) -> WeightedKernel:
        g = self.g
        if callable(g):
            return WeightedKernel(lambda z: g(z) + c)
        return WeightedKernel(g + c)

    def __call__(self, S, T):
        if isinstance(S, BerkPoint) or S is INF or isinstance(T, BerkPoint):
            p = S.p if isinstance(S, BerkPoint) else T.p
            k = hsia_can(S, T, p)
            lv = _EXACT_FLOOR if k.v == math.inf else -Fraction(k.v)
            return lv - self.weight(S) - self.weight(T)
        return log_chordal(S, T) - self.weight(np.asarray(S, complex)) - self.weight(np.asarray(T, complex))


def weighted_energy(nu: DiscreteMeasure, g: WeightedKernel) -> float:
    """Energy of ``nu`` for the weighted kernel ``Phi_g``.

    Complex measures: the off-diagonal pair sum divided by
    ``sum_{i != j} m_i m_j``, so a weight ``g + c`` lowers the value by
    exactly ``2c``.  Berkovich measures include type II/III diagonals and
    are normalized by total mass squared.
    """
    if not nu.is_archimedean:
        M = nu.total_mass
        atoms = nu.atoms()
        total = Fraction(0)
        for i, (a, ma) in enumerate(atoms):
            for j, (b, mb) in enumerate(atoms):
                if i == j and (a is INF or a.is_classical):
                    continue
                total += ma * mb * g(a, b)
        return total / (M * M)
    pts, m = nu.points, nu.masses
    inf = np.isinf(pts.real) | np.isinf(pts.imag)
    M = m.sum()
    s2 = M * M - float(m @ m)
    if s2 <= 0:
        raise ValueError("energy of a single atom is degenerate")
    fin = pts[~inf]
    mf = m[~inf]
    e, _ = _kernels.pair_energy(fin, mf)
    h = 0.5 * np.log1p(np.abs(fin) ** 2)
    e -= 2 * float((mf * h) @ (mf.sum() - mf))
    # pairs (finite, infinity): log[z, inf] = -h(z)
    minf = m[inf].sum()
    e -= 2 * minf * float(mf @ h)
    if minf:
        # distinct atoms at infinity collide
        e += (minf * minf - float(m[inf] @ m[inf])) * LOG_FLOOR
    w = np.asarray(g.weight(pts), dtype=float)
    e -= 2 * float((m * w) @ (M - m))
    return e / s2


@dataclass
class EnergyReport:
    potential_samples: list
    energy: object
    pole: object
    V_estimate: object
    clamped: int = 0


# -------------------------------------------------------------- equilibria


@dataclass(frozen=True)
class Equilibrium:
    measure: DiscreteMeasure
    V: Fraction  # in units of log p
    method: str


def _disjoint(D: Disk, E: Disk) -> bool:
    rel, _ = order_and_join(D.boundary, E.boundary)
    return rel == "incomparable"


def equilibrium_of_disks(disks, pole=INF) -> Equilibrium:
    """Equilibrium distribution of a finite union of closed Berkovich disks.

    One disk: the point mass at its boundary point, ``V = log diam``.
    Several disjoint disks: the masses ``m`` solving ``L m = V 1``,
    ``sum m = 1`` exactly, with ``L_ij = log_p |S_i - S_j|_inf`` (diagonal
    ``log_p diam S_i``); if that system is singular or has a negative
    entry, projected-gradient ascent of the energy on the simplex is used.
    """
    if not _is_pole_inf(pole):
        raise NotImplementedError("only the pole at infinity is supported")
    disks = list(disks)
    if not disks:
        raise ValueError("empty union")
    for D in disks:
        if not D.closed:
            raise ValueError("equilibrium is taken over closed disks")
    for i, D in enumerate(disks):
        for E in disks[i + 1:]:
            if not _disjoint(D, E):
                raise ValueError(f"disks {D} and {E} overlap")
    pts = [D.boundary for D in disks]
    if len(pts) == 1:
        return Equilibrium(DiscreteMeasure.dirac(pts[0]), -Fraction(pts[0].v), "single-disk")
    n = len(pts)
    L = [[-Fraction(hsia_infty(S, T).v) for T in pts] for S in pts]
    A = sympy.zeros(n + 1, n + 1)
    rhs = sympy.zeros(n + 1, 1)
    for i in range(n):
        for j in range(n):
            A[i, j] = sympy.Rational(L[i][j].numerator, L[i][j].denominator)
        A[i, n] = -1
        A[n, i] = 1
    rhs[n] = 1
    if A.det() != 0:
        sol = A.LUsolve(rhs)
        m = [Fraction(int(x.p), int(x.q)) for x in sol[:n]]
        V = Fraction(int(sol[n].p), int(sol[n].q))
        if all(x >= 0 for x in m):
            return Equilibrium(DiscreteMeasure(pts, m), V, "equal-potential")
    m = _simplex_ascent(np.array([[float(x) for x in row] for row in L]))
    V = float(m @ np.array([[float(x) for x in row] for row in L]) @ m)
    return Equilibrium(DiscreteMeasure(pts, [Fraction(x).limit_denominator(10 ** 12) for x in m]),
                       Fraction(V).limit_denominator(10 ** 12), "projected-gradient")


def _simplex_ascent(L: np.ndarray, iters: int = 20000, tol: float = 1e-8) -> np.ndarray:
    n = len(L)
    m = np.full(n, 1.0 / n)
    step = 1.0 / (np.abs(L).max() + 1.0)
    for _ in range(iters):
        grad = 2 * L @ m
        new = _project_simplex(m + step * grad)
        if np.max(np.abs(new - m)) < tol:
            return new
        m = new
    return m


def _project_simplex(y: np.ndarray) -> np.ndarray:
    u = np.sort(y)[::-1]
    css = np.cumsum(u)
    k = np.nonzero(u * np.arange(1, len(y) + 1) > css - 1)[0][-1]
    tau = (css[k] - 1) / (k + 1)
    return np.maximum(y - tau, 0)


def frostman_check(nu: DiscreteMeasure, pole, samples) -> dict:
    """Margins ``p_nu(s) - I_nu`` at the sample points.

    Equilibrium measures have margins ``>= 0`` everywhere (up to
    discretization) and ``> 0`` on the component of the pole.
    """
    samples = list(samples) if not isinstance(samples, np.ndarray) else samples
    if len(samples) == 0:
        return {"margins": [], "min_margin": None, "energy": None}
    if nu.is_archimedean:
        I = energy(nu, pole)
        p = potential(nu, pole, np.asarray(samples, dtype=complex))
        margins = [float(x) for x in p - I]
        return {"margins": margins, "min_margin": min(margins), "energy": float(I)}
    I = energy(nu, pole)
    margins = [potential(nu, pole, s) - I for s in samples]
    return {"margins": margins, "min_margin": min(margins), "energy": I}
