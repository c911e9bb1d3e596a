"""Complex dynamics: escape rates, the dynamical Green function, and the
canonical measure approximated by iterated preimages."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .fields import INF, ComplexField, is_inf
from .lifts import HomogeneousLift, RationalMap, RootFindingError, complex_roots, green_offset, normalize_lift
from .measures import CINF, DiscreteMeasure
from .poly import Poly

__all__ = [
    "GreenEvaluator",
    "BudgetExceeded",
    "escape_rate",
    "green",
    "green_grid",
    "preimage_measure",
    "default_seed",
    "lambda_at_infinity",
    "fixed_points",
    "complex_lift",
    "T_F",
    "escapes_to_infinity",
]

ROOT_TOL = 1e-10
DEFAULT_BUDGET = 2 ** 16


class BudgetExceeded(ValueError):
    pass


def complex_lift(F: HomogeneousLift) -> HomogeneousLift:
    """The same lift with complex coefficients."""
    if F.field.is_archimedean and not F.F0.is_exact and not F.F1.is_exact:
        return F
    return HomogeneousLift(F.F0.to_complex(), F.F1.to_complex(), F.d, ComplexField())


def _coeff_vectors(F: HomogeneousLift):
    f0 = np.array([complex(F.F0[k]) for k in range(F.d + 1)])
    f1 = np.array([complex(F.F1[k]) for k in range(F.d + 1)])
    return f0, f1


def _homogenize(z):
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    inf = np.isinf(z.real) | np.isinf(z.imag)
    p0 = np.where(inf, 0.0, 1.0).astype(complex)
    p1 = np.where(inf, 1.0, z)
    return p0, p1


def _points(z):
    """``(complex array, was_scalar)``; ``INF`` and infinite complex map to ``CINF``."""
    if z is INF or (np.ndim(z) == 0 and is_inf(complex(z))):
        return np.array([CINF]), True
    if np.ndim(z) == 0:
        return np.array([complex(z)]), True
    return np.asarray(z, dtype=complex), False


def escape_rate(F: HomogeneousLift, z, n: int):
    """``T_{F^n}(z) / d^n``, renormalizing the coordinates after every step."""
    F = complex_lift(F)
    f0, f1 = _coeff_vectors(F)
    pts, scalar = _points(z)
    p0, p1 = _homogenize(pts.ravel())
    g, _, _ = _kernels.escape_sum(f0, f1, p0, p1, n)
    if not np.all(np.isfinite(g)):
        raise OverflowError("escape rate overflowed despite renormalization")
    return float(g[0]) if scalar else g.reshape(pts.shape)


def T_F(F: HomogeneousLift, z):
    """``log||F(1, z)|| - d log||(1, z)||`` (one-step escape rate, undivided)."""
    return F.d * escape_rate(F, z, 1)


def _sup_abs_T(F: HomogeneousLift, samples: int = 4096) -> float:
    """Estimate of ``sup |T_F|`` over P^1 by sampling plus a safety margin."""
    f0, f1 = _coeff_vectors(F)
    k = np.arange(samples) + 0.5
    theta = np.arccos(1 - 2 * k / samples)
    phi = math.pi * (1 + 5 ** 0.5) * k
    # points on the Riemann sphere as unit vectors (cos(t/2), sin(t/2) e^{i phi})
    p0 = np.cos(theta / 2).astype(complex)
    p1 = np.sin(theta / 2) * np.exp(1j * phi)
    t, _, _ = _kernels.escape_sum_numpy(f0, f1, p0, p1, 1)
    return 1.5 * F.d * float(np.max(np.abs(t))) + 1.0


@dataclass
class GreenEvaluator:
    """Evaluates the Green function of a fixed lift, and ``g_f`` from it.

    ``offset`` is ``V_{g_F}`` of the lift, so ``g_f = g_F + offset / 2``.
    """

    map: RationalMap
    max_iterations: int = 400
    lift: HomogeneousLift = None
    tail_bound: float = field(init=False)
    offset: float = field(init=False)

    def __post_init__(self):
        if self.lift is None:
            self.lift = self.map.lift
        self.lift = complex_lift(self.lift)
        if self.lift.d < 2:
            raise ValueError("Green functions need degree > 1")
        self._f = _coeff_vectors(self.lift)
        self.tail_bound = _sup_abs_T(self.lift) / (self.lift.d - 1)
        self.offset = float(green_offset(self.lift))

    @classmethod
    def normalized(cls, f: RationalMap, **kw) -> GreenEvaluator:
        return cls(f, lift=normalize_lift(complex_lift(f.lift))[0], **kw)

    @property
    def d(self) -> int:
        return self.lift.d

    def iterations_for(self, eps: float) -> int:
        if eps <= 0:
            raise ValueError("eps must be positive")
        if eps < 1e-14:
            raise ValueError("eps below double-precision resolution")
        n = max(1, math.ceil(math.log(self.tail_bound / eps) / math.log(self.d)))
        if n > self.max_iterations:
            raise ValueError(f"eps={eps:g} needs {n} iterations > max_iterations")
        return n

    def lift_green(self, z, eps: float = 1e-12):
        """``g_F`` of the stored lift."""
        n = self.iterations_for(eps)
        pts, scalar = _points(z)
        p0, p1 = _homogenize(pts.ravel())
        g, _, _ = _kernels.escape_sum(self._f[0], self._f[1], p0, p1, n)
        return float(g[0]) if scalar else g.reshape(pts.shape)

    def __call__(self, z, eps: float = 1e-12):
        """``g_f`` (the normalized weight)."""
        g = self.lift_green(z, eps)
        return g + self.offset / 2


def green(G: GreenEvaluator, z, eps: float = 1e-12):
    return G(z, eps)


def green_grid(G: GreenEvaluator, window, res: int, eps: float = 1e-12):
    """``g_f`` on a ``res x res`` grid over ``[x0,x1] x [y0,y1]``.

    Row ``i`` holds ``y = y0 + i (y1 - y0)/(res - 1)`` and column ``j`` holds
    ``x = x0 + j (x1 - x0)/(res - 1)``.  ``res == 1`` samples the corner
    ``(x0, y0)`` only.
    """
    x0, x1, y0, y1 = (float(t) for t in window)
    if not (x1 > x0 and y1 > y0):
        raise ValueError("degenerate window: need x0 < x1 and y0 < y1")
    if res < 1:
        raise ValueError("resolution must be positive")
    xs = np.linspace(x0, x1, res) if res > 1 else np.array([x0])
    ys = np.linspace(y0, y1, res) if res > 1 else np.array([y0])
    Z = xs[None, :] + 1j * ys[:, None]
    return G(Z.ravel(), eps).reshape(Z.shape), xs, ys


# ------------------------------------------------------------ preimages


def _level_preimages(f0, f1, w):
    """All roots of ``F1(1,z) - w F0(1,z)`` for every ``w``, ``d`` per atom.

    Rows whose polynomial loses degree get atoms at infinity for the
    missing multiplicity.
    """
    d = len(f0) - 1
    winf = np.isinf(w.real) | np.isinf(w.imag)
    coeffs = np.where(winf[:, None], f0[None, :], f1[None, :] - np.where(winf, 0, w)[:, None] * f0[None, :])
    out = np.empty((len(w), d), dtype=complex)
    scale = np.max(np.abs(coeffs), axis=1)
    full = np.abs(coeffs[:, d]) > 1e-14 * scale
    if np.any(full):
        c = coeffs[full] / coeffs[full, d:d + 1]
        comp = np.zeros((c.shape[0], d, d), dtype=complex)
        comp[:, 0, :] = -c[:, d - 1::-1]
        if d > 1:
            comp[:, np.arange(1, d), np.arange(d - 1)] = 1.0
        roots = np.linalg.eigvals(comp)
        out[full] = _polish(c, roots)
    for i in np.flatnonzero(~full):
        row = list(coeffs[i])
        while row and abs(row[-1]) <= 1e-14 * scale[i]:
            row.pop()
        P = Poly(row)
        r = complex_roots(P, ROOT_TOL) if P.degree >= 1 else np.empty(0, complex)
        out[i, :len(r)] = r
        out[i, len(r):] = CINF
    return out.ravel()


def _polish(c, roots):
    """One Newton step per root (kept only if it helps), then a residual check."""
    d = c.shape[1] - 1
    hi = c[:, ::-1]

    def ev(coef, z):
        acc = np.zeros_like(z)
        for k in range(coef.shape[1]):
            acc = acc * z + coef[:, k:k + 1]
        return acc

    der = hi[:, :-1] * np.arange(d, 0, -1)[None, :]
    val = ev(hi, roots)
    dv = ev(der, roots)
    with np.errstate(divide="ignore", invalid="ignore"):
        cand = roots - val / dv
    ok = np.isfinite(cand)
    cval = ev(hi, np.where(ok, cand, roots))
    better = ok & (np.abs(cval) < np.abs(val))
    roots = np.where(better, cand, roots)
    val = np.where(better, cval, val)
    size = ev(np.abs(hi), np.abs(roots))
    resid = np.abs(val) / np.where(size > 0, size, 1.0)
    if not np.all(np.isfinite(roots)) or np.max(resid) > ROOT_TOL * d:
        raise RootFindingError(f"preimage residual {np.max(resid):.3g} above {ROOT_TOL:g}")
    return roots


def fixed_points(f: RationalMap):
    """Finite fixed points of ``f`` and their multipliers (complex)."""
    F = complex_lift(f.lift)
    H = F.F1 - Poly([0j, 1 + 0j]) * F.F0
    z = complex_roots(H) if H.degree >= 1 else np.empty(0, complex)
    P, Q = F.F1, F.F0
    dP, dQ = P.derivative(), Q.derivative()
    mult = np.array([(dP(t) * Q(t) - P(t) * dQ(t)) / Q(t) ** 2 if Q(t) != 0 else np.inf for t in z])
    return z, mult


def default_seed(f: RationalMap) -> complex:
    """A non-fixed preimage of the most repelling finite fixed point.

    Falls back to a fixed generic point when no finite fixed point repels.
    """
    z, mult = fixed_points(f)
    if len(z):
        i = int(np.argmax(np.abs(mult)))
        if abs(mult[i]) > 1 + 1e-9:
            f0, f1 = _coeff_vectors(complex_lift(f.lift))
            pre = _level_preimages(f0, f1, np.array([z[i]]))
            pre = pre[np.isfinite(pre.real) & (np.abs(pre - z[i]) > 1e-6)]
            if len(pre):
                return complex(pre[np.argmin(np.abs(pre))])
            return complex(z[i])
    return complex(0.2718281828, 0.3141592653)


def preimage_measure(f: RationalMap, seed=None, n: int = 10, max_atoms: int | None = None,
                     rng_seed: int = 0, budget: int = DEFAULT_BUDGET) -> DiscreteMeasure:
    """``(f^n)^* delta_seed / d^n`` as ``d^n`` equal atoms.

    Without ``max_atoms`` the full tree is built and ``d^n`` may not exceed
    ``budget``.  With ``max_atoms`` every level is uniformly subsampled
    down to that many atoms (masses stay equal, so total mass is kept).
    """
    if f.d < 2:
        raise ValueError("need degree > 1")
    if max_atoms is None and f.d ** n > budget:
        raise BudgetExceeded(f"d^n = {f.d ** n} atoms exceeds the budget {budget}")
    if seed is None:
        seed = default_seed(f)
    f0, f1 = _coeff_vectors(complex_lift(f.lift))
    w = np.array([CINF if is_inf(seed) else complex(seed)])
    rng = np.random.default_rng(rng_seed)
    for _ in range(n):
        w = _level_preimages(f0, f1, w)
        if max_atoms is not None and len(w) > max_atoms:
            keep = np.sort(rng.choice(len(w), size=max_atoms, replace=False))
            w = w[keep]
    return DiscreteMeasure.uniform(w)


def lambda_at_infinity(f: RationalMap):
    """Multiplier of ``f`` at infinity: derivative of ``1/f(1/w)`` at 0."""
    F = f.lift
    if not f.fixes_infinity:
        raise ValueError("f does not fix infinity")
    if F.d1 - F.d0 == 1:
        return F.c0 / F.c1
    return 0 * F.c0


def escapes_to_infinity(f: RationalMap, z, n: int = 200, radius: float = 1e8) -> np.ndarray:
    """Heuristic basin test: does the orbit of ``z`` leave ``|z| < radius``?"""
    F = complex_lift(f.lift)
    P, Q = F.F1, F.F0
    z = np.atleast_1d(np.asarray(z, dtype=complex)).copy()
    out = np.zeros(z.shape, dtype=bool)
    with np.errstate(all="ignore"):
        for _ in range(n):
            live = ~out
            q = np.polyval(np.array(Q.coeffs[::-1]), z[live])
            z[live] = np.polyval(np.array(P.coeffs[::-1]), z[live]) / q
            out |= ~np.isfinite(z) | (np.abs(z) > radius)
    return out
