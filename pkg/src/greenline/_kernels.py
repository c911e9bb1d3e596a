"""Hot loops: escape-rate sums, pairwise log energies, log potentials.

Each kernel exists twice, as a numba ``@njit`` function and as a vectorized
numpy function with identical semantics.  ``GREENLINE_NUMBA=0`` (or a missing
numba install) selects the numpy versions; the public names at the bottom of
this module point at whichever backend is active.
"""

from __future__ import annotations

import os
import warnings

import numpy as np

# numba probes an incompatible system TBB before falling back to OpenMP
warnings.filterwarnings("ignore", message=r".*TBB threading layer.*")

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

# distances below this count as collisions and are clamped to LOG_FLOOR;
# its square must stay a normal double for the squared-distance kernels
COLLISION = 1e-150
LOG_FLOOR = -1e6
_BLOCK = 512


def _flag_enabled() -> bool:
    return os.environ.get("GREENLINE_NUMBA", "1").strip().lower() not in ("0", "false", "no", "off")


USE_NUMBA = numba is not None and _flag_enabled()


# ------------------------------------------------------------------ numpy


def escape_sum_numpy(f0, f1, p0, p1, n):
    """``sum_{k<n} d^-(k+1) log||F(q_k)||`` with ``q_k`` unit representatives.

    ``f0``/``f1`` hold the homogeneous coefficients of ``F0``/``F1`` by power
    of ``p1`` (length ``d + 1``); ``p0``/``p1`` are complex arrays.  Returns
    the sums and the final unit representatives.
    """
    d = len(f0) - 1
    p0 = np.array(p0, dtype=np.complex128)
    p1 = np.array(p1, dtype=np.complex128)
    nrm = np.hypot(np.abs(p0), np.abs(p1))
    p0 /= nrm
    p1 /= nrm
    g = np.zeros(p0.shape, dtype=np.float64)
    w = 1.0
    for _ in range(n):
        w /= d
        # Horner in t = p1/p0 is unstable near p0 = 0; use both monomial powers
        q0 = np.zeros_like(p0)
        q1 = np.zeros_like(p0)
        a = np.ones_like(p0)
        for k in range(d + 1):
            mono = p0 ** (d - k) * a
            q0 += f0[k] * mono
            q1 += f1[k] * mono
            a = a * p1
        s = np.hypot(np.abs(q0), np.abs(q1))
        g += w * np.log(s)
        p0 = q0 / s
        p1 = q1 / s
    return g, p0, p1


def pair_energy_numpy(z, m):
    """``sum_{i != j} m_i m_j log|z_i - z_j|`` and the number of clamped pairs."""
    z = np.asarray(z, dtype=np.complex128)
    m = np.asarray(m, dtype=np.float64)
    n = len(z)
    rows = np.zeros(n)
    clamped = 0
    for s in range(0, n, _BLOCK):
        zb = z[s:s + _BLOCK]
        dist = np.abs(zb[:, None] - z[None, :])
        idx = np.arange(s, s + len(zb))
        bad = dist < COLLISION
        bad[np.arange(len(zb)), idx] = False
        clamped += int(bad.sum())
        with np.errstate(divide="ignore"):
            lg = np.where(bad, LOG_FLOOR, np.log(np.where(bad, 1.0, dist)))
        lg[np.arange(len(zb)), idx] = 0.0
        rows[s:s + len(zb)] = m[s:s + len(zb)] * (lg @ m)
    return float(rows.sum()), clamped


def log_potential_numpy(a, m, z, skip_self):
    """``sum_i m_i log|z_k - a_i|`` at every ``z_k``.

    With ``skip_self`` exact coincidences are left out of the sum (potential
    of the remaining atoms); otherwise they are clamped to ``LOG_FLOOR``.
    Returns the values and the number of coincidences met.
    """
    a = np.asarray(a, dtype=np.complex128)
    m = np.asarray(m, dtype=np.float64)
    z = np.asarray(z, dtype=np.complex128)
    out = np.empty(len(z))
    hits = 0
    for s in range(0, len(z), _BLOCK):
        zb = z[s:s + _BLOCK]
        dist = np.abs(zb[:, None] - a[None, :])
        bad = dist < COLLISION
        hits += int(bad.sum())
        fill = 0.0 if skip_self else LOG_FLOOR
        with np.errstate(divide="ignore"):
            lg = np.where(bad, fill, np.log(np.where(bad, 1.0, dist)))
        out[s:s + len(zb)] = lg @ m
    return out, hits


# ------------------------------------------------------------------ numba

# reassociation and approximate functions only; infinities must survive
_FASTMATH = {"nsz", "arcp", "contract", "afn", "reassoc"}

if numba is not None:

    @numba.njit(cache=True, parallel=True)
    def escape_sum_numba(f0, f1, p0, p1, n):
        d = len(f0) - 1
        npts = len(p0)
        g = np.zeros(npts)
        o0 = np.empty(npts, dtype=np.complex128)
        o1 = np.empty(npts, dtype=np.complex128)
        pw0 = np.empty(d + 1, dtype=np.complex128)
        for i in numba.prange(npts):
            pw = pw0.copy()
            a0 = p0[i]
            a1 = p1[i]
            s = np.sqrt(a0.real * a0.real + a0.imag * a0.imag + a1.real * a1.real + a1.imag * a1.imag)
            a0 /= s
            a1 /= s
            w = 1.0
            acc = 0.0
            for _ in range(n):
                w /= d
                # pw[k] = a0^(d-k), built by repeated products
                pw[d] = 1.0
                for k in range(d - 1, -1, -1):
                    pw[k] = pw[k + 1] * a0
                q0 = 0j
                q1 = 0j
                b = 1.0 + 0j
                for k in range(d + 1):
                    mono = pw[k] * b
                    q0 += f0[k] * mono
                    q1 += f1[k] * mono
                    b *= a1
                s2 = q0.real * q0.real + q0.imag * q0.imag + q1.real * q1.real + q1.imag * q1.imag
                acc += w * 0.5 * np.log(s2)
                s = np.sqrt(s2)
                a0 = q0 / s
                a1 = q1 / s
            g[i] = acc
            o0[i] = a0
            o1[i] = a1
        return g, o0, o1

    @numba.njit(cache=True, parallel=True, fastmath=_FASTMATH)
    def _pair_rows(x, y, m):
        n = len(x)
        rows = np.zeros(n)
        bad = np.zeros(n, dtype=np.int64)
        c2 = COLLISION * COLLISION
        for i in numba.prange(n):
            acc = 0.0
            nb = 0
            for j in range(n):
                dx = x[i] - x[j]
                dy = y[i] - y[j]
                r2 = dx * dx + dy * dy
                if j == i:
                    continue
                if r2 < c2:
                    acc += m[j] * LOG_FLOOR
                    nb += 1
                else:
                    acc += m[j] * 0.5 * np.log(r2)
            rows[i] = m[i] * acc
            bad[i] = nb
        return rows, bad

    def pair_energy_numba(z, m):
        z = np.asarray(z, dtype=np.complex128)
        rows, bad = _pair_rows(np.ascontiguousarray(z.real), np.ascontiguousarray(z.imag),
                               np.ascontiguousarray(m, dtype=np.float64))
        # sequential reduction keeps the result independent of thread count
        return float(rows.sum()), int(bad.sum())

    @numba.njit(cache=True, parallel=True, fastmath=_FASTMATH)
    def _potential(ax, ay, m, zx, zy, skip_self):
        out = np.empty(len(zx))
        hits = np.zeros(len(zx), dtype=np.int64)
        fill = 0.0 if skip_self else LOG_FLOOR
        c2 = COLLISION * COLLISION
        for k in numba.prange(len(zx)):
            acc = 0.0
            h = 0
            for i in range(len(ax)):
                dx = zx[k] - ax[i]
                dy = zy[k] - ay[i]
                r2 = dx * dx + dy * dy
                if r2 < c2:
                    acc += m[i] * fill
                    h += 1
                else:
                    acc += m[i] * 0.5 * np.log(r2)
            out[k] = acc
            hits[k] = h
        return out, hits

    def log_potential_numba(a, m, z, skip_self):
        a = np.asarray(a, dtype=np.complex128)
        z = np.asarray(z, dtype=np.complex128)
        out, hits = _potential(np.ascontiguousarray(a.real), np.ascontiguousarray(a.imag),
                               np.ascontiguousarray(m, dtype=np.float64),
                               np.ascontiguousarray(z.real), np.ascontiguousarray(z.imag), bool(skip_self))
        return out, int(hits.sum())

else:  # pragma: no cover
    escape_sum_numba = pair_energy_numba = log_potential_numba = None


def _pick(numba_fn, numpy_fn):
    return numba_fn if USE_NUMBA else numpy_fn


def escape_sum(f0, f1, p0, p1, n):
    fn = _pick(escape_sum_numba, escape_sum_numpy)
    return fn(np.ascontiguousarray(f0, dtype=np.complex128), np.ascontiguousarray(f1, dtype=np.complex128),
              np.ascontiguousarray(p0, dtype=np.complex128), np.ascontiguousarray(p1, dtype=np.complex128), int(n))


def pair_energy(z, m):
    return _pick(pair_energy_numba, pair_energy_numpy)(z, m)


def log_potential(a, m, z, skip_self=False):
    return _pick(log_potential_numba, log_potential_numpy)(a, m, z, skip_self)


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
