"""Experiments that tie the modules together: the polynomial
characterization check, the conjugated counterexample, and Green grids."""

from __future__ import annotations

import configparser
import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .archimedean import (
    GreenEvaluator,
    T_F,
    _level_preimages,
    complex_lift,
    green_grid,
    lambda_at_infinity,
    preimage_measure,
)
from .berkdyn import berk_equilibrium_check, detect_reduction
from .berkovich import BerkPoint, format_point, hsia_can
from .fields import INF, is_inf, make_field, valuation
from .lifts import RationalMap, green_offset, moebius, normalize_lift
from .measures import CINF
from .potential import energy_detail, log_chordal, potential

__all__ = [
    "SCHEMA_VERSION",
    "ExperimentConfig",
    "parse_config",
    "load_config",
    "run_characterize",
    "run_optimal_counterexample",
    "emit_green_grid",
    "dumps_report",
]

SCHEMA_VERSION = 1
# O(n^2) energies stay near a second up to this many atoms
PRUNED_ATOMS = 8192


@dataclass(frozen=True)
class ExperimentConfig:
    map: str
    field: str = "complex"
    depth: int = 12
    max_atoms: int | None = None
    seed: int = 0
    samples: int = 32
    tol_direct: float = 1e-9
    tol_riesz: float = 1e-6
    tol_energy: float = 5e-3
    margin_tol: float = 5e-3
    search_depth: int = 10

    def echo(self) -> dict:
        return asdict(self)


_INT_KEYS = {"depth", "seed", "samples", "search_depth"}
_FLOAT_KEYS = {"tol_direct", "tol_riesz", "tol_energy", "margin_tol"}


def parse_config(text: str) -> ExperimentConfig:
    """Read ``key = value`` lines (``#`` comments, optional ``[section]``)."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    body = text if text.lstrip().startswith("[") else "[experiment]\n" + text
    cp.read_string(body)
    section = cp[cp.sections()[0]]
    known = set(ExperimentConfig.__dataclass_fields__)
    kw = {}
    for key, raw in section.items():
        if key not in known:
            raise ValueError(f"unknown config key {key!r}")
        val = raw.strip()
        if key in _INT_KEYS:
            kw[key] = int(val)
        elif key in _FLOAT_KEYS:
            kw[key] = float(val)
        elif key == "max_atoms":
            kw[key] = None if val.lower() in ("", "none", "all") else int(val)
        else:
            kw[key] = val
    if "map" not in kw:
        raise ValueError("config needs a 'map' entry")
    return ExperimentConfig(**kw)


def load_config(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text())


# ------------------------------------------------------------------ output


def _clean(x):
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x) or math.isinf(x):
            return str(x)
        return float(f"{x:.12g}")
    if isinstance(x, complex):
        return [_clean(x.real), _clean(x.imag)]
    return x


def dumps_report(report: dict) -> str:
    """Stable JSON text: fixed key order, floats at 12 significant digits."""
    return json.dumps(_clean(report), indent=2) + "\n"


def _residual(name, value, tol, note=None):
    if value is None:
        return {"name": name, "value": None, "tolerance": tol, "pass": None, "note": note or "not applicable"}
    v = float(value) if not isinstance(value, Fraction) else value
    out = {"name": name, "value": v, "tolerance": tol, "pass": bool(abs(v) <= tol)}
    if note:
        out["note"] = note
    return out


# ----------------------------------------------------------- complex branch


def _complex_branch(cfg: ExperimentConfig, f: RationalMap) -> dict:
    rng = np.random.default_rng(cfg.seed)
    Fn = normalize_lift(complex_lift(f.lift))[0]
    fc = RationalMap(Fn)
    G = GreenEvaluator(fc, lift=Fn)
    d = f.d
    max_atoms = cfg.max_atoms
    notes = []
    if max_atoms is None and d ** cfg.depth > PRUNED_ATOMS:
        max_atoms = PRUNED_ATOMS
        notes.append(f"d^depth exceeds {PRUNED_ATOMS}; preimage levels subsampled to {max_atoms} atoms (seeded)")
    mu = preimage_measure(fc, None, cfg.depth, max_atoms=max_atoms, rng_seed=cfg.seed)
    atoms, m = mu.points, mu.masses
    finite = np.isfinite(atoms.real)
    s2 = 1.0 - float(m @ m)
    E = energy_detail(mu.finite_part(), INF) if finite.all() else None
    I = E.value / s2 if E is not None else None
    if E is not None and E.clamped:
        notes.append(f"{E.clamped} coincident atom pairs clamped to the log floor")
    P0, P1 = Fn.F0, Fn.F1

    def fmap(z):
        with np.errstate(all="ignore"):
            q = np.polyval(np.array(P0.coeffs[::-1]), z)
            val = np.polyval(np.array(P1.coeffs[::-1]), z) / q
        return np.where(q == 0, CINF, val)

    reach = float(np.max(np.abs(atoms[finite]))) if finite.any() else 1.0
    res = []

    # d g(z) - g(f z) = T_F at random points
    zr = (rng.uniform(-1, 1, 100) + 1j * rng.uniform(-1, 1, 100)) * 2 * (reach + 1)
    fz = fmap(zr)
    r_inv = np.max(np.abs(d * G(zr) - G(fz) - T_F(Fn, zr)))
    res.append(_residual("invarianceGreen", r_inv, cfg.tol_direct))

    # Phi(f z, w) = sum over u in f^-1(w) of Phi(z, u)
    f0 = np.array([complex(P0[k]) for k in range(d + 1)])
    f1 = np.array([complex(P1[k]) for k in range(d + 1)])
    zs = (rng.uniform(-1, 1, 20) + 1j * rng.uniform(-1, 1, 20)) * (reach + 1)
    ws = (rng.uniform(-1, 1, 20) + 1j * rng.uniform(-1, 1, 20)) * (reach + 1)
    pre = _level_preimages(f0, f1, ws).reshape(len(ws), d)

    def phi(a, b):
        return log_chordal(a, b) - G(np.asarray(a, complex)) - G(np.asarray(b, complex))

    lhs = phi(fmap(zs), ws)
    rhs = sum(phi(zs, pre[:, k]) for k in range(d))
    res.append(_residual("Riesz", np.max(np.abs(lhs - rhs)), cfg.tol_riesz))

    g_inf = G(CINF)
    if I is not None:
        res.append(_residual("energyinfty", I + 2 * g_inf, cfg.tol_energy))
    else:
        res.append(_residual("energyinfty", None, cfg.tol_energy, "measure has atoms at infinity"))
    if f.fixes_infinity and I is not None:
        res.append(_residual("coeffnum", math.log(abs(complex(Fn.c1))) + (d - 1) * I / 2, cfg.tol_energy))
    else:
        res.append(_residual("coeffnum", None, cfg.tol_energy, "f does not fix infinity"))

    # exterior samples for the potential identities
    rad = reach * rng.uniform(1.5, 3.0, cfg.samples)
    ang = rng.uniform(0, 2 * math.pi, cfg.samples)
    ext = rad * np.exp(1j * ang)
    if I is not None:
        nu = mu.finite_part()
        p_ext = potential(nu, INF, ext)
        log_zinf = -0.5 * np.log1p(np.abs(ext) ** 2)
        r_cont = np.max(np.abs(p_ext - (G(ext) - log_zinf + I / 2)))
        res.append(_residual("continuity", r_cont, cfg.tol_energy))
        fe = fmap(ext)
        ok = np.isfinite(fe.real)
        p_fe = potential(nu, INF, fe[ok])
        with np.errstate(divide="ignore"):
            l0 = np.log(np.abs(np.polyval(np.array(P0.coeffs[::-1]), ext[ok])))
        r_var = np.max(np.abs(d * p_ext[ok] - p_fe - (d - 1) * I / 2 - l0))
        res.append(_residual("invariance", r_var, cfg.tol_energy))
        l0_atoms = np.log(np.abs(np.polyval(np.array(P0.coeffs[::-1]), atoms)))
        res.append(_residual("lemniscateintegral", float(m @ l0_atoms) - (d - 1) * I / 2, cfg.tol_energy))
    else:
        for name in ("continuity", "invariance", "lemniscateintegral"):
            res.append(_residual(name, None, cfg.tol_energy, "measure has atoms at infinity"))

    fa = fmap(atoms)
    with np.errstate(divide="ignore"):
        prox = log_chordal(fa, atoms) - G(fa) - G(atoms)
    prox = np.maximum(prox, -1e6)
    res.append(_residual("vanish", float(m @ prox), cfg.tol_energy))

    # sup over atoms of |p(atom) - I|, potential of the other atoms
    if I is not None:
        p_at = potential(mu.finite_part(), INF, atoms, skip_self=True) / (1 - m)
        margin = float(np.max(np.abs(p_at - I)))
    else:
        margin = math.inf
    res.append(_residual("sup_margin", margin, cfg.margin_tol))

    lam = lambda_at_infinity(f) if f.fixes_infinity else None
    fatou_heur = None if lam is None else bool(abs(complex(lam)) < 1)
    checks = {
        "polynomial": f.is_polynomial,
        "fixes_infinity": f.fixes_infinity,
        "multiplier_at_infinity": None if lam is None else abs(complex(lam)),
        "infinity_in_fatou_heuristic": fatou_heur,
        "atoms": len(mu),
        "energy": I,
        "green_at_infinity": g_inf,
    }
    all_pass = all(r["pass"] for r in res if r["pass"] is not None)
    if f.is_polynomial and all_pass:
        verdict = "polynomial-consistent"
        certified = "f is a polynomial; every identity implied by polynomiality holds within tolerance"
    elif not f.is_polynomial and (not f.fixes_infinity or fatou_heur is False or margin > 10 * cfg.margin_tol):
        verdict = "characterization-violated"
        reasons = []
        if not f.fixes_infinity:
            reasons.append("f(inf) != inf (exact)")
        if fatou_heur is False:
            reasons.append("infinity is not attracting (heuristic basin)")
        if margin > 10 * cfg.margin_tol:
            reasons.append("sup |p_mu - I| over Julia samples exceeds 10x margin_tol")
        certified = "constant potential on the Julia set fails for this non-polynomial map: " + "; ".join(reasons)
    else:
        verdict = "inconclusive"
        certified = "numerics neither confirm nor refute a constant potential on the Julia set within tolerance"
    notes.append("Julia samples are the preimage atoms; basin membership is heuristic")
    return {"residuals": res, "checks": checks, "verdict": verdict, "certified": certified, "notes": notes}


# ------------------------------------------------------- non-archimedean


def _padic_branch(cfg: ExperimentConfig, f: RationalMap) -> dict:
    p = f.field.p
    verdict_r = detect_reduction(f, cfg.search_depth)
    res = []
    checks = {"polynomial": f.is_polynomial, "fixes_infinity": f.fixes_infinity,
              "reduction": verdict_r.as_dict()}
    notes = ["logarithms are exact rationals in units of log p"]
    d = f.d
    V = green_offset(f.lift)
    L = f.lift
    lc0 = -Fraction(valuation(L.c0, p))
    lc1 = -Fraction(valuation(L.c1, p))
    if verdict_r.status in ("good", "potentially-good"):
        eq = berk_equilibrium_check(f, verdict_r.witness)
        checks["equilibrium"] = eq
        ok = eq.get("verified", False)
        res.append({"name": "totally_invariant_witness", "value": 0 if ok else 1, "tolerance": 0, "pass": ok})
        verdict = "potentially-good-reduction"
        certified = "final assertion: infinity in F(f) and mu_f = nu_inf = delta at the witness" if ok else \
            "witness found but the pullback check failed"
        return {"residuals": res, "checks": checks, "verdict": verdict, "certified": certified, "notes": notes}
    if f.is_polynomial:
        # normalized lift lambda F has log|lambda| = V (d-1)/2; g_f(inf) = log|c1~|/(d-1)
        loglam = V * (d - 1) / 2
        I = -2 * (lc1 + loglam) / (d - 1)
        res.append({"name": "lemniscate", "value": (lc0 + loglam) - (d - 1) * I / 2, "tolerance": 0,
                    "pass": (lc0 + loglam) - (d - 1) * I / 2 == 0})
        checks["energy"] = I
        verdict = "polynomial-consistent"
        certified = "f is a polynomial; log|F0(1,.)| = (d-1) I/2 holds exactly for the normalized lift"
    elif not f.fixes_infinity:
        verdict = "characterization-violated"
        certified = "f(inf) != inf (exact) and no potentially good reduction was found"
    else:
        verdict = "inconclusive"
        certified = "no witness found; exact checks do not decide a constant potential on the Julia set"
    return {"residuals": res, "checks": checks, "verdict": verdict, "certified": certified, "notes": notes}


def run_characterize(cfg: ExperimentConfig) -> dict:
    field_ = make_field(cfg.field)
    f = RationalMap.parse(cfg.map, field_)
    if f.d < 2:
        raise ValueError("the map must have degree > 1")
    body = _complex_branch(cfg, f) if field_.is_archimedean else _padic_branch(cfg, f)
    return {
        "schema_version": SCHEMA_VERSION,
        "experiment": "characterize",
        "config": cfg.echo(),
        "map": f.describe(),
        "degree": f.d,
        **body,
    }


# ----------------------------------------------------------- counterexample


def run_optimal_counterexample(p: int, d: int, c, z0, search_depth: int = 10) -> dict:
    """Conjugate ``f = z^d + c`` by ``m(z) = 1/(z - z0)`` and check exactly:
    (i) no potentially good reduction is found for the conjugate ``phi``,
    (ii) ``phi(inf) != inf``, (iii) ``f(z0) != z0``, and (iv)
    ``[z0, inf] < [zeta(0, R), z0]_can`` with ``R = |c|^(1/d)``, which bounds
    the kernel from below on the filled Julia set ``|z| <= R``.
    """
    field_ = make_field(p)
    c, z0 = Fraction(c), Fraction(z0)
    notes = []
    pre = {"abs_c_gt_1": c != 0 and valuation(c, p) < 0, "degree_gt_1": d > 1}
    report = {
        "schema_version": SCHEMA_VERSION,
        "experiment": "counterexample",
        "config": {"p": p, "d": d, "c": c, "z0": z0, "search_depth": search_depth},
        "preconditions": pre,
    }
    if not all(pre.values()):
        report["verdict"] = "precondition-failed"
        report["notes"] = ["need |c|_p > 1 (otherwise z^d + c has good reduction) and d > 1"]
        return report
    f = RationalMap.from_polys([c] + [0] * (d - 1) + [1], [1], field_)
    m = moebius(0, 1, 1, -z0, field_)
    phi = f.conjugate(m)
    red = detect_reduction(phi, search_depth)
    phi_inf = phi(INF)
    fz0 = f(z0)
    Rv = Fraction(valuation(c, p), d)  # R = p^(-Rv)
    zeta = BerkPoint(Fraction(0), Rv, p)
    Z0 = BerkPoint.classical(z0, p)
    lhs = hsia_can(Z0, INF, p)
    rhs = hsia_can(zeta, Z0, p)
    checks = [
        {"name": "no_potentially_good_reduction", "pass": red.status == "none-found",
         "detail": red.as_dict()},
        {"name": "phi_does_not_fix_infinity", "pass": not is_inf(phi_inf),
         "detail": {"phi(inf)": "inf" if is_inf(phi_inf) else str(phi_inf)}},
        {"name": "z0_not_fixed", "pass": fz0 != z0, "detail": {"f(z0)": str(fz0)}},
        {"name": "perturbation_inequality", "pass": lhs < rhs,
         "detail": {"[z0,inf]_can": repr(lhs), "[zeta(0,R),z0]_can": repr(rhs), "R": repr(zeta.radius)}},
    ]
    if not checks[3]["pass"]:
        notes.append("z0 is not p-adically close to infinity; take |z0|_p > max(1, R)")
    report.update({
        "f": f.describe(),
        "phi": phi.describe(),
        "checks": checks,
        "verdict": "all-checks-pass" if all(ch["pass"] for ch in checks) else "checks-failed",
        "notes": notes,
    })
    return report


# --------------------------------------------------------------- green grid


def emit_green_grid(f: RationalMap, window, res: int, out_prefix, eps: float = 1e-12):
    """Write ``<prefix>.csv`` and ``<prefix>.pgm`` with ``g_f`` on the grid.

    Returns the grid array.  Rows run over increasing ``y``.
    """
    if not f.field.is_archimedean:
        raise ValueError("Green grids need the complex field")
    G = GreenEvaluator.normalized(f)
    grid, xs, ys = green_grid(G, window, res, eps)
    x0, x1, y0, y1 = (float(t) for t in window)
    header = [
        f"green function g_f of f = {f.describe()}",
        f"window x0={x0!r} x1={x1!r} y0={y0!r} y1={y1!r}",
        f"resolution {res}",
        "row i is y = y0 + i*(y1-y0)/(res-1), column j is x = x0 + j*(x1-x0)/(res-1); res 1 samples (x0, y0)",
    ]
    prefix = Path(out_prefix)
    with open(prefix.with_suffix(".csv"), "w") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        for row in grid:
            fh.write(",".join(f"{v:.12g}" for v in row) + "\n")
    lo, hi = float(grid.min()), float(grid.max())
    span = hi - lo
    img = np.zeros(grid.shape, dtype=np.uint8) if span == 0 else \
        np.round((grid - lo) / span * 255).astype(np.uint8)
    with open(prefix.with_suffix(".pgm"), "wb") as fh:
        fh.write(b"P5\n")
        fh.write(f"# window {x0!r} {x1!r} {y0!r} {y1!r} values {lo:.12g}..{hi:.12g}\n".encode())
        fh.write(f"{res} {res}\n255\n".encode())
        fh.write(img.tobytes())
    return grid
