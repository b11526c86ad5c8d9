"""Focal data from the differential of the normal exponential map.

For a normal vector eta at the base point, with ``lambda_h, w_h`` the
eigenpairs of the Jacobi operator ``R_eta``, the differential of
``exp^perp`` at eta splits into

    D(z)    = sum_h sin_l(1) <z, w_h> w_h                     (normal part)
    Dbar(z) = sum_h cos_l(1) <z, w_h> w_h - sin_l(1) <A_eta z, w_h> w_h

where ``sin_l(t) = sin(sqrt(l) t) / sqrt(l)`` and ``cos_l(t) = cos(sqrt(l) t)``
(hyperbolic functions for negative l).  Both blocks are expressed in the
parallel-translated frame, i.e. as p-vectors.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from . import symspace
from .errors import ResolutionError
from .orbits import OrbitGerm

KERNEL_TOL = 1e-8
EVENT_TOL = 1e-8
DEFAULT_STEPS = 512


def sin_lambda(lam, t: float = 1.0):
    lam = np.asarray(lam, float)
    x = np.sqrt(np.abs(lam)) * t
    pos = np.sinc(x / np.pi) * t
    with np.errstate(invalid="ignore", divide="ignore"):
        neg = np.where(x > 0, np.sinh(x) / np.where(x > 0, x, 1.0), 1.0) * t
    return np.where(lam >= 0, pos, neg)


def cos_lambda(lam, t: float = 1.0):
    lam = np.asarray(lam, float)
    x = np.sqrt(np.abs(lam)) * t
    return np.where(lam >= 0, np.cos(x), np.cosh(x))


@dataclass(frozen=True, eq=False)
class NormalExpDifferential:
    eta: np.ndarray                 # normal coordinates
    D_block: np.ndarray             # dp x r
    Dbar_block: np.ndarray          # dp x n
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    singular_values: np.ndarray

    @property
    def operator(self) -> np.ndarray:
        return np.hstack([self.Dbar_block, self.D_block])

    @property
    def multiplicity(self) -> int:
        s = self.singular_values
        if s.size == 0 or s[0] == 0.0:
            return int(s.size)
        return int(np.sum(s <= KERNEL_TOL * s[0]))

    @property
    def gap(self) -> dict:
        """Smallest retained and largest discarded relative singular values."""
        s = self.singular_values / (self.singular_values[0] if self.singular_values.size and self.singular_values[0] else 1.0)
        m = self.multiplicity
        kept = s[: s.size - m]
        dropped = s[s.size - m:]
        return {"smallest_kept": float(kept[-1]) if kept.size else None,
                "largest_dropped": float(dropped[0]) if dropped.size else None}


@dataclass(frozen=True, eq=False)
class _Direction:
    """Per-direction data reused across radii."""
    unit: np.ndarray
    mu: np.ndarray
    w: np.ndarray
    shape_unit: np.ndarray


def _direction_data(germ: OrbitGerm, u) -> _Direction:
    u = np.asarray(u, float)
    p_vec = germ.normal_vector(u)
    if germ.flat_ambient:
        mu = np.zeros(germ.dim_p)
        w = np.eye(germ.dim_p)
    else:
        r = symspace.jacobi_operator(germ.ambient, p_vec)
        mu, w = np.linalg.eigh((r + r.T) / 2)
    return _Direction(u, mu, w, germ.shape_operator(u))


def _assemble(germ: OrbitGerm, d: _Direction, t: float):
    lam = d.mu * t * t
    s = d.w @ np.diag(sin_lambda(lam)) @ d.w.T
    c = d.w @ np.diag(cos_lambda(lam)) @ d.w.T
    tb, nb = germ.tangent_basis, germ.normal_basis
    dmat = s @ nb
    dbar = c @ tb - s @ tb @ (t * d.shape_unit)
    return dmat, dbar, lam


def normal_exp_differential(germ: OrbitGerm, eta) -> NormalExpDifferential:
    eta = germ.normal_coords(eta)
    nrm = float(np.linalg.norm(eta))
    if nrm == 0.0:
        dmat, dbar = germ.normal_basis.copy(), germ.tangent_basis.copy()
        lam, w = np.zeros(germ.dim_p), np.eye(germ.dim_p)
    else:
        d = _direction_data(germ, eta / nrm)
        dmat, dbar, lam = _assemble(germ, d, nrm)
        w = d.w
    sv = np.linalg.svd(np.hstack([dbar, dmat]), compute_uv=False)
    return NormalExpDifferential(eta, dmat, dbar, lam, w, sv)


def focal_multiplicity(germ: OrbitGerm, eta) -> int:
    return normal_exp_differential(germ, eta).multiplicity


def _sigma_rel(germ: OrbitGerm, d: _Direction, t: float) -> float:
    dmat, dbar, _ = _assemble(germ, d, t)
    s = np.linalg.svd(np.hstack([dbar, dmat]), compute_uv=False)
    return float(s[-1] / s[0]) if s[0] > 0 else 0.0


def _refine_minimum(fn, ts, sig, i):
    """Golden-section search on the grid bracket around index i.

    The smallest singular value has a V-shaped minimum at a focal radius, so a
    bracketing search converges to machine precision where parabolic steps
    stall.
    """
    if i >= len(ts) - 1:
        return float(ts[i]), float(sig[i])
    a, b = float(ts[i - 1]), float(ts[i + 1])
    g = (np.sqrt(5.0) - 1) / 2
    c, e = b - g * (b - a), a + g * (b - a)
    fc, fe = fn(c), fn(e)
    while b - a > 1e-13 * max(1.0, abs(b)):
        if fc <= fe:
            b, e, fe = e, c, fc
            c = b - g * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, e, fe
            e = a + g * (b - a)
            fe = fn(e)
    t_star, s_star = (c, fc) if fc <= fe else (e, fe)
    if sig[i] < s_star:
        return float(ts[i]), float(sig[i])
    return float(t_star), float(s_star)


@dataclass(frozen=True, eq=False)
class FocalProfile:
    direction: np.ndarray
    events: list                 # (radius, multiplicity, min_singular_value)
    scan_limit: float
    scan: tuple = field(default=())   # (radii, sigma_min) of the coarse scan

    @property
    def radii(self) -> list[float]:
        return [e[0] for e in self.events]

    @property
    def multiplicities(self) -> list[int]:
        return [e[1] for e in self.events]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["radius", "multiplicity", "min_singular_value"])
        for r, m, s in self.events:
            w.writerow([f"{r:.12g}", m, f"{s:.6e}"])
        return buf.getvalue()


def default_scan_limit(germ: OrbitGerm, samples: int = 16, seed=0) -> float:
    """2.5 pi / sqrt(max Jacobi eigenvalue) for curved ambients; 4 |z0| for s-rep orbits.

    The curved default reaches past the first two conjugate radii of rank-one
    spaces without ending exactly on one of them.
    """
    if germ.flat_ambient:
        return 4.0 * float(np.linalg.norm(germ.point))
    rng = np.random.default_rng(seed)
    kmax = 0.0
    for v in list(np.eye(germ.dim_p)) + list(rng.standard_normal((samples, germ.dim_p))):
        v = v / np.linalg.norm(v)
        kmax = max(kmax, float(np.max(np.linalg.eigvalsh(symspace.jacobi_operator(germ.ambient, v)))))
    return float(2.5 * np.pi / np.sqrt(kmax)) if kmax > 0 else 10.0


def focal_profile(germ: OrbitGerm, direction, scan_limit: float | None = None,
                  steps: int = DEFAULT_STEPS, max_events: int | None = None) -> FocalProfile:
    """Focal radii along ``t -> t * direction`` with multiplicities.

    Local minima of the relative smallest singular value found on the coarse
    grid are refined by golden-section search; a minimum whose refined
    value is at most EVENT_TOL is a focal event.
    """
    u = germ.normal_coords(direction)
    u = u / np.linalg.norm(u)
    limit = default_scan_limit(germ) if scan_limit is None else float(scan_limit)
    d = _direction_data(germ, u)
    ts = np.linspace(0.0, limit, steps + 1)
    sig = np.array([_sigma_rel(germ, d, t) for t in ts])
    events = []
    for i in range(1, steps + 1):
        right = sig[i + 1] if i < steps else np.inf
        if not (sig[i] <= sig[i - 1] and sig[i] <= right):
            continue
        t_star, s_star = _refine_minimum(lambda t: _sigma_rel(germ, d, t), ts, sig, i)
        if s_star > EVENT_TOL or t_star <= 0:
            continue
        if events and abs(t_star - events[-1][0]) <= 1e-8:
            if focal_multiplicity(germ, t_star * u) != events[-1][1]:
                raise ResolutionError(f"focal events closer than 1e-8 near t = {t_star:.10g}")
            continue
        events.append((t_star, focal_multiplicity(germ, t_star * u), s_star))
        if max_events and len(events) >= max_events:
            break
    return FocalProfile(u, events, limit, (ts, sig))


def profiles_agree(a: FocalProfile, b: FocalProfile, radius_tol: float = 1e-6) -> tuple[bool, float]:
    if len(a.events) != len(b.events):
        return False, float("inf")
    worst = 0.0
    for (ra, ma, _), (rb, mb, _) in zip(a.events, b.events):
        if ma != mb:
            return False, abs(ra - rb)
        worst = max(worst, abs(ra - rb))
    return worst <= radius_tol, worst


def preserves_focal_structure(psi, germ_p: OrbitGerm, germ_q: OrbitGerm | None = None, n_probes: int = 10,
                              seed=0, scan_limit: float | None = None, n_events: int = 2) -> dict:
    """Compare focal data of ``u`` at p with that of ``psi u`` at q over random unit normals.

    A probe passes when the first ``n_events`` focal events along u and psi u
    have equal multiplicities and radii within 1e-6, and the multiplicity at
    q of ``t psi u`` equals the one at p of ``t u`` at every event radius t.
    """
    germ_q = germ_q or germ_p
    psi = np.asarray(psi, float)
    rng = np.random.default_rng(seed)
    limit = default_scan_limit(germ_p) if scan_limit is None else scan_limit
    probes = []
    for k in range(n_probes):
        u = rng.standard_normal(germ_p.codim)
        u /= np.linalg.norm(u)
        pa = focal_profile(germ_p, u, limit, max_events=n_events)
        pb = focal_profile(germ_q, psi @ u, limit, max_events=n_events)
        ok, worst = profiles_agree(pa, pb)
        mults = [(r, m, focal_multiplicity(germ_q, r * (psi @ u))) for r, m, _ in pa.events]
        ok = ok and all(m == mq for _, m, mq in mults)
        probes.append({"probe": k, "direction": u.tolist(), "passed": bool(ok),
                       "radii_p": pa.radii, "mult_p": pa.multiplicities,
                       "radii_q": pb.radii, "mult_q": pb.multiplicities,
                       "radius_residual": worst})
    return {"passed": all(p["passed"] for p in probes), "n_probes": n_probes,
            "n_failed": sum(not p["passed"] for p in probes), "probes": probes}


def first_focal_distance(germ: OrbitGerm, u, scan_limit: float | None = None) -> float | None:
    prof = focal_profile(germ, u, scan_limit, max_events=1)
    return prof.events[0][0] if prof.events else None


def estimate_epsilon(germ: OrbitGerm, n_dirs: int = 16, seed=0, scan_limit: float | None = None) -> float:
    """Half the smallest first focal distance over sampled unit normals."""
    if germ.codim == 0:
        return float("inf")
    limit = default_scan_limit(germ) if scan_limit is None else scan_limit
    rng = np.random.default_rng(seed)
    dirs = list(np.eye(germ.codim)) + list(rng.standard_normal((n_dirs, germ.codim)))
    best = None
    for u in dirs:
        f = first_focal_distance(germ, u / np.linalg.norm(u), limit)
        if f is not None and (best is None or f < best):
            best = f
    return 0.5 * (best if best is not None else limit)
