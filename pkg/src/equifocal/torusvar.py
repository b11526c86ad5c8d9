"""Abelian subspace families, the subtorus test and transport by isometries."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm

import numpy as np

from . import _linalg, symspace
from ._ode import projector_transport
from .errors import InputError, PreconditionError
from .orbits import OrbitGerm

RATIONAL_TOL = 1e-14
INCONCLUSIVE_TOL = 1e-9
INCONCLUSIVE_Q = 1000
DEFAULT_Q = 10 ** 6
# a match p/q within tol is trusted only when q^2 * tol stays below this
COINCIDENCE = 1e-3         # accepted chance of a spurious rational match per entry
NOISE_FACTOR = 64          # round-off of the reduced form is below ~13 eps cond on random instances


@dataclass(frozen=True, eq=False)
class LatticeSubspace:
    torus_lattice: np.ndarray      # columns x_1 .. x_l
    subspace: np.ndarray           # columns spanning the d-plane (ambient coordinates)
    rational_basis: np.ndarray | None = None   # integer coefficient columns


@dataclass(frozen=True, eq=False)
class SubtorusResult:
    decided: bool | None           # True / False / None (inconclusive)
    lattice_subspace: LatticeSubspace
    witness: dict = field(default_factory=dict)

    def __bool__(self):
        return bool(self.decided)


def _rref(m: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form with partial pivoting; returns (R, pivot columns)."""
    a = np.array(m, dtype=float)
    rows, cols = a.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        p = r + int(np.argmax(np.abs(a[r:, c])))
        if abs(a[p, c]) <= 1e-10 * max(1.0, float(np.max(np.abs(a)))):
            continue
        a[[r, p]] = a[[p, r]]
        a[r] /= a[r, c]
        for i in range(rows):
            if i != r:
                a[i] -= a[i, c] * a[r]
        pivots.append(c)
        r += 1
    return a[:r], pivots


def _first_convergent_within(v: float, max_denominator: int, tol: float) -> tuple[Fraction, float]:
    """First continued-fraction convergent of v within tol (or the last one with q <= bound)."""
    exact = Fraction(v)
    p0, q0, p1, q1 = 0, 1, 1, 0
    rest = exact
    best = Fraction(round(v))
    while True:
        a = rest.numerator // rest.denominator
        p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
        if q1 > max_denominator:
            break
        best = Fraction(p1, q1)
        if abs(v - p1 / q1) <= tol or rest == a:
            break
        rest = 1 / (rest - a)
    return best, abs(v - best.numerator / best.denominator)


def subtorus_test(lattice, subspace, max_denominator: int = DEFAULT_Q, tol: float = RATIONAL_TOL) -> SubtorusResult:
    """Decide whether span(subspace) is spanned by lattice vectors.

    The plane is written in lattice coordinates and row reduced; it is rational
    iff every entry of the reduced form is rational.  Entries are matched to
    fractions with denominator at most ``max_denominator``, further capped where
    a chance match within the tolerance becomes likely.  Returns
    ``decided = None`` when an entry is near a fraction but cannot be
    separated from an irrational at double precision.  The tolerance grows with
    the conditioning of the lattice and of the plane's lattice coordinates.
    """
    x = np.asarray(lattice, float)
    s = np.asarray(subspace, float)
    if s.ndim == 1:
        s = s[:, None]
    if x.shape[0] != x.shape[1] or np.linalg.matrix_rank(x) < x.shape[0]:
        raise InputError("lattice basis must be square and linearly independent")
    coords = np.linalg.solve(x, s)
    red, pivots = _rref(coords.T)
    if red.shape[0] < s.shape[1]:
        raise InputError("subspace spanning vectors are linearly dependent")
    kappa = float(np.linalg.cond(x) * np.linalg.cond(coords))
    tol = max(tol, NOISE_FACTOR * np.finfo(float).eps * kappa)
    # one decisively irrational entry settles the question; ambiguity only matters otherwise
    fracs, ambiguous = [], None
    ls = LatticeSubspace(x, s)
    for i in range(red.shape[0]):
        row = []
        for j in range(red.shape[1]):
            v = float(red[i, j])
            scale = max(1.0, abs(v))
            # beyond q_cert a random real lies within tol of some fraction with odds > COINCIDENCE
            q_cert = min(max_denominator, int(np.sqrt(COINCIDENCE / (tol * scale))))
            f, err = _first_convergent_within(v, q_cert, tol * scale)
            witness = {"row": i, "col": j, "value": v, "best_fraction": str(f), "error": err,
                       "max_denominator": q_cert}
            if err > tol * scale:
                near = Fraction(v).limit_denominator(INCONCLUSIVE_Q)
                if abs(v - near.numerator / near.denominator) > INCONCLUSIVE_TOL:
                    return SubtorusResult(False, ls, witness)
                witness["near_fraction"] = str(near)
                ambiguous = ambiguous or witness
            row.append(f)
        fracs.append(row)
    if ambiguous is not None:
        return SubtorusResult(None, ls, ambiguous)
    ints = []
    for row in fracs:
        den = lcm(*[f.denominator for f in row]) if row else 1
        ints.append([int(f * den) for f in row])
    basis = np.array(ints, dtype=float).T
    return SubtorusResult(True, LatticeSubspace(x, s, basis), {"pivots": pivots})


# -- families of abelian subspaces ---------------------------------------------------


@dataclass(frozen=True, eq=False)
class TorusFamily:
    times: np.ndarray
    bases: list                  # moving orthonormal bases (ambient coordinates)

    def comparison_isometry(self, i: int, i0: int = 0) -> np.ndarray:
        """Linear map E(t_i0) -> E(t_i) sending v_k(t_i0) to v_k(t_i)."""
        return self.bases[i] @ self.bases[i0].T


def torus_family(times, subspaces) -> TorusFamily:
    """Orthonormal moving bases, each rotated to best match the previous one."""
    bases = []
    for s in subspaces:
        q = _linalg.orthonormal_span(np.asarray(s, float), scale=1.0)
        if bases:
            prev = bases[-1]
            m = q.T @ prev
            q = q @ _linalg.polar_orthogonal(m)
        bases.append(q)
    return TorusFamily(np.asarray(times, float), bases)


def family_abelian_residual(germ: symspace.SymmetricSpaceGerm, family: TorusFamily) -> float:
    return max((symspace.abelian_residual(germ, b) for b in family.bases), default=0.0)


def lattice_rigidity_check(family: TorusFamily, lattice, lipschitz: float = 5.0,
                           angle_tol: float = 1e-8) -> dict:
    """Constancy of a smooth family of subtorus planes.

    Every member must pass the subtorus test.  Smoothness is checked as a
    bound on principal-angle change per unit parameter; a family that jumps
    violates the hypothesis and is reported as not applicable.
    """
    for i, b in enumerate(family.bases):
        res = subtorus_test(lattice, b)
        if res.decided is not True:
            raise PreconditionError(f"member {i} (t = {family.times[i]:.6g}) is not a subtorus plane"
                                    f" (test result {res.decided})")
    rate = 0.0
    for i in range(1, len(family.bases)):
        dt = float(family.times[i] - family.times[i - 1])
        ang = float(np.max(_linalg.principal_angles(family.bases[i - 1], family.bases[i]), initial=0.0))
        rate = max(rate, ang / dt if dt > 0 else np.inf)
    max_angle = max((float(np.max(_linalg.principal_angles(family.bases[0], b), initial=0.0))
                     for b in family.bases), default=0.0)
    if rate > lipschitz:
        return {"passed": False, "applicable": False, "max_angle": max_angle, "max_rate": rate,
                "reason": "smoothness hypothesis violated"}
    return {"passed": max_angle <= angle_tol, "applicable": True, "max_angle": max_angle, "max_rate": rate,
            "reason": "constant" if max_angle <= angle_tol else "family moves"}


# -- isometries and normal transport ---------------------------------------------------


def isometry_transport_check(germ: OrbitGerm, z, t_values=(0.25, 0.5, 0.75, 1.0), n_vectors: int = 3,
                             seed=0, steps_per_unit: int = 200, isometry=None) -> dict:
    """Compare ``g(t)_* v`` with ODE normal transport along ``c(t) = exp(tZ).q``.

    ``isometry(t)`` returns the Ad matrix of g(t); it defaults to ``exp(tZ)``.
    """
    amb = germ.ambient
    z = np.asarray(z, float)
    iso = isometry or (lambda t: amb.group_exp(t * z))
    g0 = iso(0.0)
    if float(np.max(np.abs(g0 - np.eye(amb.dim_g)))) > 1e-10:
        raise InputError("isometry curve must start at the identity")
    rng = np.random.default_rng(seed)
    vecs = [amb.embed(germ.normal_vector(rng.standard_normal(germ.codim))) for _ in range(n_vectors)]
    proj = lambda t: germ.normal_projector_at(amb.group_exp(t * z))
    worst, map_res = 0.0, 0.0
    for t in t_values:
        gt = iso(t)
        pn = proj(t)
        for v in vecs:
            w = gt @ v
            map_res = max(map_res, float(np.linalg.norm(w - pn @ w)))
        if map_res > 1e-6:
            raise InputError(f"g(t) does not map normal spaces onto normal spaces (residual {map_res:.3g})")
        steps = max(8, int(np.ceil(steps_per_unit * abs(t) * max(1.0, float(np.linalg.norm(z))))))
        for v in vecs:
            ode = projector_transport(proj, v, t, steps) if t else v
            worst = max(worst, float(np.linalg.norm(gt @ v - ode)))
    return {"residual": worst, "mapping_residual": map_res, "passed": worst <= 1e-5}


def killing_field_normality(germ: symspace.SymmetricSpaceGerm, flat_basis, y, n_samples: int = 10, seed=0,
                            fd_step: float = 1e-5) -> dict:
    """Tangential part of the Killing field of y along the flat torus exp(E).

    Requires ``pr_p y`` perpendicular to E.  The field and the torus tangents
    are both evaluated by finite differences in the Cartan embedding, which is
    conformal, so orthogonality there is orthogonality in N.
    """
    e = np.asarray(flat_basis, float)
    y = np.asarray(y, float)
    yp = y[germ.dim_k:]
    if float(np.linalg.norm(e.T @ yp)) > 1e-10 * max(1.0, float(np.linalg.norm(y))):
        raise InputError("the base velocity of the curve is not perpendicular to the flat")
    rng = np.random.default_rng(seed)
    worst = 0.0
    ey = lambda t, a: germ.cartan_embedding(germ.group_exp(t * y) @ germ.group_exp(germ.embed(e @ a)))
    for _ in range(n_samples):
        a = rng.uniform(-np.pi, np.pi, e.shape[1]) * 3.0
        xf = (ey(fd_step, a) - ey(-fd_step, a)) / (2 * fd_step)
        tans = []
        for j in range(e.shape[1]):
            da = np.zeros(e.shape[1])
            da[j] = fd_step
            tans.append((ey(0.0, a + da) - ey(0.0, a - da)) / (2 * fd_step))
        q = _linalg.orthonormal_span(np.stack(tans, axis=1), scale=1.0)
        nrm = float(np.linalg.norm(xf))
        if nrm > 1e-12:
            worst = max(worst, float(np.linalg.norm(q.T @ xf)) / nrm)
    return {"tangential_ratio": worst, "passed": worst <= 1e-6}
