"""Partial tubes around an orbit, equifocality checks and reconstruction.

A frame isometry ``psi = U g`` (``g`` in the polar group at the base point,
``U`` the normal transport along a base curve ending at ``h.q``) sends
normal coordinates at q to body normal coordinates at ``h.q``.  The partial
tube is the set of ``psi xi``; its exponential image is a submanifold of N
whose points are ``h exp(N psi xi) . o`` (pulled back).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.optimize
from scipy.spatial import cKDTree

from . import _linalg, liealg, symspace
from ._ode import projector_transport
from .errors import ConsistencyError, DependencyError, InputError, PreconditionError, TubeRadiusError
from .focal import estimate_epsilon, normal_exp_differential, preserves_focal_structure, sin_lambda
from .holonomy import CurvatureEndoAlgebra, sample_curves, small_loops
from .orbits import OrbitGerm, close_loop, curve_transport_matrix, loop_holonomy, segment_transport

ABELIAN_TOL = 1e-8
FLAT_TOL = 1e-4
HAUSDORFF_TOL = 1e-5


@dataclass(frozen=True, eq=False)
class FrameIsometry:
    segments: tuple
    element: np.ndarray       # h, base point h.q
    transport: np.ndarray     # U
    group: np.ndarray         # g

    @property
    def matrix(self) -> np.ndarray:
        return self.transport @ self.group

    def __call__(self, u):
        return self.matrix @ np.asarray(u, float)


@dataclass(frozen=True, eq=False)
class TubeFibre:
    segments: tuple
    element: np.ndarray
    transported_xi: np.ndarray
    orbit_samples: list


@dataclass(frozen=True, eq=False)
class PartialTube:
    germ: OrbitGerm
    xi: np.ndarray
    hat_g: CurvatureEndoAlgebra
    fibres: list
    principal: bool
    orbit_dim: int
    frame_isometries: list
    epsilon: float
    meta: dict = field(default_factory=dict)

    @property
    def codim(self) -> int:
        """Codimension of the exponential image in N."""
        return self.germ.codim - self.orbit_dim

    @property
    def fibre_dim(self) -> int:
        return self.orbit_dim


# -- group orbits in the normal space --------------------------------------------


def orbit_tangent(hat_g: CurvatureEndoAlgebra, v) -> np.ndarray:
    v = np.asarray(v, float)
    if hat_g.dim == 0:
        return np.zeros((v.size, 0))
    return np.stack([x @ v for x in hat_g.basis], axis=1)


def orbit_dimension(hat_g: CurvatureEndoAlgebra, v) -> int:
    t = orbit_tangent(hat_g, v)
    if t.size == 0 or float(np.linalg.norm(v)) == 0.0:
        return 0
    return _linalg.orthonormal_span(t, scale=float(np.linalg.norm(v))).shape[1]


def principal_orbit_dimension(hat_g: CurvatureEndoAlgebra, samples: int = 8, seed=0) -> int:
    rng = np.random.default_rng(seed)
    return max([0] + [orbit_dimension(hat_g, rng.standard_normal(hat_g.space_dim)) for _ in range(samples)])


def isotropy_algebra(hat_g: CurvatureEndoAlgebra, v) -> np.ndarray:
    """Basis (k, r, r) of {X in hat_g : X v = 0}."""
    if hat_g.dim == 0:
        return np.zeros((0, hat_g.space_dim, hat_g.space_dim))
    t = orbit_tangent(hat_g, v)
    ns = _linalg.null_space(t, scale=max(1.0, float(np.linalg.norm(v))))
    return np.einsum("ka,kij->aij", ns, hat_g.basis)


def orbit_complement_coords(hat_g: CurvatureEndoAlgebra, v) -> np.ndarray:
    """Coefficient vectors (columns) spanning a complement of the isotropy of v."""
    if hat_g.dim == 0:
        return np.zeros((0, 0))
    t = orbit_tangent(hat_g, v)
    u, s, vt = np.linalg.svd(t)
    rank = int(np.sum(s > _linalg.RANK_TOL * max(1.0, float(np.linalg.norm(v)))))
    return vt[:rank].T


def section(hat_g: CurvatureEndoAlgebra, v) -> np.ndarray:
    """Orthonormal basis (normal coordinates) of the normal space to the orbit through v."""
    t = orbit_tangent(hat_g, v)
    span = _linalg.orthonormal_span(t, scale=max(1.0, float(np.linalg.norm(v)))) if t.size else np.zeros((hat_g.space_dim, 0))
    return _linalg.complement(span, hat_g.space_dim)


def group_exp(hat_g: CurvatureEndoAlgebra, coeffs) -> np.ndarray:
    if hat_g.dim == 0:
        return np.eye(hat_g.space_dim)
    return scipy.linalg.expm(np.einsum("i,ijk->jk", np.asarray(coeffs, float), hat_g.basis))


# -- building the tube -------------------------------------------------------------


def build_partial_tube(germ: OrbitGerm, xi, hat_g: CurvatureEndoAlgebra | None, n_curves: int = 12,
                       n_group: int = 24, seed=0, max_length: float = 2.0,
                       epsilon: float | None = None) -> PartialTube:
    if hat_g is None:
        raise DependencyError("the polar group algebra must be built before the tube")
    xi = germ.normal_coords(xi)
    eps = epsilon if epsilon is not None else (germ.epsilon if germ.epsilon is not None else estimate_epsilon(germ))
    if float(np.linalg.norm(xi)) >= eps:
        raise TubeRadiusError(f"|xi| = {np.linalg.norm(xi):.4g} is not below the tube radius {eps:.4g}")
    odim = orbit_dimension(hat_g, xi)
    principal = odim == principal_orbit_dimension(hat_g, seed=seed) and float(np.linalg.norm(xi)) > 0
    curves = [[]] + sample_curves(germ, n_curves, seed, max_length)
    groups = [np.eye(germ.codim)] + [e.matrix for e in hat_g.sample(n_group, seed)]
    fibres, isos = [], []
    for c in curves:
        u, h = curve_transport_matrix(germ, c)
        samples = [u @ g @ xi for g in groups]
        fibres.append(TubeFibre(tuple(c), h, u @ xi, samples))
        isos.extend(FrameIsometry(tuple(c), h, u, g) for g in groups)
    return PartialTube(germ, xi, hat_g, fibres, bool(principal), odim, isos, float(eps),
                       {"n_curves": n_curves, "n_group": n_group, "seed": seed})


# -- points of the exponential image and their tangent spaces --------------------------


def _exp_element(germ: OrbitGerm, h, v) -> np.ndarray:
    amb = germ.ambient
    return h @ amb.group_exp(amb.embed(germ.normal_vector(v)))


def image_point(germ: OrbitGerm, h, v) -> np.ndarray:
    """Coordinates of ``exp(Ad(h) N v)`` at ``h.q`` (Cartan embedding, or p for s-rep)."""
    amb = germ.ambient
    if germ.kind == "srep":
        k = amb.dim_k
        return h[k:, k:] @ (germ.point + germ.normal_vector(v))
    return amb.cartan_embedding(_exp_element(germ, h, v))


def _sin_op(germ: OrbitGerm, y_p) -> np.ndarray:
    """sin(sqrt(R_y)) / sqrt(R_y) on p (identity in a flat ambient)."""
    if germ.flat_ambient:
        return np.eye(germ.dim_p)
    r = symspace.jacobi_operator(germ.ambient, y_p)
    w, v = np.linalg.eigh((r + r.T) / 2)
    return v @ np.diag(sin_lambda(w)) @ v.T


def tube_velocities(germ: OrbitGerm, hat_g: CurvatureEndoAlgebra, h, u, g, xi) -> np.ndarray:
    """Ambient velocities (pulled-back g coordinates) of the tube at the point for (h, U, g).

    Columns: base directions (``germ.m_unit``) then polar-group directions.
    """
    amb = germ.ambient
    v = u @ g @ xi
    y_p = germ.normal_vector(v)
    cols = []
    if germ.kind == "srep":
        k = amb.dim_k
        z = amb.embed(germ.point + y_p)
        for i in range(germ.dim):
            zi = germ.m_unit[:, i]
            dv = -germ.normal_connection_form(zi) @ v
            cols.append(h @ (amb.bracket(zi, z) + amb.embed(germ.normal_vector(dv))))
        for x in hat_g.basis:
            cols.append(h @ amb.embed(germ.normal_vector(u @ x @ g @ xi)))
    else:
        ey = amb.group_exp(amb.embed(y_p))
        s_op = _sin_op(germ, y_p)
        proj = amb.tangent_projector(ey)
        for i in range(germ.dim):
            zi = germ.m_unit[:, i]
            dv = -germ.normal_connection_form(zi) @ v
            cols.append(h @ (proj @ zi + ey @ amb.embed(s_op @ germ.normal_vector(dv))))
        for x in hat_g.basis:
            cols.append(h @ ey @ amb.embed(s_op @ germ.normal_vector(u @ x @ g @ xi)))
    if not cols:
        return np.zeros((amb.dim_g, 0))
    return np.stack(cols, axis=1)


def _ambient_tangent_projector(germ: OrbitGerm, h, v) -> np.ndarray:
    amb = germ.ambient
    if germ.kind == "srep":
        return amb.p_embed @ amb.p_embed.T
    return amb.tangent_projector(_exp_element(germ, h, v))


def image_normal_projector(germ: OrbitGerm, hat_g, h, u, g, xi) -> np.ndarray:
    vel = tube_velocities(germ, hat_g, h, u, g, xi)
    ptan = _ambient_tangent_projector(germ, h, u @ g @ xi)
    if vel.size == 0:
        return ptan
    t = _linalg.orthonormal_span(vel, scale=1.0)
    return ptan - t @ t.T


def image_tangent_rank(germ: OrbitGerm, hat_g, h, u, g, xi) -> int:
    vel = tube_velocities(germ, hat_g, h, u, g, xi)
    return _linalg.orthonormal_span(vel, scale=1.0).shape[1] if vel.size else 0


# -- sections and the parallel normal field ------------------------------------------


def tube_normal_section(tube: PartialTube, eta=None) -> symspace.FlatSubspace:
    """Section through a fibre sample eta (normal coordinates at the base point)."""
    if not tube.principal:
        raise PreconditionError("the section is defined for principal tubes only")
    eta = tube.xi if eta is None else np.asarray(eta, float)
    return symspace.FlatSubspace(section(tube.hat_g, eta))


def section_residuals(germ: OrbitGerm, eta, sec: np.ndarray) -> dict:
    amb = germ.ambient
    vecs = [germ.normal_vector(sec[:, i]) for i in range(sec.shape[1])]
    br = 0.0
    for i in range(len(vecs)):
        for j in range(i + 1, len(vecs)):
            br = max(br, float(np.linalg.norm(amb.bracket(amb.embed(vecs[i]), amb.embed(vecs[j])))))
    curv = 0.0
    if not germ.flat_ambient:
        e = germ.normal_vector(eta)
        for a in vecs:
            curv = max(curv, float(np.linalg.norm(symspace.curvature_operator(amb, e, a))))
    return {"bracket": br, "curvature": curv}


def parallel_normal_field(tube: PartialTube, nu, iso: FrameIsometry | None = None) -> np.ndarray:
    """Value of the normal field induced by ``nu`` (section vector at xi) at ``exp(psi xi)``."""
    if not tube.principal:
        raise PreconditionError("parallel normal fields are defined on principal tubes")
    germ = tube.germ
    nu = np.asarray(nu, float)
    sec = section(tube.hat_g, tube.xi)
    if float(np.linalg.norm(nu - sec @ (sec.T @ nu))) > 1e-8 * max(1.0, float(np.linalg.norm(nu))):
        raise InputError("nu is not in the section through xi")
    if iso is None:
        iso = FrameIsometry((), np.eye(germ.ambient.dim_g), np.eye(germ.codim), np.eye(germ.codim))
    psi = iso.matrix
    diff = normal_exp_differential(germ, psi @ tube.xi)
    vec = diff.D_block @ (psi @ nu)
    amb = germ.ambient
    if germ.kind == "srep":
        return iso.element @ amb.embed(vec)
    return _exp_element(germ, iso.element, psi @ tube.xi) @ amb.embed(vec)


# -- loops in the image --------------------------------------------------------------


@dataclass
class _State:
    h: np.ndarray
    u: np.ndarray
    g: np.ndarray


def _advance(germ, hat_g, st: _State, piece, s: float) -> _State:
    kind, val = piece
    if kind == "base":
        return _State(st.h @ germ.ambient.group_exp(s * val), segment_transport(germ, val, s) @ st.u, st.g)
    return _State(st.h, st.u, scipy.linalg.expm(s * val) @ st.g)


def close_tube_loop(tube: PartialTube, base_segments, fibre_moves=()) -> tuple[list, float]:
    """Turn base segments plus fibre moves into a closed path in the exponential image."""
    germ, hat_g, xi = tube.germ, tube.hat_g, tube.xi
    pieces = []
    segs, err = close_loop(germ, list(base_segments)) if base_segments else ([], 0.0)
    pieces += [("base", z) for z in segs]
    pieces += [("fibre", x) for x in fibre_moves]
    st = _State(np.eye(germ.ambient.dim_g), np.eye(germ.codim), np.eye(germ.codim))
    for p in pieces:
        st = _advance(germ, hat_g, st, p, 1.0)
    phi = germ.normal_isotropy_action(st.h)
    target = np.linalg.solve(phi @ st.u, xi)
    g_xi = st.g @ xi

    def resid(c):
        return group_exp(hat_g, c) @ g_xi - target

    best = None
    rng = np.random.default_rng(0)
    for start in [np.zeros(hat_g.dim)] + list(rng.standard_normal((4, hat_g.dim))):
        sol = scipy.optimize.least_squares(resid, start, xtol=1e-15, ftol=1e-15, gtol=1e-15)
        e = float(np.linalg.norm(resid(sol.x)))
        if best is None or e < best[1]:
            best = (sol.x, e)
    c, e = best
    if hat_g.dim:
        pieces.append(("fibre", np.einsum("i,ijk->jk", c, hat_g.basis)))
    return pieces, max(err, e)


def transport_around_image_loop(tube: PartialTube, pieces, v0=None, steps: int = 120) -> dict:
    """Transport normal vectors of the exponential image around a closed path (projector ODE)."""
    germ, hat_g, xi = tube.germ, tube.hat_g, tube.xi
    st0 = _State(np.eye(germ.ambient.dim_g), np.eye(germ.codim), np.eye(germ.codim))
    p0 = image_normal_projector(germ, hat_g, st0.h, st0.u, st0.g, xi)
    basis = _linalg.orthonormal_span(p0, scale=1.0)
    vecs = [basis[:, i] for i in range(basis.shape[1])] if v0 is None else [np.asarray(v0, float)]
    out = []
    for v in vecs:
        st = st0
        w = v.copy()
        for piece in pieces:
            start = st

            def proj(s, start=start, piece=piece):
                cur = _advance(germ, hat_g, start, piece, s)
                return image_normal_projector(germ, hat_g, cur.h, cur.u, cur.g, xi)

            w = projector_transport(proj, w, 1.0, steps)
            st = _advance(germ, hat_g, start, piece, 1.0)
        out.append(float(np.linalg.norm(w - v)))
    return {"holonomy_residual": max(out) if out else 0.0, "n_vectors": len(vecs)}


# -- verification -----------------------------------------------------------------------


def verify_equifocal(tube: PartialTube, n_sections: int = 8, n_psi: int = 6, n_probes: int = 3,
                     n_loops: int = 2, seed=0, loop_steps: int = 100) -> dict:
    """Check abelian and globally flat normal bundle and constant focal distances."""
    germ, hat_g, xi = tube.germ, tube.hat_g, tube.xi
    if float(np.linalg.norm(xi)) == 0.0:
        return {"abelian": True, "globally_flat": True, "constant_focal": True, "degenerate": True,
                "worst_residuals": {}}
    if not tube.principal:
        raise PreconditionError("equifocality is verified on principal tubes")
    rng = np.random.default_rng(seed)
    worst = {"section_bracket": 0.0, "section_curvature": 0.0, "normal_space_angle": 0.0,
             "isotropy_on_section": 0.0, "holonomy_in_group": 0.0, "loop_transport": 0.0,
             "loop_closure": 0.0}
    isos = tube.frame_isometries
    picks = [isos[0]] + [isos[i] for i in rng.choice(len(isos), size=min(n_sections, len(isos)), replace=False)]
    sec_xi = section(hat_g, xi)
    amb = germ.ambient
    for iso in picks:
        eta = iso(xi)
        sec = iso.matrix @ sec_xi
        res = section_residuals(germ, eta, sec)
        worst["section_bracket"] = max(worst["section_bracket"], res["bracket"])
        worst["section_curvature"] = max(worst["section_curvature"], res["curvature"])
        # the normal space of the image is the parallel translate of the section
        pn = image_normal_projector(germ, hat_g, iso.element, iso.transport, iso.group, xi)
        nb = _linalg.orthonormal_span(pn, scale=1.0)
        if germ.kind == "srep":
            expected = iso.element @ amb.embed((germ.normal_basis @ sec).T).T
        else:
            expected = _exp_element(germ, iso.element, eta) @ amb.embed(
                (germ.normal_basis @ sec).T).T
        ang = float(np.max(_linalg.principal_angles(nb, expected), initial=0.0)) if nb.shape[1] == expected.shape[1] else np.pi
        worst["normal_space_angle"] = max(worst["normal_space_angle"], ang)
    abelian = worst["section_bracket"] <= ABELIAN_TOL and worst["section_curvature"] <= ABELIAN_TOL \
        and worst["normal_space_angle"] <= FLAT_TOL

    # isotropy of xi acts trivially on the section
    iso_alg = isotropy_algebra(hat_g, xi)
    for x in iso_alg:
        worst["isotropy_on_section"] = max(worst["isotropy_on_section"], float(np.linalg.norm(x @ sec_xi)))
    # normal holonomy of M lies in the polar group
    for lp in small_loops(germ, n_loops, seed):
        hol = loop_holonomy(germ, lp)
        lg = scipy.linalg.logm(hol).real
        lg = (lg - lg.T) / 2
        flat_lg = lg.ravel()
        resid = float(np.linalg.norm(flat_lg - hat_g.projector() @ flat_lg)) if hat_g.dim else float(np.linalg.norm(lg))
        worst["holonomy_in_group"] = max(worst["holonomy_in_group"], resid)
    # transport around closed paths in the image
    paths = []
    for k in range(n_loops):
        base = []
        if germ.dim >= 2:
            a, b = rng.standard_normal((2, germ.dim))
            x = germ.m_unit @ a * 0.3 / np.linalg.norm(a)
            y = germ.m_unit @ b * 0.3 / np.linalg.norm(b)
            base = [x, y, -x]
        fib = []
        if hat_g.dim:
            c = rng.standard_normal(hat_g.dim)
            fib = [np.einsum("i,ijk->jk", 0.8 * c / np.linalg.norm(c), hat_g.basis)]
        if base or fib:
            paths.append(close_tube_loop(tube, base, fib))
    for pieces, err in paths:
        worst["loop_closure"] = max(worst["loop_closure"], err)
        res = transport_around_image_loop(tube, pieces, steps=loop_steps)
        worst["loop_transport"] = max(worst["loop_transport"], res["holonomy_residual"])
    globally_flat = (worst["isotropy_on_section"] <= FLAT_TOL and worst["holonomy_in_group"] <= FLAT_TOL
                     and worst["loop_transport"] <= FLAT_TOL and worst["loop_closure"] <= 1e-8)

    focal_reports = []
    fpicks = [isos[i] for i in rng.choice(len(isos), size=min(n_psi, len(isos)), replace=False)]
    for j, iso in enumerate(fpicks):
        rep = preserves_focal_structure(iso.matrix, germ, germ, n_probes, seed=seed + j)
        focal_reports.append(rep)
    constant_focal = all(r["passed"] for r in focal_reports)
    worst["focal_radius"] = max([p["radius_residual"] for r in focal_reports for p in r["probes"]
                                 if np.isfinite(p["radius_residual"])], default=0.0)
    failing = [dict(p, psi_index=j) for j, r in enumerate(focal_reports) for p in r["probes"] if not p["passed"]]
    return {"abelian": bool(abelian), "globally_flat": bool(globally_flat), "constant_focal": bool(constant_focal),
            "worst_residuals": worst, "failing_probes": failing,
            "n_focal_probes": sum(r["n_probes"] for r in focal_reports)}


# -- Omega projection and rank additivity -----------------------------------------------


def omega_projection(tube: PartialTube, rho, n_iso: int = 16, seed=0) -> dict:
    """Map fibre samples psi xi -> psi rho; checks isotropy containment."""
    hat_g, xi = tube.hat_g, tube.xi
    rho = np.asarray(rho, float)
    sec = section(hat_g, xi)
    if float(np.linalg.norm((rho - xi) - sec @ (sec.T @ (rho - xi)))) > 1e-8 * max(1.0, float(np.linalg.norm(rho))):
        raise InputError("rho - xi is not in the section through xi")
    iso_alg = isotropy_algebra(hat_g, xi)
    worst = max([float(np.linalg.norm(x @ rho)) for x in iso_alg], default=0.0)
    rng = np.random.default_rng(seed)
    if len(iso_alg):
        for _ in range(n_iso):
            k = scipy.linalg.expm(np.einsum("i,ijk->jk", rng.uniform(-np.pi, np.pi, len(iso_alg)), iso_alg))
            worst = max(worst, float(np.linalg.norm(k @ rho - rho)))
    if worst > 1e-6:
        raise ConsistencyError(f"isotropy of xi does not fix rho (residual {worst:.3g})")
    pairs = [(iso(xi), iso(rho)) for iso in tube.frame_isometries]
    return {"pairs": pairs, "isotropy_residual": worst,
            "kernel_dim": orbit_dimension(hat_g, xi) - orbit_dimension(hat_g, rho)}


def _normal_bundle_map(tube: PartialTube, params: np.ndarray) -> np.ndarray:
    """Exponential of the image's normal bundle in injective coordinates (w, x, c)."""
    germ, hat_g, xi = tube.germ, tube.hat_g, tube.xi
    n = germ.dim
    xcols = orbit_complement_coords(hat_g, xi)
    nx = xcols.shape[1] if xcols.size else 0
    sec = section(hat_g, xi)
    w, x, c = params[:n], params[n:n + nx], params[n + nx:]
    z = germ.m_unit @ w if n else np.zeros(germ.ambient.dim_g)
    h = germ.ambient.group_exp(z)
    u = segment_transport(germ, z)
    g = group_exp(hat_g, xcols @ x) if nx else np.eye(germ.codim)
    v = u @ g @ (xi + sec @ c)
    return image_point(germ, h, v)


def rank_additivity(tube: PartialTube, nu, fd_step: float = 1e-5, rank_tol: float = 1e-6) -> dict:
    """Kernel dimensions at the normal vector nu (section coordinates) of the image.

    The left side is read off a finite-difference Jacobian of the normal
    exponential of the image; the right side combines the fibre-dimension drop
    of Omega with the focal multiplicity of M at rho = xi + nu.
    """
    germ, hat_g, xi = tube.germ, tube.hat_g, tube.xi
    sec = section(hat_g, xi)
    nu = np.asarray(nu, float)
    c0 = sec.T @ nu
    rho = xi + sec @ c0
    xcols = orbit_complement_coords(hat_g, xi)
    nx = xcols.shape[1] if xcols.size else 0
    base = np.concatenate([np.zeros(germ.dim), np.zeros(nx), c0])
    if base.size != germ.dim_p:
        raise ConsistencyError(f"normal bundle coordinates have {base.size} parameters for dim N = {germ.dim_p}")
    cols = []
    for i in range(base.size):
        e = np.zeros(base.size)
        e[i] = fd_step
        d1 = (_normal_bundle_map(tube, base + e) - _normal_bundle_map(tube, base - e)) / (2 * fd_step)
        d2 = (_normal_bundle_map(tube, base + 2 * e) - _normal_bundle_map(tube, base - 2 * e)) / (4 * fd_step)
        cols.append((4 * d1 - d2) / 3)
    jac = np.stack(cols, axis=1)
    sv = np.linalg.svd(jac, compute_uv=False)
    rank = int(np.sum(sv > rank_tol * sv[0])) if sv.size and sv[0] > 0 else 0
    lhs = base.size - rank
    omega = omega_projection(tube, rho)
    mult = normal_exp_differential(germ, rho).multiplicity
    return {"lhs": lhs, "ker_omega": omega["kernel_dim"], "focal_multiplicity_rho": mult,
            "holds": lhs == omega["kernel_dim"] + mult, "singular_values": sv.tolist(),
            "rho_norm": float(np.linalg.norm(rho))}


# -- reconstruction ------------------------------------------------------------------------


def reference_orbit_samples(germ: OrbitGerm, xi, count: int, seed=0) -> list[np.ndarray]:
    """Group elements k of the acting group; the orbit point is k exp(N xi) (pulled back)."""
    amb = germ.ambient
    ads = np.stack([amb.ad(germ.algebra[:, i]) for i in range(germ.algebra.shape[1])])
    return [e.matrix for e in liealg.haar_sample(ads, count, seed)]


def _ref_point(germ: OrbitGerm, k, xi) -> np.ndarray:
    return image_point(germ, k, xi)


def reconstruct_check(tube: PartialTube, n_reference: int = 200, seed=0, refine: bool = True,
                      n_seeds: int = 8) -> dict:
    """Symmetric Hausdorff distance between the exponential image and the orbit through exp(xi).

    Each sample on one side is matched to the other set by a nearest-neighbour
    seed followed by a least-squares refinement over that set's continuous
    parametrization, so the reported one-sided distances are sample-to-set
    distances rather than sample-to-sample ones.
    """
    germ, hat_g, xi = tube.germ, tube.hat_g, tube.xi
    amb = germ.ambient
    isos = tube.frame_isometries
    tube_pts = np.array([image_point(germ, iso.element, iso(xi)) for iso in isos])
    ks = reference_orbit_samples(germ, xi, n_reference, seed)
    ref_pts = np.array([_ref_point(germ, k, xi) for k in ks])

    # structural comparison of dimensions
    ref_germ_dim = _linalg.orthonormal_span(
        np.stack([_ref_velocity(germ, xi, germ.algebra[:, i]) for i in range(germ.algebra.shape[1])], axis=1),
        scale=1.0).shape[1] if germ.algebra.shape[1] else 0
    tube_dim = image_tangent_rank(germ, hat_g, np.eye(amb.dim_g), np.eye(germ.codim), np.eye(germ.codim), xi)
    if ref_germ_dim != tube_dim:
        return {"structural_failure": True, "tube_dim": tube_dim, "reference_dim": ref_germ_dim,
                "hausdorff_forward": float("inf"), "hausdorff_backward": float("inf"), "passed": False}

    ref_tree = cKDTree(ref_pts)
    tube_tree = cKDTree(tube_pts)
    alg = germ.algebra
    ads = np.stack([amb.ad(alg[:, i]) for i in range(alg.shape[1])]) if alg.shape[1] else np.zeros((0, amb.dim_g, amb.dim_g))

    kq = min(n_seeds, len(ks))
    forward = []
    for p in tube_pts:
        dists, idx = ref_tree.query(p, k=kq)
        dists, idx = np.atleast_1d(dists), np.atleast_1d(idx)
        best = float(dists[0])
        if refine and len(ads):
            for j in idx:
                k0 = ks[j]
                f = lambda a, k0=k0: _ref_point(germ, k0 @ scipy.linalg.expm(np.einsum("i,ijk->jk", a, ads)), xi) - p
                sol = scipy.optimize.least_squares(f, np.zeros(len(ads)), xtol=1e-15, ftol=1e-15, gtol=1e-15)
                best = min(best, float(np.linalg.norm(f(sol.x))))
                if best <= 1e-3 * HAUSDORFF_TOL:
                    break
        forward.append(best)
    backward = []
    n, m = germ.dim, hat_g.dim
    kt = min(n_seeds, len(isos))
    for q in ref_pts:
        dists, idx = tube_tree.query(q, k=kt)
        dists, idx = np.atleast_1d(dists), np.atleast_1d(idx)
        best = float(dists[0])
        if refine and n + m:
            for j in idx:
                iso = isos[j]

                def f(par, iso=iso, q=q):
                    z = germ.m_unit @ par[:n] if n else np.zeros(amb.dim_g)
                    h = iso.element @ amb.group_exp(z)
                    u = segment_transport(germ, z) @ iso.transport
                    g = group_exp(hat_g, par[n:]) @ iso.group if m else iso.group
                    return image_point(germ, h, u @ g @ xi) - q

                sol = scipy.optimize.least_squares(f, np.zeros(n + m), xtol=1e-15, ftol=1e-15, gtol=1e-15)
                best = min(best, float(np.linalg.norm(f(sol.x))))
                if best <= 1e-3 * HAUSDORFF_TOL:
                    break
        backward.append(best)
    hf, hb = max(forward), max(backward)
    return {"structural_failure": False, "tube_dim": tube_dim, "reference_dim": ref_germ_dim,
            "hausdorff_forward": hf, "hausdorff_backward": hb,
            "samples_tube": len(tube_pts), "samples_reference": len(ref_pts),
            "passed": max(hf, hb) <= HAUSDORFF_TOL}


def _ref_velocity(germ: OrbitGerm, xi, x) -> np.ndarray:
    """Killing-field value of x at the orbit point exp(N xi)."""
    amb = germ.ambient
    if germ.kind == "srep":
        return amb.bracket(x, amb.embed(germ.point + germ.normal_vector(xi)))
    return amb.tangent_projector(_exp_element(germ, np.eye(amb.dim_g), xi)) @ x


def tube_report(tube: PartialTube, equifocal: dict | None, reconstruction: dict | None) -> dict:
    eq = None
    if equifocal is not None:
        eq = {k: equifocal[k] for k in ("abelian", "globally_flat", "constant_focal")}
        eq["worst_residuals"] = equifocal["worst_residuals"]
    rec = None
    if reconstruction is not None:
        rec = {"hausdorff_forward": reconstruction["hausdorff_forward"],
               "hausdorff_backward": reconstruction["hausdorff_backward"]}
    return {"xi_norm": float(np.linalg.norm(tube.xi)), "principal": tube.principal, "fibre_dim": tube.fibre_dim,
            "codim": tube.codim, "equifocal": eq, "reconstruction": rec}
