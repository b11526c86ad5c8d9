"""Orbit germs: tangent/normal splittings, shape operators and normal transport.

Two kinds of orbits are supported:

* ``srep``: orbits ``K' z0`` of a subgroup of K acting linearly on the flat
  space p (the isotropy representation).
* ``hermann``: orbits ``K~ . q`` of a subgroup of G acting on N = G/K.

Both are handled after pulling back to a base configuration.  For a Hermann
orbit through ``q = g0.o`` the acting algebra is replaced by
``k' = Ad(g0)^-1 k~`` so that the orbit passes through ``o``.  A point of the
orbit is then ``h.q`` for ``h`` in the connected group of ``k'`` and a normal
vector there is stored by its *body* coordinates ``u`` in the normal basis
``N`` at the base point: the actual vector is ``Ad(h) N u``.  This works
because the group acts by isometries preserving the orbit.

With ``tau(X)`` the velocity of ``t -> exp(tX).q`` at t = 0 (``pr_p X`` for
Hermann orbits, ``[X, z0]`` for s-rep orbits) the shape operator is

    A_xi(tau X) = -pr_T [X, xi].
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg
import scipy.optimize

from . import _linalg, liealg
from ._ode import projector_transport
from .errors import DegenerateError, InputError, TubeRadiusError, ValidationError
from .symspace import SymmetricSpaceGerm

SYM_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class OrbitGerm:
    ambient: SymmetricSpaceGerm
    kind: str                     # "srep" or "hermann"
    point: np.ndarray             # srep: z0 as p-vector; hermann: Ad(g0)
    algebra: np.ndarray           # pulled-back acting algebra, d x m orthonormal
    tangent_basis: np.ndarray     # dp x n
    normal_basis: np.ndarray      # dp x r
    m_basis: np.ndarray           # d x n with tau(m_i) = tangent_i
    m_unit: np.ndarray            # d x n orthonormal complement of the isotropy
    isotropy_basis: np.ndarray    # d x (m - n)
    epsilon: float | None = None
    label: str = ""
    meta: dict = field(default_factory=dict)

    @property
    def flat_ambient(self) -> bool:
        return self.kind == "srep"

    @property
    def dim(self) -> int:
        return self.tangent_basis.shape[1]

    @property
    def codim(self) -> int:
        return self.normal_basis.shape[1]

    @property
    def dim_p(self) -> int:
        return self.ambient.dim

    # -- tangent map and normal action ---------------------------------

    def tau(self, x) -> np.ndarray:
        """Velocity (p-vector at the base point) of the orbit curve exp(tX).q."""
        amb = self.ambient
        x = np.asarray(x, float)
        if self.kind == "hermann":
            return x[amb.dim_k:]
        return amb.bracket(x, amb.embed(self.point))[amb.dim_k:]

    def rho(self, x, v) -> np.ndarray:
        """Infinitesimal action of X on p-vectors: pr_p [X, v]."""
        amb = self.ambient
        return amb.bracket(np.asarray(x, float), amb.embed(v))[amb.dim_k:]

    def normal_vector(self, u) -> np.ndarray:
        return self.normal_basis @ np.asarray(u, float)

    def normal_coords(self, v) -> np.ndarray:
        v = np.asarray(v, float)
        if v.shape[-1] == self.codim:
            return v
        v = self.ambient.as_p(v)
        resid = float(np.linalg.norm(v - self.normal_basis @ (self.normal_basis.T @ v)))
        if resid > 1e-8 * max(1.0, float(np.linalg.norm(v))):
            raise InputError(f"vector is not normal to the orbit (tangential part {resid:.3g})")
        return self.normal_basis.T @ v

    # -- second-order data -----------------------------------------------

    def shape_operator(self, xi) -> np.ndarray:
        """Matrix of A_xi in the tangent basis (xi given in normal coordinates or as a p-vector)."""
        xi_p = self.normal_vector(self.normal_coords(xi))
        n = self.dim
        a = np.zeros((n, n))
        for i in range(n):
            a[:, i] = -self.tangent_basis.T @ self.rho(self.m_basis[:, i], xi_p)
        return a

    def second_fundamental_form(self) -> np.ndarray:
        """``II[i, j, a] = <A_{nu_a} t_i, t_j>``."""
        n, r = self.dim, self.codim
        out = np.zeros((n, n, r))
        for a in range(r):
            out[:, :, a] = self.shape_operator(np.eye(r)[a]).T
        return out

    def normal_connection_form(self, z) -> np.ndarray:
        """Skew matrix Omega_Z with u' = -Omega_Z u along t -> exp(tZ).q."""
        amb = self.ambient
        ad = amb.ad(z)[amb.dim_k:, amb.dim_k:]
        return self.normal_basis.T @ ad @ self.normal_basis

    def normal_isotropy_action(self, h) -> np.ndarray:
        """Action of an isotropy element (Ad matrix) on normal coordinates."""
        k = self.ambient.dim_k
        return self.normal_basis.T @ h[k:, k:] @ self.normal_basis

    def ambient_curvature_normal(self) -> np.ndarray:
        """``<R^N(x, y) xi, eta>`` for x, y tangent and xi, eta normal, shape (n, n, r, r)."""
        r4 = self.ambient.curvature_tensor
        if self.flat_ambient:
            return np.zeros((self.dim, self.dim, self.codim, self.codim))
        t, nb = self.tangent_basis, self.normal_basis
        return np.einsum("abcd,ai,bj,ck,dl->ijkl", r4, t, t, nb, nb)

    def normal_curvature(self, sign: float = 1.0) -> np.ndarray:
        """``<R_perp(t_i, t_j) nu_k, nu_l>`` from the Ricci equation, shape (n, n, r, r).

        R_perp = R^N|_normal + sign * ([A_xi, A_eta] x, y) with ``sign = +1`` for
        the curvature convention R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y].
        """
        r = self.codim
        shapes = [self.shape_operator(np.eye(r)[a]) for a in range(r)]
        out = self.ambient_curvature_normal().copy()
        for k in range(r):
            for l in range(r):
                comm = shapes[k] @ shapes[l] - shapes[l] @ shapes[k]
                out[:, :, k, l] += sign * comm.T
        return out

    # -- points ------------------------------------------------------------

    def group_element(self, z) -> np.ndarray:
        return self.ambient.group_exp(z)

    def word_element(self, segments) -> np.ndarray:
        h = np.eye(self.ambient.dim_g)
        for z in segments:
            h = h @ self.ambient.group_exp(z)
        return h

    def point_coords(self, h) -> np.ndarray:
        """Ambient coordinates of the orbit point ``h.q`` (un-pulled-back)."""
        amb = self.ambient
        k = amb.dim_k
        if self.kind == "srep":
            return h[k:, k:] @ self.point
        return amb.cartan_embedding(self.point @ h)

    def pulled_point_coords(self, h) -> np.ndarray:
        amb = self.ambient
        k = amb.dim_k
        if self.kind == "srep":
            return h[k:, k:] @ self.point
        return amb.cartan_embedding(h)

    def tangent_space_at(self, h) -> np.ndarray:
        """Orthonormal basis (in g coordinates, pulled back) of T_{h.q} M."""
        amb = self.ambient
        k = amb.dim_k
        if self.kind == "srep":
            z = h[k:, k:] @ self.point
            vecs = np.stack([amb.bracket(self.algebra[:, i], amb.embed(z)) for i in range(self.algebra.shape[1])], axis=1)
        else:
            vecs = amb.tangent_projector(h) @ self.algebra
        return _linalg.orthonormal_span(vecs, scale=1.0) if vecs.size else np.zeros((amb.dim_g, 0))

    def normal_projector_at(self, h) -> np.ndarray:
        """Projector (in g, pulled back) onto the normal space at ``h.q``, computed from scratch."""
        amb = self.ambient
        ptan = amb.tangent_projector(h) if self.kind == "hermann" else amb.p_embed @ amb.p_embed.T
        t = self.tangent_space_at(h)
        return ptan - t @ t.T

    def with_epsilon(self, eps: float) -> "OrbitGerm":
        return replace(self, epsilon=float(eps))


def _split_action(ambient: SymmetricSpaceGerm, algebra: np.ndarray, tau) -> tuple:
    dp = ambient.dim
    m = algebra.shape[1]
    if m == 0:
        return (np.zeros((dp, 0)), np.zeros((ambient.dim_g, 0)), np.zeros((ambient.dim_g, 0)),
                np.zeros((ambient.dim_g, 0)))
    tmat = np.stack([tau(algebra[:, i]) for i in range(m)], axis=1)
    u, s, vt = np.linalg.svd(tmat)
    n = int(np.sum(s > _linalg.RANK_TOL * max(1.0, s[0] if s.size else 0.0))) if s.size else 0
    tangent = u[:, :n]
    m_unit = algebra @ vt[:n].T
    m_basis = m_unit / s[:n]
    iso = algebra @ vt[n:].T
    return tangent, m_basis, m_unit, iso


def _subalgebra_check(ambient: SymmetricSpaceGerm, basis: np.ndarray) -> float:
    proj = basis @ basis.T
    worst = 0.0
    for i in range(basis.shape[1]):
        for j in range(i + 1, basis.shape[1]):
            c = ambient.bracket(basis[:, i], basis[:, j])
            worst = max(worst, float(np.linalg.norm(c - proj @ c)))
    return worst


def _build(ambient, kind, point, algebra, label, meta) -> OrbitGerm:
    algebra = _linalg.orthonormal_span(algebra, scale=1.0) if algebra.size else algebra
    if algebra.size:
        res = _subalgebra_check(ambient, algebra)
        if res > 1e-8:
            raise ValidationError("acting algebra is not closed under the bracket", res)
    germ = OrbitGerm(ambient, kind, point, algebra, np.zeros((ambient.dim, 0)), np.zeros((ambient.dim, 0)),
                     np.zeros((ambient.dim_g, 0)), np.zeros((ambient.dim_g, 0)), algebra, None, label, meta)
    tangent, m_basis, m_unit, iso = _split_action(ambient, algebra, germ.tau)
    normal = _linalg.complement(tangent, ambient.dim)
    return replace(germ, tangent_basis=tangent, normal_basis=normal, m_basis=m_basis, m_unit=m_unit,
                   isotropy_basis=iso)


def srep_orbit_germ(ambient: SymmetricSpaceGerm, z0, subalgebra=None, label: str = "") -> OrbitGerm:
    """Orbit ``K' z0`` in p; ``subalgebra`` (d x m, inside k) defaults to all of k."""
    z0 = ambient.as_p(z0)
    if float(np.linalg.norm(z0)) == 0.0:
        raise DegenerateError("s-rep orbit through 0 is a point; choose z0 != 0")
    alg = ambient.k_embed if subalgebra is None else np.asarray(subalgebra, float)
    if alg.size and float(np.max(np.abs(alg[ambient.dim_k:]))) > 1e-10:
        raise InputError("s-rep subalgebra must lie in k")
    return _build(ambient, "srep", z0, alg, label, {"z0": z0.tolist()})


def involution_fixed_algebra(ambient: SymmetricSpaceGerm, involution) -> np.ndarray:
    """+1 eigenspace (adapted coordinates) of an involution of the parent algebra."""
    pair = ambient.pair
    model = pair.parent
    sigma = liealg.involution_from_spec(model, involution)
    frame = pair.frame
    sig_ad = frame.T @ model.inner_matrix() @ sigma @ frame
    comm = float(np.max(np.abs(sig_ad @ ambient.theta_ad - ambient.theta_ad @ sig_ad)))
    if comm > 1e-8:
        raise ValidationError("involution does not commute with the Cartan involution", comm)
    return _linalg.null_space(sig_ad - np.eye(model.dim), scale=1.0)


def algebra_from_indices(ambient: SymmetricSpaceGerm, indices) -> np.ndarray:
    model = ambient.pair.parent
    vecs = [ambient.pair.to_adapted(np.eye(model.dim)[int(i)]) for i in indices]
    return np.stack(vecs, axis=1) if vecs else np.zeros((model.dim, 0))


def hermann_orbit_germ(ambient: SymmetricSpaceGerm, subalgebra, point_offset=None, label: str = "") -> OrbitGerm:
    """Orbit of the connected group of ``subalgebra`` through ``exp(point_offset).o``.

    ``subalgebra`` is either a d x m matrix of adapted coordinates or an
    involution description whose fixed algebra is used.
    """
    if isinstance(subalgebra, (str, dict)):
        alg = involution_fixed_algebra(ambient, subalgebra)
    else:
        alg = np.asarray(subalgebra, float)
    offset = np.zeros(ambient.dim) if point_offset is None else ambient.as_p(point_offset)
    g0 = ambient.group_exp(ambient.embed(offset))
    pulled = g0.T @ alg
    return _build(ambient, "hermann", g0, pulled, label, {"offset": offset.tolist()})


# -- finite-difference certification of the shape operator -------------------------


def _velocity_field(germ: OrbitGerm, x, s: float) -> np.ndarray:
    amb = germ.ambient
    h = amb.group_exp(s * np.asarray(x, float))
    if germ.kind == "hermann":
        return amb.tangent_projector(h) @ x
    k = amb.dim_k
    z = h[k:, k:] @ germ.point
    return amb.bracket(x, amb.embed(z))


def second_fundamental_form_fd(germ: OrbitGerm, step: float = 1e-3) -> np.ndarray:
    """``II`` from accelerations of orbit curves (central differences, Richardson)."""
    amb = germ.ambient
    n, r = germ.dim, germ.codim
    nb = amb.p_embed @ germ.normal_basis

    def accel_normal(x):
        def d(hh):
            return (_velocity_field(germ, x, hh) - _velocity_field(germ, x, -hh)) / (2 * hh)
        acc = (4 * d(step / 2) - d(step)) / 3
        return nb.T @ acc

    diag = [accel_normal(germ.m_basis[:, i]) for i in range(n)]
    out = np.zeros((n, n, r))
    for i in range(n):
        out[i, i] = diag[i]
        for j in range(i + 1, n):
            both = accel_normal(germ.m_basis[:, i] + germ.m_basis[:, j])
            out[i, j] = out[j, i] = (both - diag[i] - diag[j]) / 2
    return out


def shape_operator_residuals(germ: OrbitGerm, samples: int = 5, seed=0) -> dict:
    rng = np.random.default_rng(seed)
    sym, lin = 0.0, 0.0
    for _ in range(samples):
        a, b = rng.standard_normal((2, germ.codim))
        s, t = rng.standard_normal(2)
        aa, ab = germ.shape_operator(a), germ.shape_operator(b)
        sym = max(sym, float(np.max(np.abs(aa - aa.T), initial=0.0)))
        lin = max(lin, float(np.max(np.abs(germ.shape_operator(s * a + t * b) - s * aa - t * ab), initial=0.0)))
    fd = second_fundamental_form_fd(germ)
    an = germ.second_fundamental_form()
    return {"symmetry": sym, "linearity": lin,
            "fd_agreement": float(np.max(np.abs(fd - an), initial=0.0))}


# -- curves and normal parallel transport -------------------------------------------


@dataclass(frozen=True, eq=False)
class TransportedFrame:
    segments: tuple                # Z_j in adapted g coordinates (pulled back)
    elements: tuple                # h_j after each segment
    frames: tuple                  # normal-coordinate frame matrices U_j
    method: str


@dataclass(frozen=True, eq=False)
class TransportResult:
    coords: np.ndarray             # body normal coordinates at the endpoint
    ambient: np.ndarray            # vector in pulled-back g coordinates
    element: np.ndarray            # h with endpoint h.q
    frame: TransportedFrame


def segment_transport(germ: OrbitGerm, z, t: float = 1.0) -> np.ndarray:
    return scipy.linalg.expm(-t * germ.normal_connection_form(z))


def curve_transport_matrix(germ: OrbitGerm, segments) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form transport ``U`` (normal coordinates) and endpoint element ``h``."""
    u = np.eye(germ.codim)
    h = np.eye(germ.ambient.dim_g)
    for z in segments:
        u = segment_transport(germ, z) @ u
        h = h @ germ.ambient.group_exp(z)
    return u, h


def _ode_transport(germ: OrbitGerm, segments, v_amb, steps_per_unit: int):
    amb = germ.ambient
    h = np.eye(amb.dim_g)
    frames, elements = [], []
    v = v_amb
    for z in segments:
        length = float(np.linalg.norm(z))
        steps = max(8, int(np.ceil(steps_per_unit * max(length, 1e-3))))
        base = h.copy()
        proj = lambda t, base=base, z=z: germ.normal_projector_at(base @ amb.group_exp(t * z))
        v = projector_transport(proj, v, 1.0, steps)
        h = h @ amb.group_exp(z)
        elements.append(h.copy())
        frames.append(v.copy())
    return v, h, elements, frames


def normal_parallel_transport(germ: OrbitGerm, segments, v, method: str = "closed",
                              steps_per_unit: int = 200) -> TransportResult:
    """Transport a normal vector along a concatenation of orbit segments exp(tZ_j)."""
    segments = [np.asarray(z, float) for z in segments]
    u0 = germ.normal_coords(v)
    amb = germ.ambient
    if method == "closed":
        u = u0.copy()
        h = np.eye(amb.dim_g)
        elements, frames = [], []
        for z in segments:
            u = segment_transport(germ, z) @ u
            h = h @ amb.group_exp(z)
            elements.append(h.copy())
            frames.append(u.copy())
        amb_vec = h @ amb.embed(germ.normal_vector(u))
        return TransportResult(u, amb_vec, h, TransportedFrame(tuple(segments), tuple(elements), tuple(frames), method))
    if method == "ode":
        v_amb = amb.embed(germ.normal_vector(u0))
        amb_vec, h, elements, frames = _ode_transport(germ, segments, v_amb, steps_per_unit)
        body = (h.T @ amb_vec)[amb.dim_k:]
        u = germ.normal_basis.T @ body
        return TransportResult(u, amb_vec, h, TransportedFrame(tuple(segments), tuple(elements), tuple(frames), method))
    raise InputError(f"unknown transport method {method!r}")


def random_segments(germ: OrbitGerm, rng, n_segments: int = 3, max_length: float = 2.0) -> list[np.ndarray]:
    """One-parameter-subgroup segments with uniform random m-directions and lengths in [0, L]."""
    if germ.dim == 0:
        return []
    out = []
    for _ in range(n_segments):
        d = germ.m_unit @ rng.standard_normal(germ.dim)
        d /= np.linalg.norm(d)
        out.append(d * rng.uniform(0.0, max_length))
    return out


def close_loop(germ: OrbitGerm, segments, tol: float = 1e-12):
    """Append a segment in m returning the curve to the base point.

    Returns (segments + [W], residual).  The closing step is found by least
    squares from the naive guess and may fail for long open curves.
    """
    h = germ.word_element(segments)
    base = germ.pulled_point_coords(np.eye(germ.ambient.dim_g))
    if germ.dim == 0:
        return list(segments), 0.0

    def resid(w):
        return germ.pulled_point_coords(h @ germ.ambient.group_exp(germ.m_unit @ w)) - base

    guess = -(germ.m_unit.T @ np.sum(segments, axis=0)) if segments else np.zeros(germ.dim)
    best = None
    for start in (guess, np.zeros(germ.dim)):
        sol = scipy.optimize.least_squares(resid, start, xtol=1e-15, ftol=1e-15, gtol=1e-15)
        err = float(np.linalg.norm(resid(sol.x)))
        if best is None or err < best[1]:
            best = (sol.x, err)
    w, err = best
    return list(segments) + [germ.m_unit @ w], err


def loop_holonomy(germ: OrbitGerm, segments, method: str = "closed") -> np.ndarray:
    """Holonomy (normal coordinates at the base point) of a closed curve."""
    r = germ.codim
    if method == "closed":
        u, h = curve_transport_matrix(germ, segments)
    else:
        cols = [normal_parallel_transport(germ, segments, np.eye(r)[a], method="ode").coords for a in range(r)]
        u = np.stack(cols, axis=1) if cols else np.zeros((0, 0))
        h = germ.word_element(segments)
    return germ.normal_isotropy_action(h) @ u


def holonomy_tube_sample(germ: OrbitGerm, eta, curves) -> list[np.ndarray]:
    """Transported copies of eta (pulled-back g coordinates) at the curve endpoints."""
    u0 = germ.normal_coords(eta)
    eps = germ.epsilon
    if eps is None:
        from .focal import estimate_epsilon
        eps = estimate_epsilon(germ)
    if float(np.linalg.norm(u0)) >= eps:
        raise TubeRadiusError(f"|eta| = {np.linalg.norm(u0):.4g} is not below the tube radius {eps:.4g}")
    if not curves:
        return [germ.ambient.embed(germ.normal_vector(u0))]
    return [normal_parallel_transport(germ, c, u0).ambient for c in curves]


def spatial_to_body(germ: OrbitGerm, spatial_segments) -> list[np.ndarray]:
    """Convert left-acting segments Y_j (curve exp(tY_j) P_{j-1}.q) to body segments."""
    amb = germ.ambient
    p = np.eye(amb.dim_g)
    out = []
    for y in spatial_segments:
        y = np.asarray(y, float)
        out.append(p.T @ y)
        p = amb.group_exp(y) @ p
    return out
