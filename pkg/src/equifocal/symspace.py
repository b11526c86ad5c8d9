"""Compact symmetric spaces G/K through the Lie model of their tangent space.

Conventions
-----------
All vectors live in the *adapted* orthonormal basis of a
:class:`~equifocal.liealg.CartanDecomposition`: the first ``dim_k``
coordinates are the k-part and the remaining ``dim_p`` the p-part.  A
"p-vector" is a length ``dim_p`` array.

Curvature is ``R(x, y) z = -[[x, y], z]`` so that
``<R(x, y) y, x> = |[x, y]|^2 >= 0``.

Points of N are represented by the adjoint matrix ``Ad(g)`` of a group
element, with the point being ``g.o``.  The tangent space at ``g.o`` is
identified with ``Ad(g) p`` inside g; with this identification the
Levi-Civita connection is "differentiate in g, then project onto Ad(g) p",
and parallel transport along ``t -> g exp(tX).o`` (X in p) keeps the
pulled-back p-coordinates fixed.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg

from . import _linalg, liealg
from ._ode import projector_transport
from .errors import DegenerateError, InputError

P_TOL = 1e-9
EIG_MERGE = 1e-8


@dataclass(frozen=True, eq=False)
class SymmetricSpaceGerm:
    pair: liealg.CartanDecomposition
    name: str = "N"
    base_point_label: str = "o"

    @property
    def scale(self) -> float:
        return self.pair.parent.scale

    @property
    def dim(self) -> int:
        return self.pair.dim_p

    @property
    def dim_k(self) -> int:
        return self.pair.dim_k

    @property
    def dim_g(self) -> int:
        return self.pair.parent.dim

    @cached_property
    def c(self) -> np.ndarray:
        return self.pair.adapted.bracket_tensor

    @cached_property
    def ad_all(self) -> np.ndarray:
        """ad of each adapted basis vector; skew matrices, shape (d, d, d)."""
        return self.pair.adapted.ad_basis()

    @cached_property
    def metric(self) -> np.ndarray:
        return np.eye(self.dim)

    @cached_property
    def curvature_tensor(self) -> np.ndarray:
        """``R[a, b, c, d] = <R(e_a, e_b) e_c, e_d>`` on the p basis."""
        k = self.dim_k
        cpp = self.c[k:, k:, :k]          # [p_a, p_b] -> k
        ckp = self.c[:k, k:, k:]          # [k_m, p_c] -> p
        return -np.einsum("abm,mcd->abcd", cpp, ckp)

    @cached_property
    def theta_ad(self) -> np.ndarray:
        return np.diag(np.r_[np.ones(self.dim_k), -np.ones(self.dim)])

    @cached_property
    def p_embed(self) -> np.ndarray:
        """Columns are the p basis inside g (shape d x dim_p)."""
        return np.eye(self.dim_g)[:, self.dim_k:]

    @cached_property
    def k_embed(self) -> np.ndarray:
        return np.eye(self.dim_g)[:, : self.dim_k]

    # -- algebra helpers -----------------------------------------------

    def bracket(self, x, y) -> np.ndarray:
        return np.einsum("i,j,ijk->k", x, y, self.c)

    def ad(self, x) -> np.ndarray:
        return np.einsum("i,ikj->kj", np.asarray(x, float), self.ad_all)

    def as_p(self, x) -> np.ndarray:
        """Accept a p-vector or a g-vector with negligible k-part."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] == self.dim:
            return x
        if x.shape[-1] == self.dim_g:
            kpart = float(np.max(np.abs(x[..., : self.dim_k]))) if self.dim_k else 0.0
            if kpart > P_TOL * max(1.0, float(np.max(np.abs(x)))):
                raise InputError(f"vector is not in p (k-component {kpart:.3g})")
            return x[..., self.dim_k:]
        raise InputError(f"expected a vector of length {self.dim} or {self.dim_g}")

    def embed(self, x) -> np.ndarray:
        return self.pair.embed_p(self.as_p(x))

    def k_action(self) -> np.ndarray:
        """Isotropy representation: ad(k_i) restricted to p, shape (dim_k, dp, dp)."""
        k = self.dim_k
        return self.ad_all[:k, k:, k:]

    # -- points ----------------------------------------------------------

    def group_exp(self, x) -> np.ndarray:
        return scipy.linalg.expm(self.ad(x))

    def exp_point(self, g, v) -> np.ndarray:
        """Ad-representative of ``exp_{g.o}(Ad(g) v)`` for a p-vector v."""
        return g @ self.group_exp(self.embed(v))

    def tangent_projector(self, g) -> np.ndarray:
        e = g @ self.p_embed
        return e @ e.T

    def cartan_embedding(self, g) -> np.ndarray:
        """``g.o -> Ad(g) theta Ad(g)^T``, flattened.  Used as a chart-free distance."""
        return (g @ self.theta_ad @ g.T).ravel()

    def point_distance(self, g, h) -> float:
        return float(np.linalg.norm(self.cartan_embedding(g) - self.cartan_embedding(h)))


def germ_from_model(model: liealg.LieAlgebraModel, involution, name: str | None = None) -> SymmetricSpaceGerm:
    return SymmetricSpaceGerm(liealg.cartan_decompose(model, involution), name or model.name)


_NAMED = {
    "cp2": ("su", 3, "diag:-1,-1,1"),
    "cp3": ("su", 4, "diag:-1,-1,-1,1"),
    "su3/so3": ("su", 3, "conj"),
    "s2": ("so", 3, "diag:1,1,-1"),
    "s3": ("so", 4, "diag:1,1,1,-1"),
    "s4": ("so", 5, "diag:1,1,1,1,-1"),
    "s5": ("so", 6, "diag:1,1,1,1,1,-1"),
}


def named_germ(name: str) -> SymmetricSpaceGerm:
    try:
        kind, n, inv = _NAMED[name]
    except KeyError:
        raise InputError(f"unknown symmetric pair {name!r}; known: {sorted(_NAMED)}") from None
    model = liealg.su(n) if kind == "su" else liealg.so(n)
    return germ_from_model(model, inv, name)


def known_pairs() -> list[str]:
    return sorted(_NAMED)


# -- curvature ------------------------------------------------------------------


def curvature(germ: SymmetricSpaceGerm, x, y, z) -> np.ndarray:
    x, y, z = germ.as_p(x), germ.as_p(y), germ.as_p(z)
    return np.einsum("abcd,a,b,c->d", germ.curvature_tensor, x, y, z)


def curvature_operator(germ: SymmetricSpaceGerm, x, y) -> np.ndarray:
    """Matrix of ``z -> R(x, y) z`` on p."""
    x, y = germ.as_p(x), germ.as_p(y)
    return np.einsum("abcd,a,b->dc", germ.curvature_tensor, x, y)


def sectional_curvature(germ: SymmetricSpaceGerm, x, y) -> float:
    x, y = germ.as_p(x), germ.as_p(y)
    area = float(x @ x * (y @ y) - (x @ y) ** 2)
    if area <= 1e-300:
        raise DegenerateError("sectional curvature of a degenerate plane")
    return float(curvature(germ, x, y, y) @ x) / area


def jacobi_operator(germ: SymmetricSpaceGerm, eta) -> np.ndarray:
    """Matrix of ``z -> R(z, eta) eta``."""
    eta = germ.as_p(eta)
    return np.einsum("cabd,a,b->dc", germ.curvature_tensor, eta, eta)


@dataclass(frozen=True, eq=False)
class JacobiSpectrum:
    direction: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    # eigenspaces as (value, basis) with values closer than EIG_MERGE merged
    eigenspaces: tuple

    def levels(self, include_zero: bool = False) -> list[float]:
        vals = [v for v, _ in self.eigenspaces]
        if not include_zero:
            vals = [v for v in vals if abs(v) > EIG_MERGE]
        return vals


def jacobi_spectrum(germ: SymmetricSpaceGerm, eta) -> JacobiSpectrum:
    eta = germ.as_p(eta)
    nrm = float(np.linalg.norm(eta))
    if nrm == 0.0:
        raise DegenerateError("Jacobi operator of the zero direction")
    r = jacobi_operator(germ, eta)
    w, v = np.linalg.eigh((r + r.T) / 2)
    spaces = []
    for group in _linalg.group_eigenvalues(w, EIG_MERGE * max(1.0, float(np.max(np.abs(w))))):
        spaces.append((float(np.mean(w[group])), v[:, group]))
    return JacobiSpectrum(eta / nrm, w, v, tuple(spaces))


# -- flats ------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FlatSubspace:
    basis: np.ndarray  # dp x dim, orthonormal columns

    @property
    def dimension(self) -> int:
        return self.basis.shape[1]

    def contains(self, v, tol: float = 1e-8) -> bool:
        v = np.asarray(v, float)
        return float(np.linalg.norm(v - self.basis @ (self.basis.T @ v))) <= tol * max(1.0, float(np.linalg.norm(v)))


def centralizer_in_p(germ: SymmetricSpaceGerm, vectors) -> np.ndarray:
    """Orthonormal basis of {v in p : [v, s] = 0 for all s in span(vectors)}."""
    k = germ.dim_k
    vectors = np.atleast_2d(np.asarray(vectors, float))
    if vectors.size == 0:
        return np.eye(germ.dim)
    # [s, v] for s, v in p lands in k: matrix ad(s)|_{p -> k}
    blocks = [np.einsum("a,abm->mb", germ.as_p(s), germ.c[k:, k:, :k]) for s in vectors]
    return _linalg.null_space(np.vstack(blocks), scale=max(1.0, float(np.max(np.abs(vectors)))))


def abelian_residual(germ: SymmetricSpaceGerm, basis) -> float:
    basis = np.asarray(basis, float)
    worst = 0.0
    for i in range(basis.shape[1]):
        for j in range(i + 1, basis.shape[1]):
            worst = max(worst, float(np.linalg.norm(germ.bracket(germ.embed(basis[:, i]), germ.embed(basis[:, j])))))
    return worst


def maximal_abelian_through(germ: SymmetricSpaceGerm, eta) -> FlatSubspace:
    eta = germ.as_p(eta)
    if float(np.linalg.norm(eta)) == 0.0:
        raise DegenerateError("maximal flat through the zero vector")
    basis = (eta / np.linalg.norm(eta))[:, None]
    for _ in range(germ.dim):
        cent = centralizer_in_p(germ, basis.T)
        extra = cent - basis @ (basis.T @ cent)
        extra = _linalg.orthonormal_span(extra, scale=1.0)
        if extra.shape[1] == 0:
            break
        basis = np.hstack([basis, extra[:, :1]])
    return FlatSubspace(basis)


def transport_along_flat(germ: SymmetricSpaceGerm, flat: FlatSubspace, vector, direction, t: float) -> np.ndarray:
    """Parallel transport along ``s -> exp(s direction).o`` for s in [0, t].

    Returns the transported vector as an element of g (it lies in
    ``Ad(exp(t direction)) p``).  Vectors in the flat are unchanged.
    """
    direction = germ.as_p(direction)
    if not flat.contains(direction):
        raise InputError("geodesic direction is not in the flat")
    return germ.group_exp(t * germ.embed(direction)) @ germ.embed(vector)


def transport_along_geodesic_ode(germ: SymmetricSpaceGerm, vector, direction, t: float,
                                 steps: int = 200) -> np.ndarray:
    """Same transport by integrating the projected derivative (independent route)."""
    x = germ.embed(direction)
    proj = lambda s: germ.tangent_projector(germ.group_exp(s * x))
    return projector_transport(proj, germ.embed(vector), t, steps)


def isotropy_generators(germ: SymmetricSpaceGerm) -> np.ndarray:
    return germ.k_action()


def curvature_identity_residuals(germ: SymmetricSpaceGerm, samples: int = 1000, seed=0) -> dict:
    """Symmetries, Bianchi and sectional sign on random quadruples."""
    rng = np.random.default_rng(seed)
    r = germ.curvature_tensor
    out = {"antisym_xy": 0.0, "antisym_zw": 0.0, "pair_symmetry": 0.0, "bianchi": 0.0,
           "min_sectional": np.inf}
    for _ in range(samples):
        x, y, z, w = rng.standard_normal((4, germ.dim))
        val = lambda a, b, c, d: float(np.einsum("abcd,a,b,c,d->", r, a, b, c, d))
        v = val(x, y, z, w)
        out["antisym_xy"] = max(out["antisym_xy"], abs(v + val(y, x, z, w)))
        out["antisym_zw"] = max(out["antisym_zw"], abs(v + val(x, y, w, z)))
        out["pair_symmetry"] = max(out["pair_symmetry"], abs(v - val(z, w, x, y)))
        b = curvature(germ, x, y, z) + curvature(germ, y, z, x) + curvature(germ, z, x, y)
        out["bianchi"] = max(out["bianchi"], float(np.linalg.norm(b)))
        if abs(float(x @ x * (y @ y) - (x @ y) ** 2)) > 1e-8:
            out["min_sectional"] = min(out["min_sectional"], sectional_curvature(germ, x, y))
    return out
