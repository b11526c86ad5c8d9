"""Curvature endomorphism algebras on the normal space of an orbit germ.

Normal vectors at the base point are handled in normal coordinates
(orthonormal basis ``germ.normal_basis``).  Transporting the projected
curvature tensor back from ``c(1)`` uses homogeneity: in body coordinates the
projected tensor at every orbit point equals the one at the base point, so
only the transport matrix of the curve is needed.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import _linalg, liealg
from .errors import DecompositionUnstableError, InputError, PreconditionError
from .orbits import OrbitGerm, close_loop, curve_transport_matrix, loop_holonomy, random_segments

TENSOR_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class AlgebraicCurvatureTensor:
    # values[a, b, c, d] = <R(e_a, e_b) e_c, e_d>
    values: np.ndarray

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    def endomorphism(self, x, y) -> np.ndarray:
        """Matrix of z -> R(x, y) z."""
        return np.einsum("abcd,a,b->dc", self.values, x, y)

    def endomorphisms(self) -> list[np.ndarray]:
        n = self.dim
        return [self.values[a, b].T for a in range(n) for b in range(a + 1, n)]

    def scalar_curvature(self, basis=None) -> float:
        v = self.values
        if basis is not None:
            v = np.einsum("abcd,ai,bj,ck,dl->ijkl", v, basis, basis, basis, basis)
        return float(np.einsum("abba->", v))

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def residuals(self) -> dict:
        v = self.values
        if v.size == 0:
            return {"antisym_xy": 0.0, "antisym_zw": 0.0, "pair_symmetry": 0.0, "bianchi": 0.0}
        return {
            "antisym_xy": float(np.max(np.abs(v + v.transpose(1, 0, 2, 3)))),
            "antisym_zw": float(np.max(np.abs(v + v.transpose(0, 1, 3, 2)))),
            "pair_symmetry": float(np.max(np.abs(v - v.transpose(2, 3, 0, 1)))),
            "bianchi": float(np.max(np.abs(v + v.transpose(1, 2, 0, 3) + v.transpose(2, 0, 1, 3)))),
        }

    def validate(self, tol: float = TENSOR_TOL) -> dict:
        res = self.residuals()
        scale = max(1.0, self.norm())
        bad = {k: r for k, r in res.items() if r > tol * scale}
        if bad:
            raise InputError(f"not an algebraic curvature tensor: {bad}")
        return res


def project_curvature(germ: OrbitGerm) -> AlgebraicCurvatureTensor:
    """Ambient curvature restricted to normal vectors and projected to the normal space."""
    r = germ.codim
    if germ.flat_ambient:
        return AlgebraicCurvatureTensor(np.zeros((r, r, r, r)))
    nb = germ.normal_basis
    vals = np.einsum("abcd,ai,bj,ck,dl->ijkl", germ.ambient.curvature_tensor, nb, nb, nb, nb)
    return AlgebraicCurvatureTensor(vals)


def _check_orthogonal(psi: np.ndarray, tol: float = 1e-9):
    res = float(np.max(np.abs(psi.T @ psi - np.eye(psi.shape[0])), initial=0.0))
    if res > tol:
        raise InputError(f"frame isometry is not orthogonal (residual {res:.3g})")


def transport_tensor(tensor: AlgebraicCurvatureTensor, psi) -> AlgebraicCurvatureTensor:
    """Pullback ``psi^-1 R(psi x, psi y) psi`` of a tensor by an orthogonal map."""
    psi = np.asarray(psi, float)
    _check_orthogonal(psi)
    vals = np.einsum("abcd,ai,bj,ck,dl->ijkl", tensor.values, psi, psi, psi, psi)
    return AlgebraicCurvatureTensor(vals)


@dataclass(frozen=True, eq=False)
class TransportedTensorSet:
    samples: list  # (segments, tensor)


@dataclass(frozen=True, eq=False)
class CurvatureEndoAlgebra:
    space_dim: int
    basis: np.ndarray          # (k, r, r) Frobenius-orthonormal skew matrices
    provenance: str
    meta: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def projector(self) -> np.ndarray:
        flat = self.basis.reshape(self.dim, -1).T
        return flat @ flat.T

    def contains(self, x, tol: float = 1e-6) -> bool:
        x = np.asarray(x, float).ravel()
        if self.dim == 0:
            return float(np.linalg.norm(x)) <= tol
        return float(np.linalg.norm(x - self.projector() @ x)) <= tol * max(1.0, float(np.linalg.norm(x)))

    def sample(self, count: int, seed=None, n_factors: int = 3) -> list:
        if self.dim == 0:
            return [liealg.GroupElement(np.eye(self.space_dim)) for _ in range(count)]
        return liealg.haar_sample(self.basis, count, seed, n_factors)


def _empty(r: int, provenance: str, **meta) -> CurvatureEndoAlgebra:
    return CurvatureEndoAlgebra(r, np.zeros((0, r, r)), provenance, meta)


def closure_algebra(gens, r: int, provenance: str, **meta) -> CurvatureEndoAlgebra:
    gens = [np.asarray(g, float) for g in gens if float(np.linalg.norm(g)) > 1e-12]
    if not gens or r == 0:
        return _empty(r, provenance, **meta)
    return CurvatureEndoAlgebra(r, liealg.lie_closure(gens), provenance, meta)


def sample_curves(germ: OrbitGerm, n_curves: int, seed=None, max_length: float = 2.0,
                  n_segments: int = 3) -> list[list[np.ndarray]]:
    rng = np.random.default_rng(seed)
    return [random_segments(germ, rng, n_segments, max_length) for _ in range(n_curves)]


def transported_tensors(germ: OrbitGerm, curves) -> TransportedTensorSet:
    base = project_curvature(germ)
    out = [((), base)]
    for c in curves:
        u, _ = curve_transport_matrix(germ, c)
        out.append((tuple(c), transport_tensor(base, u)))
    return TransportedTensorSet(out)


def build_L_p(germ: OrbitGerm, n_curves: int = 20, seed=0, max_length: float = 2.0) -> CurvatureEndoAlgebra:
    """Closure of the endomorphisms of transported projected curvature tensors."""
    r = germ.codim
    curves = sample_curves(germ, n_curves, seed, max_length)
    tset = transported_tensors(germ, curves)
    gens: list[np.ndarray] = []
    dims = []
    basis = np.zeros((0, r, r))
    for _, tensor in tset.samples:
        gens.extend(tensor.endomorphisms())
        basis = closure_algebra(list(basis) + gens[-(r * (r - 1) // 2):], r, "L_p").basis if r else basis
        dims.append(len(basis))
    stable_at = next((i for i, d in enumerate(dims) if d == dims[-1]), 0)
    return CurvatureEndoAlgebra(r, basis, "L_p", {"n_curves": n_curves, "dims": dims,
                                                 "stabilized_after": stable_at})


# -- invariant decomposition --------------------------------------------------------


@dataclass(frozen=True, eq=False)
class InvariantDecomposition:
    subspaces: list            # orthonormal bases (r x d_i); index 0 is V0
    irreducible: list          # per subspace i >= 1
    trivial_index: int = 0

    def blocks_report(self) -> list[dict]:
        out = []
        for i, b in enumerate(self.subspaces):
            out.append({"dim": int(b.shape[1]), "irreducible": bool(self.irreducible[i]) if i else False,
                        "trivial": i == 0})
        return out

    @property
    def v0(self) -> np.ndarray:
        return self.subspaces[0]


def symmetric_commutant(basis, space: np.ndarray) -> list[np.ndarray]:
    """Symmetric matrices on span(space) commuting with every element of the algebra."""
    d = space.shape[1]
    if d == 0:
        return []
    mats = [space.T @ x @ space for x in basis]
    sym_basis = []
    for i in range(d):
        for j in range(i, d):
            e = np.zeros((d, d))
            e[i, j] = e[j, i] = 1.0 if i == j else np.sqrt(0.5)
            sym_basis.append(e)
    if not mats:
        return sym_basis
    cols = np.stack([np.concatenate([(x @ s - s @ x).ravel() for x in mats]) for s in sym_basis], axis=1)
    ns = _linalg.null_space(cols, scale=1.0)
    return [np.einsum("i,ijk->jk", ns[:, a], np.stack(sym_basis)) for a in range(ns.shape[1])]


def invariant_decomposition(algebra: CurvatureEndoAlgebra, seed=0, retries: int = 3) -> InvariantDecomposition:
    r = algebra.space_dim
    if algebra.dim == 0:
        return InvariantDecomposition([np.eye(r)], [False])
    stacked = np.vstack(list(algebra.basis))
    v0 = _linalg.null_space(stacked, scale=1.0)
    rest = _linalg.complement(v0, r)
    if rest.shape[1] == 0:
        return InvariantDecomposition([v0], [False])
    comm = symmetric_commutant(algebra.basis, rest)
    rng = np.random.default_rng(seed)
    for _ in range(retries):
        s = np.einsum("i,ijk->jk", rng.standard_normal(len(comm)), np.stack(comm))
        w, v = np.linalg.eigh(s)
        groups = _linalg.group_eigenvalues(w, 1e-6 * max(1.0, float(np.max(np.abs(w)))))
        blocks = [rest @ v[:, g] for g in groups]
        irr = [len(symmetric_commutant(algebra.basis, b)) == 1 for b in blocks]
        if all(irr):
            return InvariantDecomposition([v0] + blocks, [False] + irr)
    raise DecompositionUnstableError("could not split the normal space into irreducible blocks")


def decomposition_residuals(algebra: CurvatureEndoAlgebra, dec: InvariantDecomposition) -> dict:
    inv, ann, prod = 0.0, 0.0, 0.0
    for x in algebra.basis:
        ann = max(ann, float(np.linalg.norm(x @ dec.v0)) if dec.v0.size else 0.0)
        for i, b in enumerate(dec.subspaces):
            if b.size:
                out = x @ b
                inv = max(inv, float(np.linalg.norm(out - b @ (b.T @ out))))
    return {"invariance": inv, "v0_annihilated": ann}


# -- Simons symmetrization -------------------------------------------------------------


def invariance_residual(tensor: AlgebraicCurvatureTensor, algebra: CurvatureEndoAlgebra, n_probe: int = 50,
                        seed=12345) -> float:
    """max over sampled g of |g.R - R| / |R| (0 for the zero tensor)."""
    nrm = tensor.norm()
    if nrm == 0.0:
        return 0.0
    worst = 0.0
    for g in algebra.sample(n_probe, seed):
        worst = max(worst, float(np.linalg.norm(transport_tensor(tensor, g.matrix).values - tensor.values)) / nrm)
    return worst


def simons_symmetrize(tensor: AlgebraicCurvatureTensor, algebra: CurvatureEndoAlgebra, n_samples: int = 10000,
                      seed=0, decomposition: InvariantDecomposition | None = None) -> AlgebraicCurvatureTensor:
    """Monte-Carlo Haar average of the conjugates g^-1 R(g., g.) g."""
    if tensor.norm() == 0.0:
        return tensor
    dec = decomposition or invariant_decomposition(algebra, seed)
    scale = tensor.norm()
    for i, b in enumerate(dec.subspaces[1:], start=1):
        s = tensor.scalar_curvature(b)
        if abs(s) <= 1e-10 * scale:
            raise PreconditionError(f"scalar curvature vanishes on invariant block {i} (dim {b.shape[1]})")
    mats = np.stack([g.matrix for g in algebra.sample(n_samples, seed)])
    acc = np.zeros_like(tensor.values)
    for start in range(0, n_samples, 4096):
        m = mats[start:start + 4096]
        t = np.einsum("abcd,sdl->sabcl", tensor.values, m)
        t = np.einsum("sabcl,sck->sabkl", t, m)
        t = np.einsum("sabkl,sbj->sajkl", t, m)
        acc += np.einsum("sajkl,sai->ijkl", t, m)
    return AlgebraicCurvatureTensor(acc / max(n_samples, 1))


# -- normal holonomy and the polar group -----------------------------------------------


def _skew_log(q: np.ndarray) -> np.ndarray:
    lg = scipy.linalg.logm(q)
    lg = np.real_if_close(lg, tol=1e6).real
    return (lg - lg.T) / 2


def small_loops(germ: OrbitGerm, n_loops: int, seed=0, size: float = 0.05) -> list[list[np.ndarray]]:
    """Commutator-shaped loops of side ``size`` closed by a least-squares segment."""
    rng = np.random.default_rng(seed)
    loops = []
    if germ.dim < 2:
        return loops
    for _ in range(n_loops):
        a, b = rng.standard_normal((2, germ.dim))
        x = germ.m_unit @ (a / np.linalg.norm(a)) * size
        y = germ.m_unit @ (b / np.linalg.norm(b)) * size
        segs, err = close_loop(germ, [x, y, -x, -y])
        if err < 1e-10:
            loops.append(segs)
    return loops


def sample_normal_holonomy(germ: OrbitGerm, n_loops: int = 10, seed=0, n_curves: int = 10,
                           loops=None) -> CurvatureEndoAlgebra:
    """Under-approximation of the normal holonomy algebra.

    Generated by logarithms of small-loop holonomies and by the normal
    curvature endomorphisms (Ricci equation) transported back along random
    curves.
    """
    r = germ.codim
    if r == 0:
        return _empty(0, "phi")
    loops = small_loops(germ, n_loops, seed) if loops is None else loops
    gens = []
    for lp in loops:
        gens.append(_skew_log(loop_holonomy(germ, lp)))
    rperp = germ.normal_curvature()
    n = germ.dim
    ends = [rperp[i, j].T for i in range(n) for j in range(i + 1, n)]
    for c in [[]] + sample_curves(germ, n_curves, seed + 1 if isinstance(seed, int) else None):
        u, _ = curve_transport_matrix(germ, c)
        gens.extend(u.T @ e @ u for e in ends)
    alg = closure_algebra(gens, r, "phi", n_loops=len(loops), n_curves=n_curves)
    return alg


def build_hat_G(germ: OrbitGerm, n_curves: int = 20, n_loops: int = 10, seed=0,
                L_p: CurvatureEndoAlgebra | None = None,
                phi: CurvatureEndoAlgebra | None = None) -> CurvatureEndoAlgebra:
    """Lie algebra of the polar group: closure of L_p and the holonomy part acting on V0."""
    r = germ.codim
    L_p = L_p or build_L_p(germ, n_curves, seed)
    dec = invariant_decomposition(L_p, seed)
    phi = phi or sample_normal_holonomy(germ, n_loops, seed, n_curves)
    p0 = dec.v0 @ dec.v0.T
    gens = list(L_p.basis) + [p0 @ x @ p0 for x in phi.basis]
    alg = closure_algebra(gens, r, "hatG", dim_L_p=L_p.dim, dim_phi=phi.dim,
                          stabilization_curve_counts=L_p.meta.get("dims", []))
    alg.meta["decomposition"] = dec
    return alg


def decomposition_report(germ: OrbitGerm, hat_g: CurvatureEndoAlgebra, seed=0) -> dict:
    dec = invariant_decomposition(hat_g, seed)
    return {
        "dim_L_p": int(hat_g.meta.get("dim_L_p", 0)),
        "dim_hatG": int(hat_g.dim),
        "blocks": dec.blocks_report(),
        "stabilization_curve_counts": [int(d) for d in hat_g.meta.get("stabilization_curve_counts", [])],
    }
