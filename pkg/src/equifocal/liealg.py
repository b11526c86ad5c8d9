"""Finite-dimensional compact Lie algebras given by structure constants.

Everything downstream works with a :class:`LieAlgebraModel` (structure
constants ``c[i, j, k]`` with ``[e_i, e_j] = sum_k c[i, j, k] e_k``) and never
with a matrix realization.  The :func:`su` and :func:`so` generators build
the structure constants from matrices once and keep the matrices only as an
optional realization for test oracles.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg

from . import _linalg
from .errors import DegenerateError, InputError, ValidationError

JACOBI_TOL = 1e-10
CARTAN_TOL = 1e-10
SKEW_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class LieAlgebraModel:
    name: str
    bracket_tensor: np.ndarray
    basis_labels: tuple[str, ...]
    # inner product is -scale * Killing form
    scale: float = 1.0
    involutions: dict = field(default_factory=dict)
    matrices: np.ndarray | None = None

    def __post_init__(self):
        c = np.asarray(self.bracket_tensor, dtype=float)
        if c.ndim != 3 or not (c.shape[0] == c.shape[1] == c.shape[2]):
            raise InputError(f"bracket tensor must be (d, d, d), got {c.shape}")
        if len(self.basis_labels) != c.shape[0]:
            raise InputError("basis_labels length does not match dimension")
        object.__setattr__(self, "bracket_tensor", c)

    @property
    def dim(self) -> int:
        return self.bracket_tensor.shape[0]

    def _check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise InputError(f"expected vectors of length {self.dim}, got {x.shape}")
        return x

    def bracket(self, x, y) -> np.ndarray:
        x, y = self._check(x), self._check(y)
        return np.einsum("i,j,ijk->k", x, y, self.bracket_tensor)

    def ad(self, x) -> np.ndarray:
        """Matrix of ``ad_x`` acting on coordinate column vectors."""
        x = self._check(x)
        return np.einsum("i,ijk->kj", x, self.bracket_tensor)

    def ad_basis(self) -> np.ndarray:
        """``ad`` of every basis vector, shape (d, d, d)."""
        return np.transpose(self.bracket_tensor, (0, 2, 1))

    def killing_matrix(self) -> np.ndarray:
        ads = self.ad_basis()
        return np.einsum("iab,jba->ij", ads, ads)

    def inner_matrix(self) -> np.ndarray:
        return -self.scale * self.killing_matrix()

    def killing_form(self, x, y) -> float:
        x, y = self._check(x), self._check(y)
        return float(np.trace(self.ad(x) @ self.ad(y)))

    def inner(self, x, y) -> float:
        return -self.scale * self.killing_form(x, y)

    def jacobi_residual(self) -> float:
        c = self.bracket_tensor
        # [e_i,[e_j,e_k]] + cyclic
        t = np.einsum("jkm,imn->ijkn", c, c)
        total = t + np.transpose(t, (1, 2, 0, 3)) + np.transpose(t, (2, 0, 1, 3))
        return float(np.max(np.abs(total))) if total.size else 0.0

    def antisymmetry_residual(self) -> float:
        c = self.bracket_tensor
        return float(np.max(np.abs(c + np.transpose(c, (1, 0, 2))))) if c.size else 0.0

    def validate(self, compact: bool = True) -> dict:
        """Check antisymmetry, Jacobi and (for compact type) negative definiteness."""
        report = {
            "antisymmetry": self.antisymmetry_residual(),
            "jacobi": self.jacobi_residual(),
        }
        if report["antisymmetry"] > JACOBI_TOL:
            raise ValidationError("bracket is not antisymmetric", report["antisymmetry"])
        if report["jacobi"] > JACOBI_TOL:
            raise ValidationError("Jacobi identity fails", report["jacobi"])
        kill = self.killing_matrix()
        report["killing_symmetry"] = float(np.max(np.abs(kill - kill.T)))
        eig = np.linalg.eigvalsh((kill + kill.T) / 2)
        report["killing_max_eigenvalue"] = float(eig.max())
        if compact and eig.max() >= -1e-10:
            raise ValidationError("Killing form is not negative definite", float(eig.max()))
        return report

    def with_scale(self, scale: float) -> "LieAlgebraModel":
        return LieAlgebraModel(self.name, self.bracket_tensor, self.basis_labels, float(scale),
                               dict(self.involutions), self.matrices)

    # -- serialization -------------------------------------------------

    def to_dict(self, involution: str | None = None) -> dict:
        c = self.bracket_tensor
        triplets = [[int(i), int(j), int(k), float(c[i, j, k])]
                    for i, j, k in zip(*np.nonzero(np.abs(c) > 1e-15))]
        doc = {
            "name": self.name,
            "dim": self.dim,
            "basis_labels": list(self.basis_labels),
            "bracket": triplets,
        }
        if self.scale != 1.0:
            doc["scale"] = self.scale
        if self.involutions:
            key = involution or next(iter(self.involutions))
            doc["involution"] = np.asarray(self.involutions[key]).tolist()
            doc["involutions"] = {k: np.asarray(v).tolist() for k, v in self.involutions.items()}
        return doc

    def to_json(self, involution: str | None = None) -> str:
        return json.dumps(self.to_dict(involution), sort_keys=True)


def model_from_dict(doc: dict) -> LieAlgebraModel:
    try:
        dim = int(doc["dim"])
        labels = tuple(doc.get("basis_labels") or [f"e{i}" for i in range(dim)])
        c = np.zeros((dim, dim, dim))
        for i, j, k, v in doc["bracket"]:
            c[int(i), int(j), int(k)] = float(v)
    except (KeyError, ValueError, TypeError, IndexError) as exc:
        raise InputError(f"malformed algebra document: {exc}") from exc
    invs = {k: np.asarray(v, dtype=float) for k, v in (doc.get("involutions") or {}).items()}
    if "involution" in doc and doc["involution"] is not None:
        invs.setdefault("default", np.asarray(doc["involution"], dtype=float))
    return LieAlgebraModel(doc.get("name", "algebra"), c, labels, float(doc.get("scale", 1.0)), invs)


def load_model(path) -> LieAlgebraModel:
    return model_from_dict(json.loads(Path(path).read_text()))


def bracket(model: LieAlgebraModel, x, y) -> np.ndarray:
    return model.bracket(x, y)


def killing_form(model: LieAlgebraModel, x, y) -> float:
    return model.killing_form(x, y)


# -- matrix-built algebras -----------------------------------------------------


def _coords(basis_flat: np.ndarray, mat: np.ndarray) -> np.ndarray:
    target = np.concatenate([mat.real.ravel(), mat.imag.ravel()])
    sol, *_ = np.linalg.lstsq(basis_flat, target, rcond=None)
    return sol


def model_from_matrices(name: str, mats, labels) -> LieAlgebraModel:
    mats = np.asarray(mats)
    d = len(mats)
    flat = np.stack([np.concatenate([m.real.ravel(), m.imag.ravel()]) for m in mats], axis=1)
    c = np.zeros((d, d, d))
    for i in range(d):
        for j in range(i + 1, d):
            com = mats[i] @ mats[j] - mats[j] @ mats[i]
            c[i, j] = _coords(flat, com)
            c[j, i] = -c[i, j]
    return LieAlgebraModel(name, c, tuple(labels), matrices=mats)


def matrix_involution(model: LieAlgebraModel, fn) -> np.ndarray:
    """Matrix (in the model basis) of the linear map induced by ``fn`` on matrices."""
    if model.matrices is None:
        raise InputError("model has no matrix realization")
    mats = model.matrices
    flat = np.stack([np.concatenate([m.real.ravel(), m.imag.ravel()]) for m in mats], axis=1)
    return np.stack([_coords(flat, fn(m)) for m in mats], axis=1)


def _diag_conjugation(signs):
    s = np.diag(np.asarray(signs, dtype=float))
    return lambda m: s @ m @ s


def su(n: int) -> LieAlgebraModel:
    """su(n) with basis ``i * lambda_a`` (generalized Gell-Mann matrices)."""
    mats, labels = [], []
    for j in range(n):
        for k in range(j + 1, n):
            s = np.zeros((n, n), complex)
            s[j, k] = s[k, j] = 1
            mats.append(1j * s)
            labels.append(f"S{j + 1}{k + 1}")
            a = np.zeros((n, n), complex)
            a[j, k], a[k, j] = -1j, 1j
            mats.append(1j * a)
            labels.append(f"A{j + 1}{k + 1}")
    for l in range(1, n):
        d = np.zeros(n)
        d[:l] = 1
        d[l] = -l
        mats.append(1j * np.diag(d) * np.sqrt(2.0 / (l * (l + 1))))
        labels.append(f"H{l}")
    model = model_from_matrices(f"su({n})", mats, labels)
    invs = {"conj": matrix_involution(model, np.conj)}
    for k in range(1, n):
        signs = [-1.0] * k + [1.0] * (n - k)
        invs["diag:" + ",".join(str(int(s)) for s in signs)] = matrix_involution(model, _diag_conjugation(signs))
    return LieAlgebraModel(model.name, model.bracket_tensor, model.basis_labels, 1.0, invs, model.matrices)


def so(n: int) -> LieAlgebraModel:
    """so(n) with basis ``E_jk - E_kj`` for j < k."""
    mats, labels = [], []
    for j in range(n):
        for k in range(j + 1, n):
            m = np.zeros((n, n))
            m[j, k], m[k, j] = 1.0, -1.0
            mats.append(m)
            labels.append(f"J{j + 1}{k + 1}")
    model = model_from_matrices(f"so({n})", mats, labels)
    invs = {}
    for k in range(1, n):
        signs = [1.0] * (n - k) + [-1.0] * k
        invs["diag:" + ",".join(str(int(s)) for s in signs)] = matrix_involution(model, _diag_conjugation(signs))
    return LieAlgebraModel(model.name, model.bracket_tensor, model.basis_labels, 1.0, invs, model.matrices)


def involution_from_spec(model: LieAlgebraModel, spec) -> np.ndarray:
    """Resolve an involution given by name, by ``{"diag": signs}``, or as a matrix."""
    if isinstance(spec, str):
        if spec in model.involutions:
            return np.asarray(model.involutions[spec], dtype=float)
        if spec == "id":
            return np.eye(model.dim)
        raise InputError(f"unknown involution {spec!r}; known: {sorted(model.involutions)}")
    if isinstance(spec, dict) and "diag" in spec:
        return matrix_involution(model, _diag_conjugation(spec["diag"]))
    mat = np.asarray(spec, dtype=float)
    if mat.shape != (model.dim, model.dim):
        raise InputError(f"involution matrix must be {model.dim}x{model.dim}")
    return mat


# -- Cartan decomposition --------------------------------------------------------


def _inner_orthonormalize(vecs: np.ndarray, gram: np.ndarray) -> np.ndarray:
    if vecs.shape[1] == 0:
        return vecs
    g = vecs.T @ gram @ vecs
    w, v = np.linalg.eigh((g + g.T) / 2)
    return vecs @ v @ np.diag(w ** -0.5) @ v.T


@dataclass(frozen=True, eq=False)
class CartanDecomposition:
    """Splitting g = k + p with orthonormal bases for the model's inner product.

    ``adapted`` is the same algebra rewritten in the basis ``[k_basis | p_basis]``
    so that coordinates ``[:dim_k]`` are the k-part and ``[dim_k:]`` the p-part.
    """

    parent: LieAlgebraModel
    involution: np.ndarray
    k_basis: np.ndarray
    p_basis: np.ndarray
    adapted: LieAlgebraModel
    residuals: dict

    @property
    def dim_k(self) -> int:
        return self.k_basis.shape[1]

    @property
    def dim_p(self) -> int:
        return self.p_basis.shape[1]

    @property
    def frame(self) -> np.ndarray:
        return np.hstack([self.k_basis, self.p_basis])

    def to_adapted(self, x) -> np.ndarray:
        return self.frame.T @ self.parent.inner_matrix() @ np.asarray(x, dtype=float)

    def from_adapted(self, x) -> np.ndarray:
        return self.frame @ np.asarray(x, dtype=float)

    def embed_p(self, x) -> np.ndarray:
        """p-coordinates -> adapted g-coordinates."""
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1] + (self.parent.dim,))
        out[..., self.dim_k:] = x
        return out

    def embed_k(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1] + (self.parent.dim,))
        out[..., : self.dim_k] = x
        return out


def cartan_decompose(model: LieAlgebraModel, involution) -> CartanDecomposition:
    theta = involution_from_spec(model, involution)
    d = model.dim
    sq = float(np.max(np.abs(theta @ theta - np.eye(d))))
    c = model.bracket_tensor
    # theta[e_i, e_j] - [theta e_i, theta e_j]
    lhs = np.einsum("ijk,lk->ijl", c, theta)
    rhs = np.einsum("ai,bj,abk->ijk", theta, theta, c)
    auto = float(np.max(np.abs(lhs - rhs)))
    if sq > CARTAN_TOL or auto > CARTAN_TOL:
        raise ValidationError(
            f"involution is not an involutive automorphism (theta^2 residual {sq:.3g}, "
            f"automorphism residual {auto:.3g})", max(sq, auto))
    gram = model.inner_matrix()
    k_raw = _linalg.null_space(theta - np.eye(d), scale=1.0)
    p_raw = _linalg.null_space(theta + np.eye(d), scale=1.0)
    if p_raw.shape[1] == 0:
        raise DegenerateError("degenerate pair: the -1 eigenspace p is {0}")
    k_basis = _inner_orthonormalize(k_raw, gram)
    p_basis = _inner_orthonormalize(p_raw, gram)
    frame = np.hstack([k_basis, p_basis])
    inv_frame = frame.T @ gram
    c_ad = np.einsum("ia,jb,ijk,lk->abl", frame, frame, c, inv_frame)
    labels = tuple(f"k{i}" for i in range(k_basis.shape[1])) + tuple(f"p{i}" for i in range(p_basis.shape[1]))
    mats = None
    if model.matrices is not None:
        mats = np.einsum("ia,ijk->ajk", frame, model.matrices)
    adapted = LieAlgebraModel(model.name + "/adapted", c_ad, labels, model.scale, {}, mats)
    dk = k_basis.shape[1]
    kk = float(np.max(np.abs(c_ad[:dk, :dk, dk:]))) if dk else 0.0
    kp = float(np.max(np.abs(c_ad[:dk, dk:, :dk]))) if dk else 0.0
    pp = float(np.max(np.abs(c_ad[dk:, dk:, dk:])))
    orth = float(np.max(np.abs(k_basis.T @ gram @ p_basis))) if dk else 0.0
    residuals = {"theta_squared": sq, "automorphism": auto, "kk_in_k": kk, "kp_in_p": kp,
                 "pp_in_k": pp, "k_perp_p": orth}
    worst = max(kk, kp, pp, orth)
    if worst > CARTAN_TOL * max(1.0, float(np.max(np.abs(c_ad)))):
        raise ValidationError("bracket inclusions of the Cartan decomposition fail", worst)
    return CartanDecomposition(model, theta, k_basis, p_basis, adapted, residuals)


# -- closure and sampling ------------------------------------------------------------


def lie_closure(generators, tol: float = 1e-8, max_sweeps: int | None = None) -> np.ndarray:
    """Frobenius-orthonormal basis of the Lie algebra generated by skew matrices.

    Returns an array of shape (dim, n, n); ``dim`` may be 0.
    """
    gens = [np.asarray(g, dtype=float) for g in generators]
    if not gens:
        return np.zeros((0, 0, 0))
    n = gens[0].shape[0]
    for g in gens:
        if g.shape != (n, n):
            raise InputError("generators must all be square of the same size")
        res = _linalg.skew_residual(g)
        if res > SKEW_TOL * max(1.0, float(np.max(np.abs(g)))):
            raise ValidationError("generator is not skew-symmetric", res)
    scale = max(float(np.linalg.norm(g)) for g in gens)
    if scale == 0.0:
        return np.zeros((0, n, n))
    flat = np.stack([g.ravel() / scale for g in gens], axis=1)
    basis = _linalg.orthonormal_span(flat, tol)
    limit = max_sweeps or n * (n - 1) // 2 + 2
    for _ in range(limit):
        mats = basis.T.reshape(-1, n, n)
        k = len(mats)
        if k == 0:
            break
        coms = [mats[i] @ mats[j] - mats[j] @ mats[i] for i in range(k) for j in range(i + 1, k)]
        if not coms:
            break
        new = _linalg.orthonormal_span(np.hstack([basis, np.stack([c.ravel() for c in coms], axis=1)]),
                                       tol, scale=1.0)
        if new.shape[1] == basis.shape[1]:
            break
        basis = new
    return basis.T.reshape(-1, n, n)


def closure_residual(basis) -> float:
    """Largest component of a pairwise bracket outside span(basis)."""
    basis = np.asarray(basis)
    if len(basis) == 0:
        return 0.0
    n = basis.shape[1]
    flat = basis.reshape(len(basis), -1).T
    proj = flat @ flat.T
    worst = 0.0
    for i in range(len(basis)):
        for j in range(i + 1, len(basis)):
            c = (basis[i] @ basis[j] - basis[j] @ basis[i]).ravel()
            worst = max(worst, float(np.linalg.norm(c - proj @ c)))
    return worst


@dataclass(frozen=True, eq=False)
class GroupElement:
    matrix: np.ndarray
    # coefficient vectors of the exponential factors, in application order
    provenance: tuple = ()

    def __call__(self, v):
        return self.matrix @ v


def _unit_generators(basis) -> list[np.ndarray]:
    out = []
    for x in basis:
        nrm = float(np.max(np.abs(np.linalg.eigvals(x)))) if x.size else 0.0
        if nrm > 0:
            out.append(np.asarray(x, dtype=float) / nrm)
    return out


def haar_sample(basis, count: int, seed=None, n_factors: int = 3) -> list[GroupElement]:
    """Random elements of the connected group of a compact algebra of skew matrices.

    Each element is a product of ``n_factors`` exponentials whose coefficients
    are uniform in [-pi, pi] along spectrally normalized basis directions.
    """
    rng = np.random.default_rng(seed)
    basis = np.asarray(basis, dtype=float)
    if count <= 0:
        return []
    gens = _unit_generators(basis)
    if not gens:
        n = basis.shape[-1] if basis.ndim == 3 else 0
        return [GroupElement(np.eye(n)) for _ in range(count)]
    gens = np.stack(gens)
    coeffs = rng.uniform(-np.pi, np.pi, (count, n_factors, len(gens)))
    factors = scipy.linalg.expm(np.einsum("cfi,ijk->cfjk", coeffs, gens))
    mats = factors[:, 0]
    for f in range(1, n_factors):
        mats = mats @ factors[:, f]
    return [GroupElement(mats[c], tuple(coeffs[c])) for c in range(count)]


def exp_algebra(basis, coeffs) -> np.ndarray:
    basis = np.asarray(basis, dtype=float)
    return scipy.linalg.expm(np.einsum("i,ijk->jk", np.asarray(coeffs, dtype=float), basis))
