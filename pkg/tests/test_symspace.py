import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from equifocal import symspace
from equifocal.errors import DegenerateError, InputError


def _p_matrices(germ):
    pair = germ.pair
    return np.einsum("ia,ijk->ajk", pair.p_basis, pair.parent.matrices)


def _jacobi_by_matrices(germ, eta):
    """Dense eigenvalues of z -> -[[z, eta], eta] computed with matrix commutators."""
    mats = _p_matrices(germ)
    flat = np.stack([np.concatenate([m.real.ravel(), m.imag.ravel()]) for m in mats], axis=1)
    h = np.einsum("a,ajk->jk", eta, mats)
    cols = []
    for z in mats:
        zh = z @ h - h @ z
        out = -(zh @ h - h @ zh)
        cols.append(np.linalg.lstsq(flat, np.concatenate([out.real.ravel(), out.imag.ravel()]), rcond=None)[0])
    op = np.stack(cols, axis=1)
    return np.sort(np.linalg.eigvalsh((op + op.T) / 2))


def test_cp2_jacobi_levels(cp2, rng):
    for _ in range(5):
        eta = rng.standard_normal(cp2.dim)
        eta /= np.linalg.norm(eta)
        spec = symspace.jacobi_spectrum(cp2, eta)
        levels = spec.levels()
        assert len(levels) == 2
        assert levels[1] / levels[0] == pytest.approx(4.0, abs=1e-6)
        assert np.allclose(np.sort(spec.eigenvalues), _jacobi_by_matrices(cp2, eta), atol=1e-10)
    assert levels == pytest.approx([1 / 12, 1 / 3], abs=1e-12)


@pytest.mark.parametrize("name,m", [("s2", 3), ("s3", 4), ("s4", 5), ("s5", 6)])
def test_spheres_have_constant_curvature(name, m, rng):
    g = symspace.named_germ(name)
    kappa = 1.0 / (2 * (m - 2))
    for _ in range(5):
        x, y = rng.standard_normal((2, g.dim))
        assert symspace.sectional_curvature(g, x, y) == pytest.approx(kappa, abs=1e-12)


def test_curvature_identities(cp2, s3):
    for g in (cp2, s3):
        res = symspace.curvature_identity_residuals(g, 200, seed=1)
        assert max(res["antisym_xy"], res["antisym_zw"], res["pair_symmetry"], res["bianchi"]) <= 1e-9
        assert res["min_sectional"] >= -1e-10


def test_rank_of_flats(cp2, su3so3, s3, rng):
    assert symspace.maximal_abelian_through(cp2, rng.standard_normal(4)).dimension == 1
    assert symspace.maximal_abelian_through(su3so3, rng.standard_normal(5)).dimension == 2
    assert symspace.maximal_abelian_through(s3, rng.standard_normal(3)).dimension == 1


def test_flat_is_abelian(su3so3, rng):
    f = symspace.maximal_abelian_through(su3so3, rng.standard_normal(5))
    assert symspace.abelian_residual(su3so3, f.basis) <= 1e-12


def test_zero_direction_errors(cp2):
    with pytest.raises(DegenerateError):
        symspace.jacobi_spectrum(cp2, np.zeros(4))
    with pytest.raises(DegenerateError):
        symspace.maximal_abelian_through(cp2, np.zeros(4))


def test_k_vector_rejected(cp2):
    v = np.zeros(cp2.dim_g)
    v[0] = 1.0
    with pytest.raises(InputError):
        cp2.as_p(v)


def test_flat_transport_matches_ode(su3so3, rng):
    f = symspace.maximal_abelian_through(su3so3, rng.standard_normal(5))
    d = f.basis @ rng.standard_normal(2)
    v = rng.standard_normal(5)
    a = symspace.transport_along_flat(su3so3, f, v, d, 0.8)
    b = symspace.transport_along_geodesic_ode(su3so3, v, d, 0.8)
    assert np.linalg.norm(a - b) <= 1e-8
    # vectors in the flat are fixed
    w = f.basis[:, 0]
    assert np.allclose(symspace.transport_along_flat(su3so3, f, w, d, 0.8), su3so3.embed(w), atol=1e-12)


def test_transport_off_flat_rejected(cp2):
    f = symspace.FlatSubspace(np.eye(4)[:, :1])
    with pytest.raises(InputError):
        symspace.transport_along_flat(cp2, f, np.ones(4), np.eye(4)[1], 1.0)


def test_unknown_pair():
    with pytest.raises(InputError):
        symspace.named_germ("hyperbolic")


def test_cp2_diameter_from_cartan_embedding(cp2):
    """Points at distance pi*sqrt(3) along a geodesic coincide (closed geodesics of CP^2)."""
    eta = np.eye(4)[0]
    g0 = np.eye(cp2.dim_g)
    ell = 2 * np.pi * np.sqrt(3)
    assert cp2.point_distance(g0, cp2.exp_point(g0, ell * eta)) <= 1e-9
    assert cp2.point_distance(g0, cp2.exp_point(g0, 0.5 * ell * eta)) > 0.1


p4 = st.lists(st.floats(-3, 3, allow_nan=False), min_size=4, max_size=4).map(np.array)


@settings(max_examples=50, deadline=None)
@given(p4, p4)
def test_sectional_numerator_is_bracket_norm(x, y):
    g = symspace.named_germ("cp2")
    rxy = np.einsum("abcd,a,b,c,d->", g.curvature_tensor, x, y, y, x)
    br = g.bracket(g.embed(x), g.embed(y))
    assert rxy == pytest.approx(float(br @ br), abs=1e-9 * (1 + np.linalg.norm(x) ** 2 * np.linalg.norm(y) ** 2))


@settings(max_examples=30, deadline=None)
@given(p4)
def test_jacobi_operator_is_symmetric_psd(eta):
    g = symspace.named_germ("cp2")
    j = symspace.jacobi_operator(g, eta)
    assert np.allclose(j, j.T, atol=1e-10)
    assert np.linalg.eigvalsh(j).min() >= -1e-10
