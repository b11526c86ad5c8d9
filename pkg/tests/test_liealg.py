import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from equifocal import liealg
from equifocal.errors import DegenerateError, InputError, ValidationError

ALGEBRAS = [("su", 2), ("su", 3), ("su", 4), ("so", 3), ("so", 4), ("so", 5), ("so", 6)]


def _model(kind, n):
    return liealg.su(n) if kind == "su" else liealg.so(n)


def _matrix_killing(mats):
    """Killing form from matrix commutators only (no structure constants)."""
    d = len(mats)
    flat = np.stack([np.concatenate([m.real.ravel(), m.imag.ravel()]) for m in mats], axis=1)
    coords = lambda m: np.linalg.lstsq(flat, np.concatenate([m.real.ravel(), m.imag.ravel()]), rcond=None)[0]
    ads = []
    for x in mats:
        ads.append(np.stack([coords(x @ y - y @ x) for y in mats], axis=1))
    return np.array([[np.trace(ads[i] @ ads[j]) for j in range(d)] for i in range(d)])


def test_su2_brackets_match_pauli_products():
    m = liealg.su(2)
    # i sigma_1, i sigma_2, i sigma_3:  [i s1, i s2] = -2 i s3
    e1, e2, e3 = np.eye(3)
    assert np.allclose(m.bracket(e1, e2), -2 * e3)
    assert np.allclose(m.bracket(e2, e3), -2 * e1)
    assert np.allclose(m.killing_matrix(), -8 * np.eye(3))


@pytest.mark.parametrize("kind,n", ALGEBRAS)
def test_killing_form_matches_matrix_oracle(kind, n):
    m = _model(kind, n)
    assert np.allclose(m.killing_matrix(), _matrix_killing(m.matrices), atol=1e-9)


@pytest.mark.parametrize("kind,n", ALGEBRAS)
def test_trace_formula_for_killing_form(kind, n):
    m = _model(kind, n)
    c = 2 * n if kind == "su" else n - 2
    tr = np.array([[np.trace(a @ b).real for b in m.matrices] for a in m.matrices])
    assert np.allclose(m.killing_matrix(), c * tr, atol=1e-9)


@pytest.mark.parametrize("kind,n", ALGEBRAS)
def test_validate_reports_small_residuals(kind, n):
    rep = _model(kind, n).validate()
    assert rep["jacobi"] <= 1e-10
    assert rep["killing_max_eigenvalue"] < 0


@pytest.mark.parametrize("kind,n,inv,dk,dp", [
    ("su", 3, "diag:-1,-1,1", 4, 4),
    ("su", 2, "conj", 1, 2),
    ("su", 3, "conj", 3, 5),
    ("so", 4, "diag:1,1,1,-1", 3, 3),
    ("so", 6, "diag:1,1,1,1,1,-1", 10, 5),
    ("su", 4, "diag:-1,-1,-1,1", 9, 6),
])
def test_cartan_dimensions(kind, n, inv, dk, dp):
    pair = liealg.cartan_decompose(_model(kind, n), inv)
    assert (pair.dim_k, pair.dim_p) == (dk, dp)
    assert max(pair.residuals.values()) <= 1e-10


def test_cartan_rejects_non_automorphism():
    m = liealg.su(3)
    bad = np.eye(m.dim)
    bad[0, 0] = -1.0
    with pytest.raises(ValidationError):
        liealg.cartan_decompose(m, bad)


def test_identity_involution_is_degenerate():
    with pytest.raises(DegenerateError):
        liealg.cartan_decompose(liealg.so(3), "id")


def test_unknown_involution_name():
    with pytest.raises(InputError):
        liealg.cartan_decompose(liealg.so(3), "nope")


def test_jacobi_failure_is_reported():
    c = np.zeros((3, 3, 3))
    c[0, 1, 2], c[1, 0, 2] = 1.0, -1.0
    c[1, 2, 0], c[2, 1, 0] = 1.0, -1.0
    c[2, 0, 1], c[0, 2, 1] = 2.0, -2.0
    c[0, 1, 0], c[1, 0, 0] = 1.0, -1.0
    m = liealg.LieAlgebraModel("broken", c, ("a", "b", "c"))
    with pytest.raises(ValidationError) as exc:
        m.validate()
    assert exc.value.residual > 0


def test_json_round_trip(tmp_path):
    m = liealg.so(4)
    p = tmp_path / "so4.json"
    p.write_text(m.to_json("diag:1,1,1,-1"))
    back = liealg.load_model(p)
    assert np.allclose(back.bracket_tensor, m.bracket_tensor)
    assert json.loads(p.read_text())["dim"] == 6
    pair = liealg.cartan_decompose(back, "default")
    assert pair.dim_p == 3


def test_malformed_document():
    with pytest.raises(InputError):
        liealg.model_from_dict({"dim": 3, "bracket": [[0, 1]]})


def test_closure_of_two_rotations_is_so3():
    j12 = np.zeros((3, 3))
    j12[0, 1], j12[1, 0] = 1, -1
    j13 = np.zeros((3, 3))
    j13[0, 2], j13[2, 0] = 1, -1
    basis = liealg.lie_closure([j12, j13])
    assert basis.shape == (3, 3, 3)
    assert liealg.closure_residual(basis) <= 1e-10


def test_closure_of_commuting_generators():
    a = np.zeros((4, 4))
    a[0, 1], a[1, 0] = 1, -1
    b = np.zeros((4, 4))
    b[2, 3], b[3, 2] = 1, -1
    assert liealg.lie_closure([a, b, a + b]).shape[0] == 2


def test_closure_rejects_non_skew():
    with pytest.raises(ValidationError):
        liealg.lie_closure([np.eye(2)])


def test_haar_sampling_on_circle_is_uniform():
    j = np.array([[[0.0, -1.0], [1.0, 0.0]]])
    angles = [np.arctan2(g.matrix[1, 0], g.matrix[0, 0]) for g in liealg.haar_sample(j, 4000, seed=3)]
    hist, _ = np.histogram(angles, bins=8, range=(-np.pi, np.pi))
    assert hist.min() > 400 and hist.max() < 600
    for g in liealg.haar_sample(j, 5, seed=1):
        assert np.allclose(g.matrix.T @ g.matrix, np.eye(2))


vec8 = st.lists(st.floats(-2, 2, allow_nan=False), min_size=8, max_size=8).map(np.array)


@settings(max_examples=40, deadline=None)
@given(vec8, vec8, vec8)
def test_jacobi_identity_su3(x, y, z):
    m = liealg.su(3)
    b = m.bracket
    total = b(x, b(y, z)) + b(y, b(z, x)) + b(z, b(x, y))
    assert np.linalg.norm(total) <= 1e-10 * (1 + np.linalg.norm(x) * np.linalg.norm(y) * np.linalg.norm(z))


@settings(max_examples=40, deadline=None)
@given(vec8)
def test_ad_is_skew_for_the_inner_product(x):
    m = liealg.su(3)
    g = m.inner_matrix()
    a = m.ad(x)
    assert np.allclose(g @ a, -(g @ a).T, atol=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.1, 10.0))
def test_scaling_rescales_inner_product_only(s):
    m = liealg.so(4)
    ms = m.with_scale(s)
    assert np.allclose(ms.inner_matrix(), s * m.inner_matrix())
    assert np.allclose(ms.bracket_tensor, m.bracket_tensor)
