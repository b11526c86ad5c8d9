import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from equifocal import symspace, torusvar
from equifocal.errors import InputError, PreconditionError


def test_irrational_slope_is_not_a_subtorus():
    assert torusvar.subtorus_test(np.eye(2), [1.0, np.sqrt(2)]).decided is False
    assert torusvar.subtorus_test(np.eye(2), [1.0, (1 + np.sqrt(5)) / 2]).decided is False


def test_rational_plane_in_z3():
    plane = np.array([[1.0, 0.0, 2.0], [0.0, 1.0, 0.0]]).T
    res = torusvar.subtorus_test(np.eye(3), plane * 0.37)
    assert res.decided is True
    b = res.lattice_subspace.rational_basis
    assert np.allclose(b, np.round(b))
    # integer basis spans the same plane
    q1, _ = np.linalg.qr(b)
    q2, _ = np.linalg.qr(plane)
    assert np.allclose(q1 @ q1.T, q2 @ q2.T, atol=1e-12)


def test_near_rational_is_inconclusive():
    res = torusvar.subtorus_test(np.eye(2), [1.0, 1 / 7 + 1e-10])
    assert res.decided is None
    assert res.witness["near_fraction"] == "1/7"


def test_dependent_or_bad_input():
    with pytest.raises(InputError):
        torusvar.subtorus_test(np.eye(2), np.array([[1.0, 2.0], [2.0, 4.0]]))
    with pytest.raises(InputError):
        torusvar.subtorus_test(np.ones((2, 2)), [1.0, 0.0])


def test_skew_lattice():
    """Hexagonal lattice: the line through x1 + x2 is rational even though its slope in R^2 is not."""
    x = np.array([[1.0, 0.5], [0.0, np.sqrt(3) / 2]])
    assert torusvar.subtorus_test(x, x @ [1.0, 1.0]).decided is True
    assert torusvar.subtorus_test(x, [1.0, 0.0]).decided is True
    assert torusvar.subtorus_test(x, [0.0, 1.0]).decided is True      # 2 x2 - x1
    assert torusvar.subtorus_test(x, [1.0, 1.0]).decided is False


ints = st.integers(-6, 6)


@settings(max_examples=60, deadline=None)
@given(st.lists(ints, min_size=6, max_size=6), st.floats(0.1, 5.0))
def test_integer_spans_are_subtori(coeffs, scale):
    c = np.array(coeffs, float).reshape(3, 2)
    if np.linalg.matrix_rank(c) < 2:
        return
    lattice = np.array([[1.0, 0.3, 0.0], [0.0, 1.0, 0.2], [0.1, 0.0, 1.0]])
    assert torusvar.subtorus_test(lattice, scale * lattice @ c).decided is True


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 9), st.integers(1, 9), st.sampled_from([2, 3, 5, 6, 7]))
def test_quadratic_irrational_lines_are_never_called_rational(a, b, m):
    slope = (a + b * np.sqrt(m)) / 3.0
    assert torusvar.subtorus_test(np.eye(2), [1.0, slope]).decided is not True


def test_golden_ratio_line_is_decided():
    # all partial quotients are 1, so no fraction with q <= 1e6 comes near
    assert torusvar.subtorus_test(np.eye(2), [1.0, (1 + np.sqrt(5)) / 2]).witness["error"] > 1e-13


def _plane_family(times, plane):
    a, b = np.linalg.qr(plane)[0].T
    return torusvar.torus_family(times, [np.stack([np.cos(t) * a + np.sin(t) * b,
                                                   -np.sin(t) * a + np.cos(t) * b], axis=1) for t in times])


def test_constant_family_is_rigid():
    plane = np.array([[1.0, 0.0, 2.0], [0.0, 1.0, 0.0]]).T
    fam = torusvar.torus_family(np.linspace(0, 1, 5), [plane] * 5)
    assert torusvar.lattice_rigidity_check(fam, np.eye(3))["passed"]


def test_smooth_family_through_subtori_is_constant():
    plane = np.array([[1.0, 0.0, 2.0], [0.0, 1.0, 0.0]]).T
    rep = torusvar.lattice_rigidity_check(_plane_family(np.linspace(0, 1, 11), plane), np.eye(3))
    assert rep["passed"] and rep["applicable"] and rep["max_angle"] <= 1e-8


def test_jumping_family_is_flagged_not_applicable():
    lines = [np.array([[1.0, k]]).T for k in (0, 1, 2, 3)]
    rep = torusvar.lattice_rigidity_check(torusvar.torus_family([0.0, 0.01, 0.02, 0.03], lines), np.eye(2))
    assert not rep["applicable"] and not rep["passed"]
    assert "smoothness" in rep["reason"]


def test_family_member_off_lattice_is_precondition_error():
    lines = [np.array([[1.0, 0.0]]).T, np.array([[1.0, np.sqrt(2)]]).T]
    with pytest.raises(PreconditionError):
        torusvar.lattice_rigidity_check(torusvar.torus_family([0.0, 1.0], lines), np.eye(2))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0.0, 3.0), min_size=2, max_size=6, unique=True))
def test_comparison_isometries_are_orthogonal(times):
    times = sorted(times)
    rng = np.random.default_rng(len(times))
    plane = rng.standard_normal((4, 2))
    fam = _plane_family(times, plane)
    for i in range(len(times)):
        m = fam.comparison_isometry(i)
        v0 = fam.bases[0]
        assert np.allclose((m @ v0).T @ (m @ v0), np.eye(2), atol=1e-8)


def test_family_abelian(su3so3, rng):
    f = symspace.maximal_abelian_through(su3so3, rng.standard_normal(5))
    fam = torusvar.torus_family([0.0, 0.5], [f.basis, f.basis])
    assert torusvar.family_abelian_residual(su3so3, fam) <= 1e-12


def test_transport_by_isometries_at_zero(veronese):
    res = torusvar.isometry_transport_check(veronese, veronese.m_unit[:, 0], t_values=(0.0,))
    assert res["residual"] == 0.0


def test_transport_by_isometries_srep(veronese):
    for i in range(veronese.dim):
        res = torusvar.isometry_transport_check(veronese, 1.3 * veronese.m_unit[:, i], seed=i)
        assert res["residual"] <= 1e-6


def test_transport_residual_converges_with_step(veronese):
    z = 1.5 * veronese.m_unit[:, 0]
    coarse = torusvar.isometry_transport_check(veronese, z, t_values=(1.0,), steps_per_unit=16)["residual"]
    fine = torusvar.isometry_transport_check(veronese, z, t_values=(1.0,), steps_per_unit=32)["residual"]
    assert fine <= coarse / 2


def test_isometry_not_mapping_normal_spaces(veronese):
    z = veronese.m_unit[:, 0]
    amb = veronese.ambient
    with pytest.raises(InputError):
        torusvar.isometry_transport_check(veronese, z, isometry=lambda t: amb.group_exp(2 * t * z))


def test_killing_field_normal_to_flat_torus(su3so3, rng):
    f = symspace.maximal_abelian_through(su3so3, rng.standard_normal(5))
    perp = np.linalg.svd(f.basis)[0][:, 2:]
    y = su3so3.embed(perp @ rng.standard_normal(3))
    y[: su3so3.dim_k] = rng.standard_normal(su3so3.dim_k)
    res = torusvar.killing_field_normality(su3so3, f.basis, y, n_samples=5)
    assert res["passed"] and res["tangential_ratio"] <= 1e-6


def test_killing_field_hypothesis_checked(su3so3, rng):
    f = symspace.maximal_abelian_through(su3so3, rng.standard_normal(5))
    with pytest.raises(InputError):
        torusvar.killing_field_normality(su3so3, f.basis, su3so3.embed(f.basis[:, 0]))


def test_ill_conditioned_rational_plane_is_decided():
    """Nearly parallel spanning vectors amplify round-off in the reduced form."""
    lattice = np.array([[1.2, 0.3, -0.1], [0.2, 0.9, 0.4], [-0.3, 0.1, 1.1]])
    u = np.array([[1, 1, 0], [0, 1, 1], [1, 2, 2]])
    plane = lattice @ u @ np.array([[1.0, 0.0], [0.0, 1.0], [4 / 7, -5 / 3]]) @ np.array([[3.0, 2.9], [1.0, 1.1]])
    res = torusvar.subtorus_test(lattice, plane)
    assert res.decided is True


def test_denominator_cap_follows_tolerance():
    res = torusvar.subtorus_test(np.eye(2), [1.0, np.sqrt(2)], tol=1e-10)
    assert res.decided is False
    assert res.witness["max_denominator"] == int(np.sqrt(torusvar.COINCIDENCE / (1e-10 * np.sqrt(2))))
